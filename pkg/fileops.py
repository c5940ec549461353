from os import listdir, path
from typing import Dict, List
import os
import json

from errors import UsageError
from logger import logger
from schemas import load_diagram_file
from utils import cleanfilename

DIAGRAM_DIR = path.join(path.dirname(path.abspath(__file__)), "diagrams")

#==================================================================#
#  Returns the path (as a string) to the given bundled diagram by its name
#==================================================================#
def diagrampath(name):
    return path.join(DIAGRAM_DIR, cleanfilename(name) + ".json")

def diagramexists(name):
    return path.exists(diagrampath(name))

#==================================================================#
#  Loads a bundled diagram description as a dict
#==================================================================#
def loaddiagram(name) -> Dict:
    if not diagramexists(name):
        raise UsageError(f"no bundled diagram named {name!r} (see --list-diagrams)")
    with open(diagrampath(name), "r") as f:
        try:
            js = json.load(f)
        except json.JSONDecodeError:
            raise UsageError(f"bundled diagram {name!r} is not valid JSON")
    return load_diagram_file(js)

#==================================================================#
#  Returns an array of dicts describing the files in /diagrams
#==================================================================#
def getdiagramfiles() -> List[Dict]:
    list = []
    for file in sorted(listdir(DIAGRAM_DIR)):
        if not file.endswith(".json"):
            continue
        name = file[:-len(".json")]
        try:
            js = loaddiagram(name)
        except UsageError as e:
            logger.warning(f"Diagram library: {e}")
            continue
        list.append({"name": name, "description": js.get("description", ""), "pd": js["pd"], "free_loops": js["free_loops"], "basepoints": js["basepoints"]})
    return list

#==================================================================#
#  Writes a finished report to disk
#==================================================================#
def savereport(filename, text):
    directory = path.dirname(path.abspath(filename))
    if not path.isdir(directory):
        os.makedirs(directory, exist_ok=True)
    with open(filename, "w") as f:
        f.write(text)
    logger.message(f"Report written to {filename}")
