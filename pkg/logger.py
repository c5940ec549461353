'''
loguru setup for the calculator. Standard output carries the reports, so
every sink writes to standard error, one sink per group of levels.
'''
import sys
from functools import partialmethod
from loguru import logger

# level: (number, color, group)
LEVELS = {
    # Sizes of the complexes as they are assembled
    "COMPLEX": (24, "<cyan>", "cube"),
    # Outcome of a checked identity
    "VERIFY": (23, "<yellow>", "cube"),
    # Diagram and basepoint parsing, status in extra["status"]
    "INPUT": (31, "<white>", "input"),
    "INPUT_OK": (31, "<green>", "input"),
    "INPUT_WARN": (31, "<yellow>", "input"),
    "INPUT_ERR": (31, "<red>", "input"),
    # Seen even with -q
    "MESSAGE": (61, "<green>", "notice"),
}

FORMATS = {
    "plain": "<level>{level: <10}</level> | <green>{name}</green>:<green>{function}</green>:<green>{line}</green> - <level>{message}</level>",
    "cube": "<level>{level: <10}</level> +<green>{elapsed}</green> | <level>{message}</level>",
    "input": "<magenta>INPUT     </magenta> | <level>{extra[status]: <10}</level> | <magenta>{message}</magenta>",
    "notice": "<level>{message}</level>",
}

# INFO by default
verbosity = 20
quiet = 0


def set_logger_verbosity(count):
    '''Each -v lowers the threshold by one level: 1 shows DEBUG, 2 shows TRACE.'''
    global verbosity
    verbosity = 20 - (count * 10)


def quiesce_logger(count):
    '''Each -q raises the threshold by one level. MESSAGE stays visible up to -qqqq.'''
    global quiet
    quiet = count * 10


def level_group(record) -> str:
    entry = LEVELS.get(record["level"].name)
    return entry[2] if entry else "plain"


def routed_to(group: str):
    def accept(record) -> bool:
        return level_group(record) == group and record["level"].no >= verbosity + quiet
    return accept


for name, (no, color, _) in LEVELS.items():
    logger.level(name, no=no, color=color)
    setattr(logger.__class__, name.lower(), partialmethod(logger.__class__.log, name))

logger.configure(handlers=[
    {"sink": sys.stderr, "format": fmt, "colorize": True, "filter": routed_to(group)}
    for group, fmt in FORMATS.items()
])
