from fractions import Fraction
from typing import Dict, Hashable, List, Sequence, Tuple, Union

Grade = Union[int, Fraction]

#==================================================================#
#  Bit helpers for subsets of basepoints and circle labelings
#==================================================================#
def popcount(mask: int) -> int:
    return bin(mask).count("1")

def bits(mask: int) -> List[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out

def below(mask: int, i: int) -> int:
    '''Number of elements of the subset `mask` smaller than i.'''
    return popcount(mask & ((1 << i) - 1))

def koszul_sign(mask: int, i: int) -> int:
    return -1 if below(mask, i) % 2 else 1

#==================================================================#
#  Vertex strings
#==================================================================#
def vertex_string(v: Sequence[int]) -> str:
    return "".join(str(x) for x in v) or "-"

#==================================================================#
#  Half integer formatting
#==================================================================#
def fmt_grade(x: Grade) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"

def grade_key(key: Hashable) -> str:
    if isinstance(key, tuple):
        return ",".join(fmt_grade(k) for k in key)
    return fmt_grade(key)

#==================================================================#
#  Poincare tables: rows h, columns q
#==================================================================#
def poincare_table(ranks: Dict[Tuple[int, int], int], torsion: Dict[Tuple[int, int], Tuple[int, ...]] = None) -> str:
    torsion = torsion or {}
    keys = set(ranks) | set(torsion)
    if not keys:
        return "(zero)\n"
    hs = sorted({h for h, _ in keys})
    qs = sorted({q for _, q in keys}, reverse=True)

    def cell(h, q):
        parts = []
        if ranks.get((h, q)):
            parts.append(str(ranks[(h, q)]))
        for t in torsion.get((h, q), ()):
            parts.append(f"Z{t}")
        return "+".join(parts) or "."

    header = ["q\\h"] + [fmt_grade(h) for h in hs]
    rows = [header] + [[fmt_grade(q)] + [cell(h, q) for h in hs] for q in qs]
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    return "".join(" ".join(c.rjust(w) for c, w in zip(r, widths)) + "\n" for r in rows)

def line_table(ranks: Dict[Hashable, int], title: str = "grading") -> str:
    if not ranks:
        return "(zero)\n"
    lines = [f"{title}: rank"]
    for k in sorted(ranks):
        lines.append(f"  {grade_key(k)}: {ranks[k]}")
    return "\n".join(lines) + "\n"

#==================================================================#
#  Cleans string for use in file name
#==================================================================#
def cleanfilename(filename):
    filteredcharacters = ('/','\\')
    filename = "".join(c for c in filename if c not in filteredcharacters).rstrip()
    return filename
