'''
Exact sparse linear algebra over the integers, the rationals and prime fields.

Matrices follow the column convention used throughout the repository: entry
(row, col) is the coefficient of basis element `row` of the target in the image
of basis element `col` of the source. Heavy lifting (products, row reduction,
nullspaces, invariant factors) is delegated to sympy's DomainMatrix; the
integer Smith form first strips unit pivots in Markowitz order so that
invariant_factors only ever sees the small residual block.
'''
from __future__ import annotations

import concurrent.futures
from collections import OrderedDict, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from sympy.polys.domains import GF, QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors

from errors import NoSolution, NonUniqueSolution, NotAComplex, UsageError, VerificationFailure
from logger import logger


#==================================================================#
#  Coefficient rings
#==================================================================#
@dataclass(frozen=True)
class Ring:
    kind: str  # "integers", "rationals" or "prime"
    p: int = 0

    @classmethod
    def parse(cls, text: str) -> "Ring":
        text = text.strip().lower()
        if text in ("z", "zz", "integers"):
            return INTEGERS
        if text in ("q", "qq", "rationals"):
            return RATIONALS
        if text in ("f2", "z2", "gf2"):
            return cls.prime(2)
        if text.startswith("fp:"):
            try:
                p = int(text[3:])
            except ValueError:
                raise UsageError(f"bad prime in ring flag {text!r}")
            return cls.prime(p)
        raise UsageError(f"unknown ring {text!r} (expected z, q, f2 or fp:<prime>)")

    @classmethod
    def prime(cls, p: int) -> "Ring":
        if p < 2 or any(p % k == 0 for k in range(2, int(p ** 0.5) + 1)):
            raise UsageError(f"{p} is not a prime")
        return cls("prime", p)

    @property
    def is_field(self) -> bool:
        return self.kind != "integers"

    @property
    def characteristic(self) -> int:
        return self.p if self.kind == "prime" else 0

    @property
    def domain(self):
        if self.kind == "integers":
            return ZZ
        if self.kind == "rationals":
            return QQ
        return GF(self.p)

    @property
    def field_domain(self):
        return QQ if self.kind == "integers" else self.domain

    def reduce(self, value: int) -> int:
        return value % self.p if self.kind == "prime" else value

    def __str__(self):
        if self.kind == "integers":
            return "z"
        if self.kind == "rationals":
            return "q"
        return "f2" if self.p == 2 else f"fp:{self.p}"


INTEGERS = Ring("integers")
RATIONALS = Ring("rationals")
F2 = Ring("prime", 2)


def to_python(domain, value):
    '''Converts a domain element to int (or Fraction over QQ).'''
    if domain == QQ:
        value = domain.to_sympy(value)
        if value.q == 1:
            return int(value.p)
        return Fraction(int(value.p), int(value.q))
    if domain == ZZ:
        return int(value)
    return int(domain.to_sympy(value)) % domain.characteristic()


#==================================================================#
#  Sparse matrices
#==================================================================#
class SparseMatrix:
    '''
    Immutable sparse matrix with Python integer entries over a Ring.
    Over a prime field the entries are kept reduced.
    '''

    def __init__(self, rows: int, cols: int, entries: Optional[Dict[Tuple[int, int], int]] = None, ring: Ring = INTEGERS):
        self.rows = rows
        self.cols = cols
        self.ring = ring
        self._entries: Dict[Tuple[int, int], int] = {}
        for (r, c), v in (entries or {}).items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise IndexError(f"entry ({r}, {c}) outside a {rows}x{cols} matrix")
            v = ring.reduce(v)
            if v:
                self._entries[(r, c)] = v

    @classmethod
    def zeros(cls, rows: int, cols: int, ring: Ring = INTEGERS) -> "SparseMatrix":
        return cls(rows, cols, {}, ring)

    @classmethod
    def identity(cls, n: int, ring: Ring = INTEGERS) -> "SparseMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)}, ring)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Dict[int, int]], ring: Ring = INTEGERS) -> "SparseMatrix":
        entries = {}
        for c, column in enumerate(columns):
            for r, v in column.items():
                if v:
                    entries[(r, c)] = v
        return cls(rows, len(columns), entries, ring)

    @classmethod
    def from_domain_matrix(cls, dm: DomainMatrix, ring: Ring) -> "SparseMatrix":
        rows, cols = dm.shape
        entries = {}
        for (r, c), v in dm.to_dok().items():
            value = to_python(dm.domain, v)
            if isinstance(value, Fraction):
                raise VerificationFailure(f"non-integral entry {value} at ({r}, {c})")
            entries[(r, c)] = value
        return cls(rows, cols, entries, ring)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self._entries)

    def __getitem__(self, key: Tuple[int, int]) -> int:
        return self._entries.get(key, 0)

    def entries(self) -> List[Tuple[Tuple[int, int], int]]:
        return sorted(self._entries.items())

    def columns(self) -> List[Dict[int, int]]:
        cols: List[Dict[int, int]] = [dict() for _ in range(self.cols)]
        for (r, c), v in self._entries.items():
            cols[c][r] = v
        return cols

    def column(self, c: int) -> Dict[int, int]:
        return {r: v for (r, cc), v in self._entries.items() if cc == c}

    def is_zero(self) -> bool:
        return not self._entries

    def to_domain_matrix(self, domain=None) -> DomainMatrix:
        domain = domain or self.ring.domain
        dod: Dict[int, Dict[int, object]] = defaultdict(dict)
        for (r, c), v in self._entries.items():
            dod[r][c] = domain.convert(v)
        return DomainMatrix(dict(dod), self.shape, domain)

    def with_ring(self, ring: Ring) -> "SparseMatrix":
        return SparseMatrix(self.rows, self.cols, self._entries, ring)

    def _check_same_shape(self, other: "SparseMatrix"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_same_shape(other)
        out = dict(self._entries)
        for k, v in other._entries.items():
            out[k] = out.get(k, 0) + v
        return SparseMatrix(self.rows, self.cols, out, self.ring)

    def __neg__(self) -> "SparseMatrix":
        return self.scale(-1)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + (-other)

    def scale(self, k: int) -> "SparseMatrix":
        return SparseMatrix(self.rows, self.cols, {key: k * v for key, v in self._entries.items()}, self.ring)

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        if self.is_zero() or other.is_zero():
            return SparseMatrix.zeros(self.rows, other.cols, self.ring)
        product = self.to_domain_matrix().matmul(other.to_domain_matrix())
        return SparseMatrix.from_domain_matrix(product, self.ring)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self):
        return hash((self.shape, tuple(self.entries())))

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz}, ring={self.ring})"

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, {(c, r): v for (r, c), v in self._entries.items()}, self.ring)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SparseMatrix":
        rmap = {r: i for i, r in enumerate(rows)}
        cmap = {c: j for j, c in enumerate(cols)}
        entries = {}
        for (r, c), v in self._entries.items():
            if r in rmap and c in cmap:
                entries[(rmap[r], cmap[c])] = v
        return SparseMatrix(len(rows), len(cols), entries, self.ring)

    def apply(self, vector: Dict[int, int]) -> Dict[int, int]:
        out: Dict[int, int] = defaultdict(int)
        by_col: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
        for (r, c), v in self._entries.items():
            by_col[c].append((r, v))
        for c, coeff in vector.items():
            for r, v in by_col.get(c, ()):
                out[r] += coeff * v
        return {r: self.ring.reduce(v) for r, v in out.items() if self.ring.reduce(v)}

    def rank(self) -> int:
        if self.is_zero():
            return 0
        return self.to_domain_matrix(self.ring.field_domain).rank()

    def to_dense(self) -> List[List[int]]:
        dense = [[0] * self.cols for _ in range(self.rows)]
        for (r, c), v in self._entries.items():
            dense[r][c] = v
        return dense

    def export_matrix_market(self) -> str:
        '''Coordinate-format dump for debugging in external tools.'''
        lines = ["%%MatrixMarket matrix coordinate integer general",
                 f"{self.rows} {self.cols} {self.nnz}"]
        lines += [f"{r + 1} {c + 1} {v}" for (r, c), v in self.entries()]
        return "\n".join(lines) + "\n"


def block_diagonal(blocks: Sequence[SparseMatrix], ring: Ring = INTEGERS) -> SparseMatrix:
    entries = {}
    r0 = c0 = 0
    for block in blocks:
        for (r, c), v in block.entries():
            entries[(r0 + r, c0 + c)] = v
        r0 += block.rows
        c0 += block.cols
    return SparseMatrix(r0, c0, entries, ring)


#==================================================================#
#  Smith normal form
#==================================================================#
@dataclass
class SmithResult:
    diagonal: Tuple[int, ...]
    rank: int
    torsion: Tuple[int, ...]


def _eliminate_unit_pivots(matrix: SparseMatrix) -> Tuple[int, Dict[int, Dict[int, int]], List[int], List[int]]:
    '''
    Removes ±1 pivots with unimodular row operations, always picking the pivot
    with the smallest Markowitz count (r-1)(c-1). Returns the number of pivots
    removed and the residual rows.
    '''
    rows: Dict[int, Dict[int, int]] = defaultdict(dict)
    cols: Dict[int, set] = defaultdict(set)
    for (r, c), v in matrix.entries():
        rows[r][c] = v
        cols[c].add(r)
    pivots = 0
    while True:
        best = None
        for r, row in rows.items():
            for c, v in row.items():
                if v in (1, -1):
                    cost = (len(row) - 1) * (len(cols[c]) - 1)
                    if best is None or cost < best[0]:
                        best = (cost, r, c)
                        if cost == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, pr, pc = best
        prow = rows.pop(pr)
        pv = prow[pc]
        for c in prow:
            cols[c].discard(pr)
        for r in sorted(cols[pc]):
            row = rows[r]
            factor = row[pc] * pv  # pv is a unit, so pv^-1 == pv
            for c, v in prow.items():
                new = row.get(c, 0) - factor * v
                if new:
                    if c not in row:
                        cols[c].add(r)
                    row[c] = new
                elif c in row:
                    del row[c]
                    cols[c].discard(r)
            if not row:
                del rows[r]
        del cols[pc]
        pivots += 1
    live_rows = sorted(r for r, row in rows.items() if row)
    live_cols = sorted({c for r in live_rows for c in rows[r]})
    return pivots, rows, live_rows, live_cols


def smith_normal_form(matrix: SparseMatrix) -> SmithResult:
    if matrix.ring.kind != "integers":
        raise ValueError("Smith normal form needs an integer matrix")
    pivots, rows, live_rows, live_cols = _eliminate_unit_pivots(matrix)
    invariants = [1] * pivots
    if live_rows:
        rmap = {r: i for i, r in enumerate(live_rows)}
        cmap = {c: j for j, c in enumerate(live_cols)}
        dod = {rmap[r]: {cmap[c]: ZZ(v) for c, v in rows[r].items()} for r in live_rows}
        residual = DomainMatrix(dod, (len(live_rows), len(live_cols)), ZZ)
        factors = [abs(int(f)) for f in invariant_factors(residual.to_dense())]
        invariants += sorted(f for f in factors if f)
    rank = len(invariants)
    if rank != matrix.rank():
        raise VerificationFailure(f"Smith rank {rank} disagrees with rational rank {matrix.rank()}")
    torsion = tuple(f for f in invariants if f > 1)
    return SmithResult(tuple(invariants), rank, torsion)


#==================================================================#
#  Homology
#==================================================================#
@dataclass(frozen=True)
class HomologyGroup:
    rank: int
    torsion: Tuple[int, ...] = ()

    @property
    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion


@dataclass
class HomologySummary:
    ring: Ring
    groups: "OrderedDict[Hashable, HomologyGroup]" = field(default_factory=OrderedDict)

    def nonzero(self) -> "OrderedDict[Hashable, HomologyGroup]":
        return OrderedDict((k, g) for k, g in self.groups.items() if not g.is_zero)

    def ranks(self) -> Dict[Hashable, int]:
        return {k: g.rank for k, g in self.groups.items() if g.rank}

    def total_rank(self) -> int:
        return sum(g.rank for g in self.groups.values())

    def torsion(self) -> Dict[Hashable, Tuple[int, ...]]:
        return {k: g.torsion for k, g in self.groups.items() if g.torsion}


def homology(d_in: SparseMatrix, d_out: SparseMatrix) -> HomologyGroup:
    '''Homology at the middle term of C_{h-1} -> C_h -> C_{h+1}.'''
    if d_in.rows != d_out.cols:
        raise ValueError(f"composable maps needed, got {d_in.shape} then {d_out.shape}")
    dim = d_in.rows
    if not (d_out @ d_in).is_zero():
        raise NotAComplex(f"on a block of dimension {dim}")
    rank_out = d_out.rank()
    if d_in.ring.kind == "integers":
        snf = smith_normal_form(d_in)
        return HomologyGroup(dim - rank_out - snf.rank, snf.torsion)
    return HomologyGroup(dim - rank_out - d_in.rank())


def graded_blocks(gradings: Sequence[Tuple[int, int]]) -> "OrderedDict[Tuple[int, int], List[int]]":
    blocks: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for i, g in enumerate(gradings):
        blocks[g].append(i)
    return OrderedDict(sorted(blocks.items()))


def graded_homology(d: SparseMatrix, gradings: Sequence[Tuple[int, int]], ring: Optional[Ring] = None, threads: int = 1) -> HomologySummary:
    '''
    Homology of a complex whose differential raises the first grading by one
    and preserves the second, computed independently on each bigrading.
    '''
    ring = ring or d.ring
    d = d.with_ring(ring)
    blocks = graded_blocks(gradings)

    def one(key):
        h, q = key
        here = blocks[key]
        below = blocks.get((h - 1, q), [])
        above = blocks.get((h + 1, q), [])
        return key, homology(d.submatrix(here, below), d.submatrix(above, here))

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, blocks))
    else:
        results = [one(key) for key in blocks]
    summary = HomologySummary(ring)
    for key, group in results:
        summary.groups[key] = group
    logger.debug(f"homology over {ring}: {len(blocks)} blocks, total rank {summary.total_rank()}")
    return summary


def assert_square_zero(d: SparseMatrix, what: str = "differential"):
    if not (d @ d).is_zero():
        raise NotAComplex(f"{what} does not square to zero")


#==================================================================#
#  Subspace helpers over fields
#==================================================================#
def rows_matrix(vectors: Sequence[Dict[int, object]], dim: int, domain) -> DomainMatrix:
    dod = {i: {j: domain.convert(v) for j, v in vec.items() if v} for i, vec in enumerate(vectors)}
    dod = {i: row for i, row in dod.items() if row}
    return DomainMatrix(dod, (len(vectors), dim), domain)


def kernel_rows(matrix: SparseMatrix, domain) -> List[Dict[int, object]]:
    '''Basis of the kernel of `matrix` (as a map on column vectors).'''
    if matrix.cols == 0:
        return []
    if matrix.rows == 0 or matrix.is_zero():
        one = domain.one
        return [{j: one} for j in range(matrix.cols)]
    null = matrix.to_domain_matrix(domain).nullspace()
    return [dict((j, v) for (i, j), v in null.to_dok().items() if i == k) for k in range(null.shape[0])]


def span_rank(vectors: Sequence[Dict[int, object]], dim: int, domain) -> int:
    vectors = [v for v in vectors if v]
    if not vectors or dim == 0:
        return 0
    return rows_matrix(vectors, dim, domain).rank()


def apply_rows(matrix: SparseMatrix, vectors: Sequence[Dict[int, object]], domain) -> List[Dict[int, object]]:
    '''Images of vectors (given over `domain`) under `matrix`.'''
    if not vectors:
        return []
    by_col: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    for (r, c), v in matrix.entries():
        by_col[c].append((r, domain.convert(v)))
    out = []
    for vec in vectors:
        image: Dict[int, object] = {}
        for c, coeff in vec.items():
            for r, v in by_col.get(c, ()):
                image[r] = image.get(r, domain.zero) + coeff * v
        out.append({r: v for r, v in image.items() if v})
    return out


def express_in_basis(basis: Sequence[Dict[int, int]], relations: Sequence[Dict[int, int]], targets: Sequence[Dict[int, int]], dim: int, ring: Ring) -> SparseMatrix:
    '''
    Writes every target as a combination of `basis` modulo the span of
    `relations`. Over the integers the computation runs over QQ and the
    coefficients must come out integral. Column k of the result holds the
    coordinates of targets[k].
    '''
    domain = ring.field_domain
    nb, nr, nt = len(basis), len(relations), len(targets)
    if nt == 0:
        return SparseMatrix.zeros(nb, 0, ring)
    columns = list(basis) + list(relations) + list(targets)
    augmented = rows_matrix(columns, dim, domain).transpose()
    rref, pivots = augmented.rref()
    pivot_row = {col: row for row, col in enumerate(pivots)}
    if any(col >= nb + nr for col in pivots):
        raise VerificationFailure("target is not a combination of the given basis and relations")
    if any(col not in pivot_row for col in range(nb)):
        raise VerificationFailure("basis is not independent modulo the relations")
    dok = rref.to_dok()
    entries = {}
    for k in range(nt):
        for j in range(nb):
            value = dok.get((pivot_row[j], nb + nr + k))
            if value is None:
                continue
            value = to_python(domain, value)
            if isinstance(value, Fraction):
                raise VerificationFailure(f"non-integral homology coordinate {value}")
            entries[(j, k)] = value
    return SparseMatrix(nb, nt, entries, ring)


def solve_unique(equations: Sequence[Dict[int, int]], rhs: Sequence[int], unknowns: int, ring: Ring) -> List[int]:
    '''
    Solves sum_j equations[i][j] * x_j = rhs[i] over a field and insists on a
    single solution.
    '''
    if not ring.is_field:
        raise UsageError("solve_unique needs field coefficients")
    domain = ring.domain
    rows = [{**eq, unknowns: b} if b else dict(eq) for eq, b in zip(equations, rhs)]
    if not rows:
        raise NonUniqueSolution(f"no equations for {unknowns} unknowns")
    rref, pivots = rows_matrix(rows, unknowns + 1, domain).rref()
    if unknowns in pivots:
        raise NoSolution(f"{len(rows)} equations in {unknowns} unknowns are inconsistent")
    if len(pivots) < unknowns:
        raise NonUniqueSolution(f"solution space of dimension {unknowns - len(pivots)}")
    dok = rref.to_dok()
    return [to_python(domain, dok[(row, unknowns)]) if (row, unknowns) in dok else 0 for row in range(unknowns)]
