'''
The knot Floer cube of a pointed link diagram at the level of E_1, over Z/2.

Every vertex carries the module Lambda_{p,L_v} (x) Gamma_{L_v} with basis
lambda (x) gamma, lambda a monomial in the non-section basepoints and gamma a
monomial in the circles. x_max = 1 (x) 1 sits at (M, A) = (l_v/2, 0); y_p
shifts (M, A) by (-1, -1) and gamma_i by (-1, 0).

Each cube edge carries f0 (the Z/2 reduction of the Khovanov saddle formula)
and f1, which is characterised by commuting with every gamma action,
[f1, y_p] = f0 for the two basepoints preceding the saddle arcs and 0 for the
others, and its value on the top generator.
'''
from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple

from diagram import (BasepointSet, Coloring, LinkDiagram, Resolution, Saddle, checkerboard, classify_edge,
                     cube_edges, cube_vertices, resolve)
from errors import DegenerateVertex, MismatchAt, VerificationFailure
from exactla import F2, SparseMatrix, assert_square_zero, graded_homology, solve_unique
from logger import logger
from pointed import build_pointed
from spectral import cube_e0_iso
from structures import GradedRankRegister
from utils import bits, popcount, vertex_string

FULL = "full"
F0_ONLY = "f0"


#==================================================================#
#  Z/2 exterior algebra on bitmasks
#==================================================================#
def _times(x: FrozenSet[int], y: FrozenSet[int]) -> FrozenSet[int]:
    out = set()
    for a in x:
        for b in y:
            if not a & b:
                out ^= {a | b}
    return frozenset(out)


def _monomials(points) -> FrozenSet[int]:
    return frozenset(1 << p for p in points)


#==================================================================#
#  Vertex modules
#==================================================================#
@dataclass
class HfkVertexModule:
    resolution: Resolution
    circle_points: List[List[int]]
    sections: List[int]
    basis: List[Tuple[int, int]]
    n_plus: int = 0

    def __post_init__(self):
        self._index = {b: i for i, b in enumerate(self.basis)}

    @property
    def vertex(self) -> Tuple[int, ...]:
        return self.resolution.vertex

    @property
    def k(self) -> int:
        return len(self.circle_points)

    @property
    def m(self) -> int:
        return len(self.resolution.basepoint_circle)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, lam: int, gam: int) -> int:
        return self._index[(lam, gam)]

    def maslov(self, i: int) -> Fraction:
        lam, gam = self.basis[i]
        return Fraction(self.k, 2) - popcount(lam) - popcount(gam)

    def alexander(self, i: int) -> int:
        return -popcount(self.basis[i][0])

    def delta(self, i: int) -> Fraction:
        return self.alexander(i) - self.maslov(i)

    def big_delta(self, i: int) -> Fraction:
        return self.delta(i) + Fraction(sum(self.vertex) - self.n_plus, 2)

    def g_grading(self, i: int) -> Fraction:
        return self.alexander(i) + Fraction(sum(self.vertex) - self.k, 2)

    def reduce(self, lam: FrozenSet[int]) -> FrozenSet[int]:
        '''Rewrites section points as the sum of the other points on their circle.'''
        out = set()
        for mask in lam:
            term = frozenset({0})
            for q in bits(mask):
                circle = self.resolution.basepoint_circle[q]
                if q == self.sections[circle]:
                    factor = _monomials(r for r in self.circle_points[circle] if r != q)
                else:
                    factor = frozenset({1 << q})
                term = _times(term, factor)
            out ^= set(term)
        return frozenset(out)

    def column(self, lam: FrozenSet[int], gam: FrozenSet[int]) -> Dict[int, int]:
        out = set()
        for a in self.reduce(lam):
            for g in gam:
                out ^= {self.index(a, g)}
        return {i: 1 for i in out}

    def y_matrix(self, p: int) -> SparseMatrix:
        return SparseMatrix.from_columns(self.dim, [self.column(_times(frozenset({1 << p}), frozenset({lam})), frozenset({gam}))
                                                    for lam, gam in self.basis], F2)

    def gamma_matrix(self, circle: int) -> SparseMatrix:
        return SparseMatrix.from_columns(self.dim, [self.column(frozenset({lam}), _times(frozenset({1 << circle}), frozenset({gam})))
                                                    for lam, gam in self.basis], F2)


def vertex_module(r: Resolution, n_plus: int = 0) -> HfkVertexModule:
    r.require_nondegenerate()
    circle_points = [sorted(c.points) for c in r.circles]
    sections = [pts[0] for pts in circle_points]
    m = len(r.basepoint_circle)
    free = [p for p in range(m) if p not in sections]
    lams = sorted(sum(1 << free[i] for i in bits(s)) for s in range(2 ** len(free)))
    basis = [(lam, gam) for gam in range(2 ** r.l) for lam in lams]
    M = HfkVertexModule(r, circle_points, sections, basis, n_plus)
    if M.dim != 2 ** m:
        raise VerificationFailure(f"vertex module at {vertex_string(r.vertex)} has rank {M.dim}, expected {2 ** m}")
    return M


#==================================================================#
#  The cube
#==================================================================#
@dataclass
class HfkCube:
    diagram: LinkDiagram
    coloring: Coloring
    points: BasepointSet
    modules: Dict[Tuple[int, ...], HfkVertexModule]

    @property
    def vertices(self) -> List[Tuple[int, ...]]:
        return cube_vertices(self.diagram.n)

    def saddle(self, u, v) -> Saddle:
        return classify_edge(self.diagram, u, v, self.modules[u].resolution, self.modules[v].resolution, self.coloring)


def build_cube(d: LinkDiagram, points: BasepointSet, coloring: Optional[Coloring] = None) -> HfkCube:
    coloring = coloring or checkerboard(d)
    modules = {}
    for v in cube_vertices(d.n):
        r = resolve(d, v, coloring, points)
        if not r.is_nondegenerate():
            raise DegenerateVertex(vertex_string(v))
        modules[v] = vertex_module(r, d.n_plus)
    return HfkCube(d, coloring, points, modules)


def distinguished_points(cube: HfkCube, saddle: Saddle, u, v) -> Tuple[int, ...]:
    '''
    On the circle that passes the saddle twice, the basepoint met last before
    each passage.
    '''
    r = cube.modules[u].resolution if saddle.is_split else cube.modules[v].resolution
    circle = r.circles[saddle.source_circles[0] if saddle.is_split else saddle.target_circles[0]]
    steps = circle.steps
    out = []
    for j, step in enumerate(steps):
        if step.crossing != saddle.crossing:
            continue
        for back in range(len(steps)):
            s = steps[(j - back) % len(steps)]
            on_edge = cube.points.on_edge(s.edge)
            if on_edge:
                out.append(on_edge[-1] if s.forward else on_edge[0])
                break
    if len(out) != 2 or out[0] == out[1]:
        raise VerificationFailure(f"saddle at crossing {saddle.crossing + 1} does not separate two basepoints")
    return tuple(out)


def _source_to_target(source: HfkVertexModule, target: HfkVertexModule, gam: int) -> FrozenSet[int]:
    out = frozenset({0})
    for i in bits(gam):
        out = _times(out, frozenset({1 << target.resolution.basepoint_circle[source.sections[i]]}))
    return out


def f0_edge_map(cube: HfkCube, u, v, saddle: Optional[Saddle] = None) -> SparseMatrix:
    saddle = saddle or cube.saddle(u, v)
    source, target = cube.modules[u], cube.modules[v]
    columns = []
    if saddle.is_split:
        b, c = saddle.target_circles
        difference = frozenset({1 << b, 1 << c})
        for lam, gam in source.basis:
            columns.append(target.column(frozenset({lam}), _times(_source_to_target(source, target, gam), difference)))
    else:
        alpha = _monomials(source.circle_points[saddle.source_circles[0]])
        for lam, gam in source.basis:
            columns.append(target.column(_times(frozenset({lam}), alpha), _source_to_target(source, target, gam)))
    return SparseMatrix.from_columns(target.dim, columns, F2)


def _commutator_equations(A: SparseMatrix, B: SparseMatrix, C: Optional[SparseMatrix], du: int, dv: int):
    '''Rows of A X + X B = C with X[r, c] as unknown r * du + c.'''
    a_rows = [[] for _ in range(dv)]
    for (r, k), _ in A.entries():
        a_rows[r].append(k)
    b_cols = [[] for _ in range(du)]
    for (k, c), _ in B.entries():
        b_cols[c].append(k)
    for r in range(dv):
        for c in range(du):
            eq = set()
            for k in a_rows[r]:
                eq ^= {k * du + c}
            for k in b_cols[c]:
                eq ^= {r * du + k}
            rhs = C[(r, c)] if C is not None else 0
            if eq or rhs:
                yield {j: 1 for j in eq}, rhs


def f1_edge_map(cube: HfkCube, u, v, f0: Optional[SparseMatrix] = None, saddle: Optional[Saddle] = None) -> SparseMatrix:
    saddle = saddle or cube.saddle(u, v)
    f0 = f0 if f0 is not None else f0_edge_map(cube, u, v, saddle)
    source, target = cube.modules[u], cube.modules[v]
    du, dv = source.dim, target.dim
    marked = set(distinguished_points(cube, saddle, u, v))
    equations, rhs = [], []

    def add(rows):
        for eq, b in rows:
            equations.append(eq)
            rhs.append(b)

    pairs = sorted({(source.resolution.basepoint_circle[p], target.resolution.basepoint_circle[p]) for p in range(source.m)})
    for i, j in pairs:
        add(_commutator_equations(target.gamma_matrix(j), source.gamma_matrix(i), None, du, dv))
    for p in range(source.m):
        add(_commutator_equations(target.y_matrix(p), source.y_matrix(p), f0 if p in marked else None, du, dv))
    top_u, top_v = source.index(0, 0), target.index(0, 0)
    for r in range(dv):
        equations.append({r * du + top_u: 1})
        rhs.append(0 if saddle.is_split else int(r == top_v))
    solution = solve_unique(equations, rhs, du * dv, F2)
    entries = {(j // du, j % du): 1 for j, x in enumerate(solution) if x}
    logger.debug(f"f1 at crossing {saddle.crossing + 1}: {len(equations)} equations, unique solution with {len(entries)} entries")
    return SparseMatrix(dv, du, entries, F2)


#==================================================================#
#  Grading ledgers
#==================================================================#
@dataclass
class EdgeLedger:
    source: str
    target: str
    kind: str
    distinguished: Tuple[int, ...]
    alexander_f0: Tuple[int, ...]
    alexander_f1: Tuple[int, ...]
    g_f0: Tuple[Fraction, ...]
    g_f1: Tuple[Fraction, ...]

    @property
    def ok(self) -> bool:
        expected = -1 if self.kind == "merge" else 0
        return (set(self.alexander_f0) <= {expected} and set(self.alexander_f1) <= {expected + 1}
                and set(self.g_f0) <= {0} and set(self.g_f1) <= {1})


def _shifts(F: SparseMatrix, source: HfkVertexModule, target: HfkVertexModule, grading: str) -> Tuple:
    return tuple(sorted({getattr(target, grading)(r) - getattr(source, grading)(c) for (r, c), _ in F.entries()}))


def edge_ledger(cube: HfkCube, u, v, f0: SparseMatrix, f1: Optional[SparseMatrix], saddle: Saddle) -> EdgeLedger:
    source, target = cube.modules[u], cube.modules[v]
    f1 = f1 if f1 is not None else SparseMatrix.zeros(target.dim, source.dim, F2)
    ledger = EdgeLedger(vertex_string(u), vertex_string(v), saddle.kind, distinguished_points(cube, saddle, u, v),
                        _shifts(f0, source, target, "alexander"), _shifts(f1, source, target, "alexander"),
                        _shifts(f0, source, target, "g_grading"), _shifts(f1, source, target, "g_grading"))
    if not ledger.ok:
        raise VerificationFailure(f"grading ledger fails on {ledger.source} -> {ledger.target}: {ledger}")
    return ledger


#==================================================================#
#  E_1 and E_2
#==================================================================#
@dataclass
class HfkE1:
    cube: HfkCube
    variant: str
    basis: List[Tuple[Tuple[int, ...], int]]
    offsets: Dict[Tuple[int, ...], int]
    differential: SparseMatrix
    edge_maps: Dict[Tuple[str, str], Tuple[SparseMatrix, Optional[SparseMatrix]]] = field(default_factory=dict)
    ledgers: List[EdgeLedger] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def levels(self) -> List[int]:
        return [sum(v) for v, _ in self.basis]

    def gradings(self, name: str) -> List:
        return [getattr(self.cube.modules[v], name)(i) for v, i in self.basis]

    def e2_by_delta(self, threads: int = 1) -> GradedRankRegister:
        '''E_2 ranks keyed by (level, Delta); d_1 raises both by one.'''
        keyed = [(level, delta - level) for level, delta in zip(self.levels(), self.gradings("big_delta"))]
        summary = graded_homology(self.differential, keyed, F2, threads)
        out = GradedRankRegister()
        for (level, shift), rank in summary.ranks().items():
            out.add((level, shift + level), rank)
        return out

    def e2_by_g(self, threads: int = 1) -> GradedRankRegister:
        '''E_2 ranks keyed by (level, Delta, G); only a grading for the f0 variant.'''
        if self.variant != F0_ONLY:
            raise VerificationFailure("the G grading is only a filtration on the full E_1 complex")
        keyed = [(level, (delta - level, g)) for level, delta, g in
                 zip(self.levels(), self.gradings("big_delta"), self.gradings("g_grading"))]
        summary = graded_homology(self.differential, keyed, F2, threads)
        out = GradedRankRegister()
        for (level, (shift, g)), rank in summary.ranks().items():
            out.add((level, shift + level, g), rank)
        return out


def build_e1(cube: HfkCube, variant: str = F0_ONLY, threads: int = 1) -> HfkE1:
    offsets, basis = {}, []
    for v in cube.vertices:
        offsets[v] = len(basis)
        basis += [(v, i) for i in range(cube.modules[v].dim)]

    def one_edge(edge):
        u, v = edge
        saddle = cube.saddle(u, v)
        f0 = f0_edge_map(cube, u, v, saddle)
        f1 = f1_edge_map(cube, u, v, f0, saddle) if variant == FULL else None
        return u, v, f0, f1, edge_ledger(cube, u, v, f0, f1, saddle)

    edges = cube_edges(cube.diagram.n)
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_edge, edges))
    else:
        results = [one_edge(e) for e in edges]

    entries: Dict[Tuple[int, int], int] = {}
    maps, ledgers = {}, []
    for u, v, f0, f1, ledger in results:
        total = f0 if f1 is None else f0 + f1
        for (r, c), x in total.entries():
            key = (offsets[v] + r, offsets[u] + c)
            entries[key] = (entries.get(key, 0) + x) % 2
        maps[(vertex_string(u), vertex_string(v))] = (f0, f1)
        ledgers.append(ledger)
    differential = SparseMatrix(len(basis), len(basis), entries, F2)
    assert_square_zero(differential, f"d_1 of the {variant} E_1 complex")
    logger.complex(f"HFK E_1 ({variant}): {len(cube.vertices)} vertices, rank {len(basis)}, {differential.nnz} nonzero entries")
    return HfkE1(cube, variant, basis, offsets, differential, maps, ledgers)


def build_e1_full(d: LinkDiagram, points: BasepointSet, coloring: Optional[Coloring] = None, threads: int = 1) -> HfkE1:
    return build_e1(build_cube(d, points, coloring), FULL, threads)


def build_e1_f0(d: LinkDiagram, points: BasepointSet, coloring: Optional[Coloring] = None, threads: int = 1) -> HfkE1:
    return build_e1(build_cube(d, points, coloring), F0_ONLY, threads)


def width(ranks: GradedRankRegister) -> int:
    '''Number of distinct Delta gradings carrying homology.'''
    return len({key[1] for key in ranks})


def filtration_inequality(f0_variant: HfkE1, full_variant: HfkE1, threads: int = 1) -> bool:
    '''The G filtration on the full complex has the f0 complex as associated graded.'''
    small, big = full_variant.e2_by_delta(threads), f0_variant.e2_by_delta(threads)
    ok = all(small[k] <= big[k] for k in set(small) | set(big))
    logger.verify(f"rank H(E_1, f0) >= rank H(E_1, f0 + f1) in every grading: {ok}")
    return ok


#==================================================================#
#  Comparison with the Khovanov cube filtration
#==================================================================#
@dataclass
class E1Comparison:
    isomorphic: bool
    witness: Dict[Tuple[str, int], Tuple[str, int]]
    khovanov_e2: GradedRankRegister
    hfk_e2: GradedRankRegister

    @property
    def e2_agrees(self) -> bool:
        return self.khovanov_e2 == self.hfk_e2


def compare_e1(d: LinkDiagram, points: BasepointSet, coloring: Optional[Coloring] = None, threads: int = 1) -> E1Comparison:
    '''
    Matches the Khovanov E_1 page of the cube filtration with the f0 variant of
    the Floer E_1 page, generator by generator and edge by edge over Z/2.
    '''
    P = build_pointed(d, points, coloring)
    kh = cube_e0_iso(P)
    hfk = build_e1_f0(d, points, P.coloring, threads)

    witness = {}
    position = {}
    deltas = kh.deltas()
    hfk_deltas = hfk.gradings("big_delta")
    for i, (v, j) in enumerate(kh.basis):
        lam, gam = kh.modules[v].basis[j]
        target = hfk.offsets[v] + hfk.cube.modules[v].index(lam, gam)
        if deltas[i] != hfk_deltas[target]:
            raise MismatchAt(f"generator {j} at {vertex_string(v)}: Khovanov delta {deltas[i]}, Floer Delta {hfk_deltas[target]}")
        witness[(vertex_string(v), j)] = (vertex_string(v), target - hfk.offsets[v])
        position[i] = target

    reduced = kh.differential.with_ring(F2)
    permuted = SparseMatrix(hfk.dim, hfk.dim, {(position[r], position[c]): x for (r, c), x in reduced.entries()}, F2)
    if permuted != hfk.differential:
        for u, v in cube_edges(d.n):
            rows = range(hfk.offsets[v], hfk.offsets[v] + hfk.cube.modules[v].dim)
            cols = range(hfk.offsets[u], hfk.offsets[u] + hfk.cube.modules[u].dim)
            if permuted.submatrix(rows, cols) != hfk.differential.submatrix(rows, cols):
                raise MismatchAt(f"{vertex_string(u)} -> {vertex_string(v)}")
        raise MismatchAt("d_1 differs outside the cube edges")

    kh_e2 = kh.e2_by_level(F2, threads).regrade(lambda k: (k[0], k[1] - Fraction(k[2], 2)))
    hfk_e2 = hfk.e2_by_delta(threads)
    result = E1Comparison(True, witness, kh_e2, hfk_e2)
    logger.verify(f"E_1 pages isomorphic over f2; E_2 ranks {'agree' if result.e2_agrees else 'DISAGREE'} "
                  f"(total {kh_e2.total()} vs {hfk_e2.total()})")
    if not result.e2_agrees:
        raise MismatchAt("E_2 rank tables")
    return result
