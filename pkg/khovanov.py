'''
The Khovanov cube complex of a diagram over the integers, its reduced
subcomplex, the basepoint actions and two cheap oracles: the Jones polynomial
through an independent Kauffman bracket state sum, and the determinant through
the signed Tait graph of the checkerboard coloring.
'''
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import sympy
from sympy.polys.domains import ZZ

from diagram import (BasepointSet, Basepoint, Coloring, LinkDiagram, Resolution, SMOOTHINGS,
                     checkerboard, cube_vertices, edge_parity, edge_sign, resolve)
from errors import NoSuchEdge, VerificationFailure
from exactla import INTEGERS, HomologySummary, Ring, SparseMatrix, assert_square_zero, graded_homology
from logger import logger
from structures import GradedRankRegister
from utils import bits, popcount, vertex_string

q = sympy.Symbol("q")
A = sympy.Symbol("A")


@dataclass(frozen=True)
class CubeGenerator:
    '''A labeling of the circles of L_v: bit i set means circle i carries x.'''
    vertex: Tuple[int, ...]
    labels: int

    def __str__(self):
        return f"{vertex_string(self.vertex)}|{self.labels:b}"


@dataclass
class KhComplex:
    diagram: LinkDiagram
    coloring: Coloring
    basis: List[CubeGenerator]
    gradings: List[Tuple[int, int]]
    differential: SparseMatrix
    resolutions: Dict[Tuple[int, ...], Resolution]
    offsets: Dict[Tuple[int, ...], int] = field(default_factory=dict)
    shift: Tuple[int, int] = (0, 0)
    reduced_at: Optional[int] = None

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def n(self) -> int:
        return self.diagram.n

    @property
    def n_minus(self) -> int:
        return self.diagram.n_minus

    def index(self, g: CubeGenerator) -> int:
        return self.offsets[g.vertex] + g.labels

    def chain_ranks(self) -> GradedRankRegister:
        out = GradedRankRegister()
        for g in self.gradings:
            out.add(g, 1)
        return out


#==================================================================#
#  Gradings and saddle maps
#==================================================================#
def generator_grading(d: LinkDiagram, r: Resolution, labels: int) -> Tuple[int, int]:
    height = sum(r.vertex)
    xs = popcount(labels)
    return (height - d.n_minus, (r.l - xs) - xs + height + d.n_plus - 2 * d.n_minus)


class SaddleMap:
    '''
    Frobenius multiplication or comultiplication between the labelings of two
    resolutions that differ at one crossing, in either direction.
    '''

    def __init__(self, d: LinkDiagram, source: Resolution, target: Resolution, crossing: int):
        labels = d.crossings[crossing].edges
        self.source_circles = tuple(sorted({source.circle_of_edge[e] for e in labels}))
        self.target_circles = tuple(sorted({target.circle_of_edge[e] for e in labels}))
        self.crossing = crossing
        if len(self.source_circles) == 2 and len(self.target_circles) == 1:
            self.kind = "merge"
        elif len(self.source_circles) == 1 and len(self.target_circles) == 2:
            self.kind = "split"
        else:
            raise VerificationFailure(f"saddle at crossing {crossing + 1} neither merges nor splits")
        self.passive = {}
        for c in source.circles:
            if c.index not in self.source_circles:
                self.passive[c.index] = target.circle_of_edge[c.edges[0]]

    def _passive_mask(self, labels: int) -> int:
        out = 0
        for i in bits(labels):
            if i in self.passive:
                out |= 1 << self.passive[i]
        return out

    def __call__(self, labels: int) -> List[Tuple[int, int]]:
        base = self._passive_mask(labels)
        if self.kind == "merge":
            a, b = (labels >> self.source_circles[0]) & 1, (labels >> self.source_circles[1]) & 1
            if a and b:
                return []
            t = self.target_circles[0]
            return [(base | ((a | b) << t), 1)]
        s = self.source_circles[0]
        t1, t2 = self.target_circles
        if (labels >> s) & 1:
            return [(base | (1 << t1) | (1 << t2), 1)]
        return [(base | (1 << t2), 1), (base | (1 << t1), 1)]


#==================================================================#
#  The cube complex
#==================================================================#
def build_ckh(d: LinkDiagram, coloring: Optional[Coloring] = None, points: Optional[BasepointSet] = None) -> KhComplex:
    coloring = coloring or checkerboard(d)
    points = points or BasepointSet()
    resolutions = {}
    basis: List[CubeGenerator] = []
    gradings: List[Tuple[int, int]] = []
    offsets = {}
    for v in cube_vertices(d.n):
        r = resolve(d, v, coloring, points)
        resolutions[v] = r
        offsets[v] = len(basis)
        for labels in range(2 ** r.l):
            basis.append(CubeGenerator(v, labels))
            gradings.append(generator_grading(d, r, labels))

    entries = {}
    for u in cube_vertices(d.n):
        for c in range(d.n):
            if u[c]:
                continue
            v = u[:c] + (1,) + u[c + 1:]
            sign = -1 if (edge_sign(v, c) + d.n_minus) % 2 else 1
            saddle = SaddleMap(d, resolutions[u], resolutions[v], c)
            for labels in range(2 ** resolutions[u].l):
                col = offsets[u] + labels
                for target, coeff in saddle(labels):
                    row = offsets[v] + target
                    entries[(row, col)] = entries.get((row, col), 0) + sign * coeff
    differential = SparseMatrix(len(basis), len(basis), entries, INTEGERS)
    assert_square_zero(differential, "Khovanov differential")
    logger.complex(f"CKh: {d.n} crossings, {len(basis)} generators, {differential.nnz} nonzero entries")
    return KhComplex(d, coloring, basis, gradings, differential, resolutions, offsets)


def xi_action(K: KhComplex, point: Basepoint) -> SparseMatrix:
    '''(-1)^eps(p) times multiplication by x on the circle through p.'''
    if point.edge not in K.diagram.edges:
        raise NoSuchEdge(f"{point.edge}")
    sign = -1 if edge_parity(K.diagram, K.coloring, point.edge) else 1
    entries = {}
    for col, g in enumerate(K.basis):
        i = K.resolutions[g.vertex].circle_of_edge[point.edge]
        if not (g.labels >> i) & 1:
            entries[(K.offsets[g.vertex] + (g.labels | (1 << i)), col)] = sign
    return SparseMatrix(K.dim, K.dim, entries, INTEGERS)


def _restrict(K: KhComplex, keep: Callable[[CubeGenerator], bool], shift: Tuple[int, int], reduced_at: int) -> KhComplex:
    kept = [i for i, g in enumerate(K.basis) if keep(g)]
    basis = [K.basis[i] for i in kept]
    gradings = [(K.gradings[i][0] + shift[0], K.gradings[i][1] + shift[1]) for i in kept]
    offsets = {}
    for j, g in enumerate(basis):
        offsets.setdefault(g.vertex, j)
    return KhComplex(K.diagram, K.coloring, basis, gradings, K.differential.submatrix(kept, kept),
                     K.resolutions, offsets, shift, reduced_at)


def build_reduced(d: LinkDiagram, p0: Basepoint, coloring: Optional[Coloring] = None, K: Optional[KhComplex] = None) -> KhComplex:
    '''ker xi_{p0}: generators whose p0-circle carries x, shifted by (0, 1).'''
    K = K or build_ckh(d, coloring)
    d.edge(p0.edge)
    R = _restrict(K, lambda g: (g.labels >> K.resolutions[g.vertex].circle_of_edge[p0.edge]) & 1, (0, 1), p0.edge)
    assert_square_zero(R.differential, "reduced differential")
    return R


def build_reduced_cokernel(d: LinkDiagram, p0: Basepoint, coloring: Optional[Coloring] = None, K: Optional[KhComplex] = None) -> KhComplex:
    '''coker xi_{p0}: the quotient complex on generators whose p0-circle carries 1, shifted by (0, -1).'''
    K = K or build_ckh(d, coloring)
    d.edge(p0.edge)
    Q = _restrict(K, lambda g: not (g.labels >> K.resolutions[g.vertex].circle_of_edge[p0.edge]) & 1, (0, -1), p0.edge)
    assert_square_zero(Q.differential, "quotient differential")
    return Q


def homology(K: KhComplex, ring: Ring = INTEGERS, threads: int = 1) -> HomologySummary:
    return graded_homology(K.differential, K.gradings, ring, threads)


def rank_register(summary: HomologySummary) -> GradedRankRegister:
    return GradedRankRegister(summary.ranks())


def delta_ranks(summary: HomologySummary) -> GradedRankRegister:
    return rank_register(summary).delta()


#==================================================================#
#  Jones polynomial and Kauffman bracket
#==================================================================#
def jones_polynomial(K: KhComplex) -> sympy.Expr:
    '''Graded Euler characteristic of the chain groups.'''
    return sympy.expand(sum(((-1) ** h) * q ** j for h, j in K.gradings))


def jones_from_homology(summary: HomologySummary) -> sympy.Expr:
    return sympy.expand(sum(c * q ** j for j, c in rank_register(summary).euler_coefficients().items()))


def _state_loops(d: LinkDiagram, v: Sequence[int]) -> int:
    graph = nx.Graph()
    graph.add_nodes_from(d.edges)
    for c in d.crossings:
        joined = SMOOTHINGS[v[c.index]]
        graph.add_edge(c.edges[0], c.edges[joined[0]])
        graph.add_edge(c.edges[2], c.edges[joined[2]])
    return nx.number_connected_components(graph)


def kauffman_bracket(d: LinkDiagram) -> sympy.Expr:
    '''Unnormalised state sum: sum over states of A^(#0 - #1) (-A^2 - A^-2)^(loops).'''
    loop = -A ** 2 - A ** -2
    total = 0
    for v in cube_vertices(d.n):
        ones = sum(v)
        total += A ** (d.n - 2 * ones) * loop ** _state_loops(d, v)
    return sympy.expand(total)


def jones_from_bracket(d: LinkDiagram) -> sympy.Expr:
    '''Unnormalised Jones polynomial written in A, to be compared at q = -A^-2.'''
    factor = (-1) ** d.n_minus * (-A ** -2) ** (d.n_plus - 2 * d.n_minus) * A ** (-d.n)
    return sympy.expand(factor * kauffman_bracket(d))


def check_jones(K: KhComplex) -> bool:
    difference = sympy.expand(jones_polynomial(K).subs(q, -A ** -2) - jones_from_bracket(K.diagram))
    ok = difference == 0
    logger.verify(f"Jones polynomial vs Kauffman bracket: {'agree' if ok else 'DISAGREE'}")
    return ok


#==================================================================#
#  Determinant
#==================================================================#
def tait_laplacian(d: LinkDiagram, coloring: Optional[Coloring] = None) -> Tuple[List[int], SparseMatrix]:
    '''
    Signed Laplacian of the graph on black faces with one edge per crossing.
    A crossing counts +1 when its 0-resolution joins its two black corners.
    '''
    coloring = coloring or checkerboard(d)
    black = [f.index for f in d.faces if f.darts and coloring.is_black(f.index)]
    where = {f: i for i, f in enumerate(black)}
    entries: Dict[Tuple[int, int], int] = {}
    for c in d.crossings:
        corners = [d.dart_face[(c.index, j)] for j in range(4)]
        if coloring.is_black(corners[1]):
            f, g, eta = corners[1], corners[3], 1
        else:
            f, g, eta = corners[0], corners[2], -1
        if f == g:
            continue
        a, b = where[f], where[g]
        for key, value in (((a, a), eta), ((b, b), eta), ((a, b), -eta), ((b, a), -eta)):
            entries[key] = entries.get(key, 0) + value
    return black, SparseMatrix(len(black), len(black), entries, INTEGERS)


def determinant(d: LinkDiagram, coloring: Optional[Coloring] = None) -> int:
    if d.free_loops:
        return 1 if d.n == 0 and d.free_loops == 1 else 0
    black, laplacian = tait_laplacian(d, coloring)
    if len(black) <= 1:
        return 1
    minor = laplacian.submatrix(range(1, len(black)), range(1, len(black)))
    return abs(int(minor.to_domain_matrix(ZZ).to_dense().det()))
