'''
The pointed Khovanov complex: the exterior algebra on the basepoints tensored
with the Khovanov complex, with the Koszul differential

    d(a (x) b) = (-1)^|a| a (x) d_Kh b  +  sum_p (y_p ^ a) (x) xi_p b.

Basis elements are pairs (u, j): u a bitmask of basepoints standing for the
wedge monomial y_u in increasing order, j an index into the Khovanov basis.
Besides the complex this module builds the wedge, contraction and zeta
actions, the transport homotopies across a crossing, the chain isomorphism
moving a basepoint along its component, and the rank comparisons that follow
from the mapping cone description.
'''
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from diagram import (Basepoint, BasepointSet, Coloring, LinkDiagram, checkerboard, component_of_edge,
                     components, edge_parity, edge_sign, forward_path)
from errors import (DifferentComponents, NotAdjacent, SameComponentRequired,
                    UsageError, VerificationFailure)
from exactla import INTEGERS, HomologySummary, Ring, SparseMatrix, assert_square_zero, graded_homology
from khovanov import KhComplex, SaddleMap, build_ckh, build_reduced, rank_register, xi_action
from logger import logger
from structures import GradedRankRegister
from utils import koszul_sign, popcount


@dataclass
class PointedComplex:
    kh: KhComplex
    points: BasepointSet
    parities: Tuple[int, ...]
    gradings: List[Tuple[int, int]]
    differential: SparseMatrix
    xi: List[SparseMatrix] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return len(self.gradings)

    @property
    def diagram(self) -> LinkDiagram:
        return self.kh.diagram

    @property
    def coloring(self) -> Coloring:
        return self.kh.coloring

    def index(self, u: int, j: int) -> int:
        return u * self.kh.dim + j

    def split_index(self, i: int) -> Tuple[int, int]:
        return divmod(i, self.kh.dim)


def _wedge_entries(m: int, i: int, left: bool = True):
    '''(source mask, target mask, sign) for wedging with y_i on the left or right.'''
    for u in range(2 ** m):
        if (u >> i) & 1:
            continue
        sign = koszul_sign(u, i)
        if not left and popcount(u) % 2:
            sign = -sign
        yield u, u | (1 << i), sign


def _lift(dims, pieces) -> SparseMatrix:
    '''Assembles sum over (u -> u', sign, M) of y-part (x) M into one matrix.'''
    kdim, total = dims
    entries: Dict[Tuple[int, int], int] = {}
    for u, w, sign, M in pieces:
        for (r, c), val in M.entries():
            key = (w * kdim + r, u * kdim + c)
            entries[key] = entries.get(key, 0) + sign * val
    return SparseMatrix(total, total, entries, INTEGERS)


#==================================================================#
#  Construction
#==================================================================#
def build_pointed(d: LinkDiagram, points: BasepointSet, coloring: Optional[Coloring] = None, K: Optional[KhComplex] = None) -> PointedComplex:
    coloring = coloring or (K.coloring if K else checkerboard(d))
    K = K or build_ckh(d, coloring, points)
    m = len(points)
    xi = [xi_action(K, p) for p in points]
    gradings = []
    for u in range(2 ** m):
        k = popcount(u)
        gradings += [(h + k, j + 2 * k) for h, j in K.gradings]
    pieces = [(u, u, -1 if popcount(u) % 2 else 1, K.differential) for u in range(2 ** m)]
    for i in range(m):
        pieces += [(u, w, sign, xi[i]) for u, w, sign in _wedge_entries(m, i)]
    differential = _lift((K.dim, len(gradings)), pieces)
    assert_square_zero(differential, "pointed differential")
    parities = tuple(edge_parity(d, coloring, p.edge) for p in points)
    logger.complex(f"CKh(L,p): {m} basepoints, {len(gradings)} generators, {differential.nnz} nonzero entries")
    return PointedComplex(K, points, parities, gradings, differential, xi)


def homology(P: PointedComplex, ring: Ring = INTEGERS, threads: int = 1) -> HomologySummary:
    return graded_homology(P.differential, P.gradings, ring, threads)


def rank_table(d: LinkDiagram, points: BasepointSet, ring: Ring, coloring: Optional[Coloring] = None, threads: int = 1) -> GradedRankRegister:
    return rank_register(homology(build_pointed(d, points, coloring), ring, threads))


#==================================================================#
#  Module actions
#==================================================================#
def lambda_action(P: PointedComplex, i: int) -> SparseMatrix:
    '''Left multiplication by y_{p_i}.'''
    I = SparseMatrix.identity(P.kh.dim)
    return _lift((P.kh.dim, P.dim), [(u, w, s, I) for u, w, s in _wedge_entries(P.m, i)])


def right_lambda_action(P: PointedComplex, i: int) -> SparseMatrix:
    '''a (x) b -> (a ^ y_{p_i}) (x) b.'''
    I = SparseMatrix.identity(P.kh.dim)
    return _lift((P.kh.dim, P.dim), [(u, w, s, I) for u, w, s in _wedge_entries(P.m, i, left=False)])


def _contraction_pieces(P: PointedComplex, i: int, M: SparseMatrix):
    return [(w, u, s, M) for u, w, s in _wedge_entries(P.m, i)]


def contraction(P: PointedComplex, i: int) -> SparseMatrix:
    '''H_p = y_p^* (x) id.'''
    return _lift((P.kh.dim, P.dim), _contraction_pieces(P, i, SparseMatrix.identity(P.kh.dim)))


def zeta_action(P: PointedComplex, i: int) -> SparseMatrix:
    '''zeta_p = y_p^* (x) xi_p, of bigrading (-1, -4).'''
    return _lift((P.kh.dim, P.dim), _contraction_pieces(P, i, P.xi[i]))


def check_module_identities(P: PointedComplex) -> Dict[str, bool]:
    '''
    Exact matrix checks: xi_p squares to zero and commutes with d_Kh and the
    other xi; y_p and zeta_p anticommute with d; zeta_p squares to zero;
    zeta_p y_q + y_q zeta_p is zero for p != q and equals d H_p + H_p d for p = q.
    '''
    d, dK = P.differential, P.kh.differential
    results = {}

    def record(name, ok):
        results[name] = ok
        if not ok:
            raise VerificationFailure(name)

    ys = [lambda_action(P, i) for i in range(P.m)]
    zs = [zeta_action(P, i) for i in range(P.m)]
    for i in range(P.m):
        xi = P.xi[i]
        record(f"xi_{i} squares to zero", (xi @ xi).is_zero())
        record(f"xi_{i} commutes with d_Kh", (xi @ dK - dK @ xi).is_zero())
        record(f"y_{i} anticommutes with d", (ys[i] @ d + d @ ys[i]).is_zero())
        record(f"zeta_{i} anticommutes with d", (zs[i] @ d + d @ zs[i]).is_zero())
        record(f"zeta_{i} squares to zero", (zs[i] @ zs[i]).is_zero())
        H = contraction(P, i)
        for j in range(P.m):
            bracket = zs[i] @ ys[j] + ys[j] @ zs[i]
            if i == j:
                record(f"zeta_{i} y_{i} + y_{i} zeta_{i} = dH + Hd", bracket == d @ H + H @ d)
            else:
                record(f"xi_{i} commutes with xi_{j}", (xi @ P.xi[j] - P.xi[j] @ xi).is_zero())
                record(f"zeta_{i} anticommutes with y_{j}", bracket.is_zero())
    logger.verify(f"{len(results)} module identities hold on CKh(L,p)")
    return results


#==================================================================#
#  Transport across a crossing and basepoint moves
#==================================================================#
def transport_homotopy(K: KhComplex, crossing: int, edge_in: int, edge_out: int) -> SparseMatrix:
    '''
    Chain homotopy H along the reversed cube edges at a crossing with
    d H + H d = xi_in - xi_out, where edge_in enters the crossing and edge_out
    leaves it along the same strand.
    '''
    d = K.diagram
    c = d.crossings[crossing]
    strands = [(c.edges[p], c.edges[(p + 2) % 4]) for p in range(4)
               if d.edges[c.edges[p]].head == (crossing, p)]
    if (edge_in, edge_out) not in strands:
        raise NotAdjacent(f"edges {edge_in} and {edge_out} at crossing {crossing + 1}")
    parity = edge_parity(d, K.coloring, edge_in)
    overall = -1 if (d.n_minus + parity) % 2 else 1
    entries = {}
    for v, r in K.resolutions.items():
        if not v[crossing]:
            continue
        u = v[:crossing] + (0,) + v[crossing + 1:]
        sign = overall * (-1 if edge_sign(v, crossing) else 1)
        saddle = SaddleMap(d, r, K.resolutions[u], crossing)
        for labels in range(2 ** r.l):
            for target, coeff in saddle(labels):
                key = (K.offsets[u] + target, K.offsets[v] + labels)
                entries[key] = entries.get(key, 0) + sign * coeff
    H = SparseMatrix(K.dim, K.dim, entries, INTEGERS)
    xi_in, xi_out = xi_action(K, Basepoint(edge_in)), xi_action(K, Basepoint(edge_out))
    if K.differential @ H + H @ K.differential != xi_in - xi_out:
        raise VerificationFailure(f"transport homotopy at crossing {crossing + 1} fails d H + H d = xi_in - xi_out")
    return H


def path_homotopy(K: KhComplex, start: int, path: Sequence[Tuple[int, int, int]]) -> SparseMatrix:
    '''
    Minus the sum of the transport homotopies along a forward path from edge
    `start`; satisfies d H + H d = xi_end - xi_start.
    '''
    d = K.diagram
    H = SparseMatrix.zeros(K.dim, K.dim)
    label = start
    for k, enter, leave in path:
        nxt = d.crossings[k].edges[leave]
        H = H - transport_homotopy(K, k, label, nxt)
        label = nxt
    return H


@dataclass
class BasepointMove:
    source: PointedComplex
    target: PointedComplex
    index: int
    matrix: SparseMatrix
    inverse: SparseMatrix


def basepoint_move_iso(P: PointedComplex, index: int, new_point: Basepoint) -> BasepointMove:
    '''
    Moves basepoint `index` forward along its component to `new_point`:
    f(a (x) b) = a (x) b + (a ^ y) (x) H(b), with H the path homotopy.
    '''
    d = P.diagram
    old = P.points[index]
    d.edge(new_point.edge)
    which = component_of_edge(d)
    if which[old.edge] != which[new_point.edge]:
        raise DifferentComponents(f"edges {old.edge} and {new_point.edge}")
    new_points = P.points.replaced(index, new_point)
    target = build_pointed(d, new_points, P.coloring)
    path = forward_path(d, old.edge, new_point.edge)
    H = path_homotopy(P.kh, old.edge, path)
    W = right_lambda_action(P, index)
    lifted = _lift((P.kh.dim, P.dim), [(u, u, 1, H) for u in range(2 ** P.m)])
    correction = W @ lifted
    I = SparseMatrix.identity(P.dim)
    f, g = I + correction, I - correction
    if target.differential @ f != f @ P.differential:
        raise VerificationFailure("basepoint move is not a chain map")
    if not (f @ g == I and g @ f == I):
        raise VerificationFailure("basepoint move is not invertible")
    for j in range(P.m):
        if j == index:
            continue
        y = lambda_action(P, j)
        if f @ y != y @ f:
            raise VerificationFailure(f"basepoint move does not commute with y_{j}")
    y = lambda_action(P, index)
    if f @ y != y @ f:
        raise VerificationFailure("basepoint move does not intertwine the moved y")
    logger.verify(f"basepoint {old} -> {new_point}: chain isomorphism across {len(path)} crossing(s)")
    return BasepointMove(P, target, index, f, g)


def loop_chain_map(K: KhComplex, edge: int) -> SparseMatrix:
    '''
    (-1)^gr_h times the path homotopy once around the component through
    `edge`; a chain map on CKh(L).
    '''
    d = K.diagram
    if d.edge(edge).free:
        return SparseMatrix.zeros(K.dim, K.dim)
    k, p = d.edges[edge].head
    first = (k, p, (p + 2) % 4)
    rest = forward_path(d, d.crossings[k].edges[(p + 2) % 4], edge)
    H = path_homotopy(K, edge, [first] + rest)
    signs = SparseMatrix(K.dim, K.dim, {(i, i): -1 if h % 2 else 1 for i, (h, _) in enumerate(K.gradings)})
    M = signs @ H
    if K.differential @ M != M @ K.differential:
        raise VerificationFailure("loop homotopy does not give a chain map")
    return M


#==================================================================#
#  Recovering CKh(L) and rank relations
#==================================================================#
def recover_khovanov(P: PointedComplex) -> SparseMatrix:
    '''
    The intersection of the kernels of the y_p is y_full (x) CKh(L), shifted by
    (m, 2m), with differential (-1)^m d_Kh; returns the isomorphism
    (-1)^{m gr_h} onto (CKh(L), d_Kh).
    '''
    full = 2 ** P.m - 1
    rows = [P.index(full, j) for j in range(P.kh.dim)]
    if P.m:
        stacked = SparseMatrix(P.dim * P.m, P.dim,
                               {(i * P.dim + r, c): v for i in range(P.m) for (r, c), v in lambda_action(P, i).entries()})
        if P.dim - stacked.rank() != P.kh.dim:
            raise VerificationFailure("common kernel of the y actions has the wrong dimension")
    restricted = P.differential.submatrix(rows, rows)
    sign = -1 if P.m % 2 else 1
    if restricted != P.kh.differential.scale(sign):
        raise VerificationFailure("restriction to y_full (x) CKh is not (-1)^m d_Kh")
    for j, (h, q) in enumerate(P.kh.gradings):
        if P.gradings[rows[j]] != (h + P.m, q + 2 * P.m):
            raise VerificationFailure("restriction is not shifted by (m, 2m)")
    iso = SparseMatrix(P.kh.dim, P.kh.dim,
                       {(j, j): -1 if (P.m * h) % 2 else 1 for j, (h, _) in enumerate(P.kh.gradings)})
    if P.kh.differential @ iso != iso @ restricted:
        raise VerificationFailure("sign change does not identify the complexes")
    return iso


@dataclass
class RankComparison:
    ok: bool
    left: GradedRankRegister
    right: GradedRankRegister
    relation: str


def _same_component(d: LinkDiagram, a: Basepoint, b: Basepoint) -> bool:
    which = component_of_edge(d)
    return which[a.edge] == which[b.edge]


def doubling_witness(d: LinkDiagram, points: BasepointSet, keep: int, drop: int, ring: Ring, coloring: Optional[Coloring] = None, threads: int = 1) -> RankComparison:
    '''
    rank Kh^{h,q}(L,p) = rank Kh^{h,q}(L,p') + rank Kh^{h-1,q-2}(L,p') for p' = p minus a doubled point.

    ``drop`` is the point removed from ``points``. ``keep`` names the point it
    doubles: it stays in p' and only has to lie on the same component as
    ``drop``, which is checked before anything is built.
    '''
    if len(points) < 2 or keep == drop:
        raise UsageError("doubling needs two distinct basepoints")
    if not _same_component(d, points[keep], points[drop]):
        raise SameComponentRequired(f"{points[keep]} and {points[drop]}")
    whole = rank_table(d, points, ring, coloring, threads)
    smaller = rank_table(d, points.without(drop), ring, coloring, threads)
    predicted = GradedRankRegister(smaller)
    for k, v in smaller.shifted(1, 2).items():
        predicted.add(k, v)
    ok = whole == predicted
    logger.verify(f"doubling over {ring}: {'holds' if ok else 'FAILS'} (rank {whole.total()} vs {smaller.total()})")
    return RankComparison(ok, whole, predicted, "=")


def ses_inequality(d: LinkDiagram, points: BasepointSet, drop: int, ring: Ring, coloring: Optional[Coloring] = None, threads: int = 1) -> RankComparison:
    '''rank Kh^{h,q}(L,p) <= rank Kh^{h,q}(L,p') + rank Kh^{h-1,q-2}(L,p') for any removed point.'''
    whole = rank_table(d, points, ring, coloring, threads)
    smaller = rank_table(d, points.without(drop), ring, coloring, threads)
    bound = GradedRankRegister(smaller)
    for k, v in smaller.shifted(1, 2).items():
        bound.add(k, v)
    ok = all(whole[k] <= bound[k] for k in whole)
    logger.verify(f"short exact sequence bound over {ring}: {'holds' if ok else 'FAILS'}")
    return RankComparison(ok, whole, bound, "<=")


def reduced_relation(d: LinkDiagram, points: BasepointSet, ring: Ring, at: int = 0, coloring: Optional[Coloring] = None, threads: int = 1) -> RankComparison:
    '''
    Compares the delta graded ranks of Kh(L,p) with 2^{|p|-1} times the sum of
    the reduced ranks at delta +- 1/2. Equality for one point or for knots,
    an upper bound otherwise.
    '''
    if not ring.is_field:
        raise UsageError("the reduced relation is stated over a field")
    if not len(points):
        raise UsageError("the reduced relation needs a basepoint")
    coloring = coloring or checkerboard(d)
    left = rank_table(d, points, ring, coloring, threads).delta()
    R = build_reduced(d, points[at], coloring)
    reduced = rank_register(graded_homology(R.differential, R.gradings, ring, threads)).delta()
    factor = 2 ** (len(points) - 1)
    right = GradedRankRegister()
    half = Fraction(1, 2)
    for delta, v in reduced.items():
        right.add(delta - half, factor * v)
        right.add(delta + half, factor * v)
    equality = len(points) == 1 or len(components(d)) == 1
    if equality:
        ok = left == right
    else:
        ok = all(left[k] <= right[k] for k in left)
    logger.verify(f"reduced relation over {ring} ({'=' if equality else '<='}): {'holds' if ok else 'FAILS'}")
    return RankComparison(ok, left, right, "=" if equality else "<=")
