'''
Pointed Khovanov homology of a planar unlink as the module
Lambda_{p,L} (x) Gamma_L, with explicit cycle representatives, and the split
and merge maps between such modules.

A resolution L_v with basepoints carries its own pointed complex
    d = sum_p y_p (x) x_{c(p)}
on Lambda_p (x) A^{(x) l} (no crossings, every circle oriented as the boundary
of a black disc). Its basis element (u, labels) sits at index u * 2^l + labels.

Module basis elements are pairs (lam, gam): lam a monomial in the
non-section basepoints (the section of a circle is its lowest-index point),
gam a subset of circles. The cycle representing lam (x) gam is

    lam ^ zeta_{s(i1)} ... zeta_{s(ij)} (alpha_0 ^ ... ^ alpha_{k-1} (x) 1)

with i1 < ... < ij and the innermost zeta applied first.
'''
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from sympy.polys.domains import QQ

from diagram import Resolution, Saddle
from errors import OrderingMismatch, VerificationFailure
from exactla import INTEGERS, Ring, SparseMatrix, express_in_basis, span_rank
from khovanov import SaddleMap
from logger import logger
from utils import bits, koszul_sign, popcount

Vector = Dict[int, int]
ExteriorElement = Dict[int, int]  # monomial mask -> coefficient


#==================================================================#
#  Exterior algebra on bitmasks
#==================================================================#
def wedge_sign(a: int, b: int) -> int:
    '''Sign of y_a ^ y_b against the sorted monomial of a | b, 0 on overlap.'''
    if a & b:
        return 0
    swaps = 0
    for j in bits(b):
        swaps += popcount(a >> (j + 1))
    return -1 if swaps % 2 else 1


def wedge(x: ExteriorElement, y: ExteriorElement) -> ExteriorElement:
    out: ExteriorElement = {}
    for a, ca in x.items():
        for b, cb in y.items():
            s = wedge_sign(a, b)
            if s:
                out[a | b] = out.get(a | b, 0) + s * ca * cb
    return {k: v for k, v in out.items() if v}


def generator_sum(indices: Sequence[int]) -> ExteriorElement:
    return {1 << i: 1 for i in indices}


#==================================================================#
#  Unlink complex of a resolution
#==================================================================#
@dataclass
class UnlinkComplex:
    m: int
    l: int
    point_circle: Tuple[int, ...]
    differential: SparseMatrix
    gradings: List[Tuple[int, int]]

    @property
    def dim(self) -> int:
        return len(self.gradings)

    def index(self, u: int, labels: int) -> int:
        return (u << self.l) | labels

    def split_index(self, i: int) -> Tuple[int, int]:
        return i >> self.l, i & ((1 << self.l) - 1)


def unlink_complex(r: Resolution) -> UnlinkComplex:
    m, l = len(r.basepoint_circle), r.l
    entries = {}
    for u in range(2 ** m):
        for p in range(m):
            if (u >> p) & 1:
                continue
            bit = 1 << r.basepoint_circle[p]
            sign = koszul_sign(u, p)
            for labels in range(2 ** l):
                if not labels & bit:
                    entries[(((u | (1 << p)) << l) | labels | bit, (u << l) | labels)] = sign
    gradings = [(popcount(u), 2 * popcount(u) + l - 2 * popcount(labels)) for u in range(2 ** m) for labels in range(2 ** l)]
    dim = len(gradings)
    return UnlinkComplex(m, l, r.basepoint_circle, SparseMatrix(dim, dim, entries, INTEGERS), gradings)


def apply_y(C: UnlinkComplex, p: int, vec: Vector) -> Vector:
    out: Vector = {}
    for i, c in vec.items():
        u, labels = C.split_index(i)
        if (u >> p) & 1:
            continue
        j = C.index(u | (1 << p), labels)
        out[j] = out.get(j, 0) + koszul_sign(u, p) * c
    return {k: v for k, v in out.items() if v}


def apply_zeta(C: UnlinkComplex, p: int, vec: Vector) -> Vector:
    '''y_p^* (x) x_{c(p)}.'''
    bit = 1 << C.point_circle[p]
    out: Vector = {}
    for i, c in vec.items():
        u, labels = C.split_index(i)
        if not (u >> p) & 1 or labels & bit:
            continue
        rest = u & ~(1 << p)
        j = C.index(rest, labels | bit)
        out[j] = out.get(j, 0) + koszul_sign(rest, p) * c
    return {k: v for k, v in out.items() if v}


def apply_lambda(C: UnlinkComplex, lam: ExteriorElement, vec: Vector) -> Vector:
    '''Left multiplication by an exterior element.'''
    out: Vector = {}
    for i, c in vec.items():
        u, labels = C.split_index(i)
        for a, ca in lam.items():
            s = wedge_sign(a, u)
            if s:
                j = C.index(a | u, labels)
                out[j] = out.get(j, 0) + s * ca * c
    return {k: v for k, v in out.items() if v}


#==================================================================#
#  The module
#==================================================================#
@dataclass
class UnlinkModule:
    resolution: Resolution
    complex: UnlinkComplex
    circle_points: List[List[int]]
    sections: List[int]
    basis: List[Tuple[int, int]]
    gradings: List[Tuple[int, int]]
    reps: List[Vector]
    boundaries: List[Vector] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.circle_points)

    @property
    def m(self) -> int:
        return self.complex.m

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, lam: int, gam: int) -> int:
        return self._index[(lam, gam)]

    def __post_init__(self):
        self._index = {b: i for i, b in enumerate(self.basis)}

    def alpha(self, circle: int) -> ExteriorElement:
        return generator_sum(self.circle_points[circle])

    def reduce(self, lam: ExteriorElement) -> ExteriorElement:
        '''Rewrites an exterior element in the monomial basis of Lambda_{p,L}.'''
        out: ExteriorElement = {}
        for mask, c in lam.items():
            term: ExteriorElement = {0: c}
            for q in bits(mask):
                circle = self.resolution.basepoint_circle[q]
                if q == self.sections[circle]:
                    factor = {1 << r: -1 for r in self.circle_points[circle] if r != q}
                else:
                    factor = {1 << q: 1}
                term = wedge(term, factor)
            for k2, v in term.items():
                out[k2] = out.get(k2, 0) + v
        return {k2: v for k2, v in out.items() if v}

    def element(self, lam: ExteriorElement, gam: ExteriorElement) -> Vector:
        '''Module coordinates of lam (x) gam, lam reduced first.'''
        out: Vector = {}
        for a, ca in self.reduce(lam).items():
            for g, cg in gam.items():
                i = self.index(a, g)
                out[i] = out.get(i, 0) + ca * cg
        return {k2: v for k2, v in out.items() if v}


def representative(C: UnlinkComplex, circle_points: Sequence[Sequence[int]], sections: Sequence[int], lam: int, gam: int) -> Vector:
    omega: ExteriorElement = {0: 1}
    for pts in circle_points:
        omega = wedge(omega, generator_sum(pts))
    vec = {C.index(u, 0): c for u, c in omega.items()}
    for i in reversed(bits(gam)):
        vec = apply_zeta(C, sections[i], vec)
    return apply_lambda(C, {lam: 1}, vec)


def module_structure(r: Resolution, verify: bool = True) -> UnlinkModule:
    r.require_nondegenerate()
    C = unlink_complex(r)
    k = r.l
    circle_points = [sorted(c.points) for c in r.circles]
    sections = [pts[0] for pts in circle_points]
    free = [p for p in range(C.m) if p not in sections]
    lams = sorted(sum(1 << free[i] for i in bits(s)) for s in range(2 ** len(free)))
    basis, gradings, reps = [], [], []
    for gam in range(2 ** k):
        for lam in lams:
            basis.append((lam, gam))
            a, g = popcount(lam), popcount(gam)
            gradings.append((k + a - g, 3 * k + 2 * a - 4 * g))
            reps.append(representative(C, circle_points, sections, lam, gam))
    boundaries = [col for col in C.differential.columns() if col]
    M = UnlinkModule(r, C, circle_points, sections, basis, gradings, reps, boundaries)
    if verify:
        verify_module(M)
    return M


def verify_module(M: UnlinkModule):
    '''Representatives are cycles of the right bigrading and form a basis of homology.'''
    C = M.complex
    for i, rep in enumerate(M.reps):
        if not rep:
            raise VerificationFailure(f"representative of basis element {i} vanishes")
        if C.differential.apply(rep):
            raise VerificationFailure(f"representative of basis element {i} is not a cycle")
        if {C.gradings[j] for j in rep} != {M.gradings[i]}:
            raise VerificationFailure(f"representative of basis element {i} is not homogeneous of bigrading {M.gradings[i]}")
    d_rank = C.differential.rank()
    total = C.dim - 2 * d_rank
    if total != 2 ** C.m:
        raise VerificationFailure(f"unlink homology has rank {total}, expected {2 ** C.m}")
    independent = span_rank(M.reps + M.boundaries, C.dim, QQ) - d_rank
    if independent != M.dim:
        raise VerificationFailure(f"representatives span rank {independent} in homology, expected {M.dim}")
    logger.verify(f"unlink module at {''.join(map(str, M.resolution.vertex)) or '-'}: {M.k} circles, rank {M.dim}")


def coordinates(M: UnlinkModule, vectors: Sequence[Vector], ring: Ring = INTEGERS) -> SparseMatrix:
    '''Module coordinates of homology classes of cycles, one column per vector.'''
    return express_in_basis(M.reps, M.boundaries, vectors, M.complex.dim, ring)


#==================================================================#
#  Actions in module coordinates
#==================================================================#
def y_action_matrix(M: UnlinkModule, p: int, ring: Ring = INTEGERS) -> SparseMatrix:
    return coordinates(M, [apply_y(M.complex, p, rep) for rep in M.reps], ring)


def zeta_action_matrix(M: UnlinkModule, p: int, ring: Ring = INTEGERS) -> SparseMatrix:
    return coordinates(M, [apply_zeta(M.complex, p, rep) for rep in M.reps], ring)


def abstract_y_action(M: UnlinkModule, p: int, ring: Ring = INTEGERS) -> SparseMatrix:
    columns = [M.element(wedge({1 << p: 1}, {lam: 1}), {gam: 1}) for lam, gam in M.basis]
    return SparseMatrix.from_columns(M.dim, columns, ring)


def abstract_gamma_action(M: UnlinkModule, circle: int, ring: Ring = INTEGERS) -> SparseMatrix:
    '''gamma_i acting from the left, passing lam with sign (-1)^|lam|.'''
    columns = []
    for lam, gam in M.basis:
        sign = -1 if popcount(lam) % 2 else 1
        moved = wedge({1 << circle: sign}, {gam: 1})
        columns.append(M.element({lam: 1}, moved))
    return SparseMatrix.from_columns(M.dim, columns, ring)


def check_action_linearity(M: UnlinkModule) -> bool:
    '''The homology actions of y_p and zeta_p are the Lambda and Gamma module actions.'''
    for p in range(M.m):
        if y_action_matrix(M, p) != abstract_y_action(M, p):
            raise VerificationFailure(f"y_{p} does not act as the exterior algebra element")
        circle = M.resolution.basepoint_circle[p]
        if zeta_action_matrix(M, p) != abstract_gamma_action(M, circle):
            raise VerificationFailure(f"zeta_{p} does not act as gamma_{circle}")
    return True


def section_independence(M: UnlinkModule) -> bool:
    '''zeta_p and zeta_{s(i)} induce the same map on homology for every p on circle i.'''
    for i, pts in enumerate(M.circle_points):
        reference = zeta_action_matrix(M, M.sections[i])
        for p in pts[1:]:
            if zeta_action_matrix(M, p) != reference:
                raise VerificationFailure(f"zeta_{p} and zeta_{M.sections[i]} differ on homology")
    return True


def structural_homotopies(M: UnlinkModule) -> Dict[str, bool]:
    '''
    Exact identities on the unlink complex: with H = x_i^*, Hd - dH is
    (-1)^{label_i} alpha_i; with H = y_p^* y_q^* for p, q on one circle,
    Hd - dH = zeta_p - zeta_q; zeta_p and zeta_q anticommute for all p, q.
    '''
    C = M.complex
    d = C.differential
    dim = C.dim
    results = {}

    def matrix_of(fn) -> SparseMatrix:
        return SparseMatrix.from_columns(dim, [fn({j: 1}) for j in range(dim)])

    for i in range(M.k):
        bit = 1 << i
        H = SparseMatrix(dim, dim, {(j ^ bit, j): 1 for j in range(dim) if C.split_index(j)[1] & bit})
        signs = SparseMatrix(dim, dim, {(j, j): -1 if C.split_index(j)[1] & bit else 1 for j in range(dim)})
        alpha = matrix_of(lambda v: apply_lambda(C, M.alpha(i), v))
        ok = H @ d - d @ H == signs @ alpha
        results[f"x_{i}^* null-homotopes alpha_{i}"] = ok
        if not ok:
            raise VerificationFailure(f"x_{i}^* homotopy fails on circle {i}")
    zetas = [matrix_of(lambda v, p=p: apply_zeta(C, p, v)) for p in range(M.m)]

    def contract(p, vec):
        out: Vector = {}
        for j, c in vec.items():
            u, labels = C.split_index(j)
            if (u >> p) & 1:
                rest = u & ~(1 << p)
                key = C.index(rest, labels)
                out[key] = out.get(key, 0) + koszul_sign(rest, p) * c
        return out

    for pts in M.circle_points:
        for a in pts:
            for b in pts:
                if a >= b:
                    continue
                H = matrix_of(lambda v: contract(a, contract(b, v)))
                ok = H @ d - d @ H == zetas[a] - zetas[b]
                results[f"y_{a}^* y_{b}^* homotopy"] = ok
                if not ok:
                    raise VerificationFailure(f"zeta_{a} and zeta_{b} are not homotopic")
    for a in range(M.m):
        for b in range(M.m):
            if not (zetas[a] @ zetas[b] + zetas[b] @ zetas[a]).is_zero():
                raise VerificationFailure(f"zeta_{a} and zeta_{b} do not anticommute")
    logger.verify(f"{len(results)} structural homotopies hold on the unlink complex")
    return results


#==================================================================#
#  Split and merge maps
#==================================================================#
@dataclass(frozen=True)
class EdgeMapSpec:
    kind: str
    crossing: int
    source_circles: Tuple[int, ...]
    target_circles: Tuple[int, ...]
    ordering_sign: int

    @property
    def is_split(self) -> bool:
        return self.kind == "split"


def edge_map_spec(saddle: Saddle) -> EdgeMapSpec:
    '''
    Permutation sign sgn(sigma) sgn(tau) taking the canonical circle orders to
    [split circle, others] -> [lower new circle, upper new circle, others]
    (or the reverse for a merge).
    '''
    if saddle.is_split:
        (a,), (b, c) = saddle.source_circles, saddle.target_circles
        exponent = a + b + c - 1
    else:
        (a, b), (c,) = saddle.source_circles, saddle.target_circles
        exponent = a + b - 1 + c
    return EdgeMapSpec(saddle.kind, saddle.crossing, saddle.source_circles, saddle.target_circles, -1 if exponent % 2 else 1)


def _gamma_image(source: UnlinkModule, target: UnlinkModule, gam: int) -> ExteriorElement:
    out: ExteriorElement = {0: 1}
    for i in bits(gam):
        out = wedge(out, {1 << target.resolution.basepoint_circle[source.sections[i]]: 1})
    return out


def split_map(spec: EdgeMapSpec, source: UnlinkModule, target: UnlinkModule, ring: Ring = INTEGERS) -> SparseMatrix:
    '''lam (x) gam -> eps * lam (x) gam~ (gamma'_0 - gamma'_1).'''
    b, c = spec.target_circles
    difference = {1 << b: 1, 1 << c: -1}
    columns = []
    for lam, gam in source.basis:
        gam_part = wedge(_gamma_image(source, target, gam), difference)
        columns.append({i: spec.ordering_sign * v for i, v in target.element({lam: 1}, gam_part).items()})
    return SparseMatrix.from_columns(target.dim, columns, ring)


def merge_map(spec: EdgeMapSpec, source: UnlinkModule, target: UnlinkModule, ring: Ring = INTEGERS) -> SparseMatrix:
    '''lam (x) gam -> eps (-1)^|gam| (lam ^ alpha'_0) (x) gam-bar.'''
    alpha0 = source.alpha(spec.source_circles[0])
    columns = []
    for lam, gam in source.basis:
        sign = spec.ordering_sign * (-1 if popcount(gam) % 2 else 1)
        lam_part = wedge({lam: sign}, alpha0)
        columns.append(target.element(lam_part, _gamma_image(source, target, gam)))
    return SparseMatrix.from_columns(target.dim, columns, ring)


def formula_map(spec: EdgeMapSpec, source: UnlinkModule, target: UnlinkModule, ring: Ring = INTEGERS) -> SparseMatrix:
    return (split_map if spec.is_split else merge_map)(spec, source, target, ring)


def chain_image(source: UnlinkModule, target: UnlinkModule, saddle: SaddleMap, vec: Vector) -> Vector:
    '''id (x) (co)multiplication between the two unlink complexes.'''
    S, T = source.complex, target.complex
    out: Vector = {}
    for i, c in vec.items():
        u, labels = S.split_index(i)
        for new, coeff in saddle(labels):
            j = T.index(u, new)
            out[j] = out.get(j, 0) + coeff * c
    return {k: v for k, v in out.items() if v}


def induced_map(source: UnlinkModule, target: UnlinkModule, saddle: SaddleMap, ring: Ring = INTEGERS) -> SparseMatrix:
    images = [chain_image(source, target, saddle, rep) for rep in source.reps]
    return coordinates(target, images, ring)


def check_edge_map(spec: EdgeMapSpec, source: UnlinkModule, target: UnlinkModule, saddle: SaddleMap, ring: Ring = INTEGERS) -> SparseMatrix:
    '''Induced homology map must equal the module formula, ordering sign included.'''
    induced = induced_map(source, target, saddle, ring)
    predicted = formula_map(spec, source, target, ring)
    if induced != predicted:
        flipped = induced == predicted.scale(-1)
        raise OrderingMismatch(f"{spec.kind} at crossing {spec.crossing + 1}" + (" (off by a global sign)" if flipped else ""))
    logger.verify(f"{spec.kind} at crossing {spec.crossing + 1}: induced map matches the module formula")
    return induced
