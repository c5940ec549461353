from fractions import Fraction

import pytest

from diagram import autofill_basepoints, cube_edges, parse_basepoints, parse_pd
from errors import DegenerateVertex, UsageError, VerificationFailure
from exactla import F2, INTEGERS, RATIONALS, SparseMatrix
from pointed import build_pointed
from pointed import homology as pointed_homology
from spectral import FilteredComplex, check_d1_chain_level, compare_e2, cube_e0_iso, cube_filtration, pages

UNKNOT1NEG = "X(1,2,2,1)"
TREFOIL = "X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)"
HOPF = "X(4,1,3,2), X(2,3,1,4)"


def pointed(pd, points=None, free_loops=0):
    d = parse_pd(pd, free_loops)
    p = parse_basepoints(d, points) if points is not None else autofill_basepoints(d)
    return build_pointed(d, p)


def test_single_level_complex():
    F = FilteredComplex(SparseMatrix(3, 3, {(1, 0): 1}), [0, 0, 0], [(0, 0), (1, 0), (0, 2)])
    report = pages(F, RATIONALS)
    assert report.totals() == [3, 1]
    assert report.converged_at == 1
    assert report.homology_rank == 1
    assert report.pages[1].as_plain() == {(0, 0, 2): 1}


def test_differential_one_level_up():
    F = FilteredComplex(SparseMatrix(2, 2, {(1, 0): 1}), [0, 1], [(0, 0), (1, 0)])
    report = pages(F, F2)
    assert report.totals() == [2, 2, 0]
    assert report.converged_at == 2


def test_differential_two_levels_up():
    F = FilteredComplex(SparseMatrix(2, 2, {(1, 0): 1}), [0, 2], [(0, 0), (1, 0)])
    report = pages(F, F2)
    assert report.totals() == [2, 2, 2, 0]
    assert report.converged_at == 3
    assert report.pages[2].as_plain() == {(0, 0, 0): 1, (2, 1, 0): 1}
    assert report.by_bigrading(2).as_plain() == {(0, 0): 1, (1, 0): 1}
    assert report.by_delta(2).as_plain() == {(0, Fraction(0)): 1, (2, Fraction(1)): 1}


def test_filtration_must_not_drop():
    with pytest.raises(VerificationFailure):
        FilteredComplex(SparseMatrix(2, 2, {(0, 1): 1}), [0, 1], [(0, 0), (1, 0)])


def test_pages_need_a_field():
    F = FilteredComplex(SparseMatrix.zeros(1, 1), [0], [(0, 0)])
    with pytest.raises(UsageError):
        pages(F, INTEGERS)


def test_cube_filtration_of_the_unknot():
    P = pointed(UNKNOT1NEG, "1,2")
    F = cube_filtration(P)
    assert sorted(set(F.levels)) == [0, 1]
    report = pages(F, F2)
    assert report.totals()[0] == P.dim
    assert report.totals()[-1] == 4
    assert report.homology_rank == pointed_homology(P, F2).total_rank()


def test_e1_of_the_unknot():
    P = pointed(UNKNOT1NEG, "1,2")
    E1 = cube_e0_iso(P)
    assert [E1.modules[v].dim for v in E1.vertices] == [4, 4]
    assert E1.dim == 8
    assert set(E1.levels) == {0, 1}
    assert check_d1_chain_level(P, E1)
    ok, generic, from_e1 = compare_e2(P, E1, F2)
    assert ok
    assert generic.total() == from_e1.total() == 4


@pytest.mark.parametrize("pd, points", [
    (HOPF, None),
    (TREFOIL, "1,2,3"),
])
def test_e1_and_e2(pd, points):
    P = pointed(pd, points)
    E1 = cube_e0_iso(P)
    assert E1.dim == 2 ** P.m * len(E1.vertices)
    assert len(E1.sign_ledger) == len(cube_edges(P.diagram.n))
    assert set(E1.sign_ledger.values()) <= {1, -1}
    assert check_d1_chain_level(P, E1)
    ok, generic, from_e1 = compare_e2(P, E1, F2)
    assert ok
    assert generic == from_e1


def test_e1_deltas_match_gradings():
    P = pointed(UNKNOT1NEG, "1,2")
    E1 = cube_e0_iso(P, check_edges=False)
    assert E1.deltas() == [h - Fraction(q, 2) for h, q in E1.gradings]


def test_degenerate_vertex():
    P = pointed(UNKNOT1NEG, "1")
    with pytest.raises(DegenerateVertex):
        cube_e0_iso(P)


def test_crossingless_unlink_has_zero_d1():
    P = pointed("", None, free_loops=2)
    E1 = cube_e0_iso(P)
    assert E1.differential.is_zero()
    assert E1.e2_by_level(F2).total() == 4
    report = pages(cube_filtration(P), F2)
    assert report.totals()[-1] == 4
