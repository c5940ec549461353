from fractions import Fraction

import pytest

from diagram import autofill_basepoints, cube_edges, parse_basepoints, parse_pd, resolve
from errors import DegenerateVertex, VerificationFailure
from hfkcube import (F0_ONLY, FULL, build_cube, build_e1, build_e1_f0, build_e1_full, compare_e1, distinguished_points,
                     f0_edge_map, f1_edge_map, filtration_inequality, vertex_module, width)
from structures import GradedRankRegister

UNKNOT1NEG = "X(1,2,2,1)"
TREFOIL = "X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)"
HOPF = "X(4,1,3,2), X(2,3,1,4)"


def setup(pd, points=None, free_loops=0):
    d = parse_pd(pd, free_loops)
    return d, parse_basepoints(d, points) if points is not None else autofill_basepoints(d)


@pytest.fixture(scope="module")
def unknot_cube():
    d, points = setup(UNKNOT1NEG, "1,2")
    return build_cube(d, points)


def test_vertex_module_gradings():
    d, points = setup("", "1", free_loops=1)
    M = vertex_module(resolve(d, (), None, points))
    assert [(M.maslov(i), M.alexander(i)) for i in range(M.dim)] == [(Fraction(1, 2), 0), (Fraction(-1, 2), 0)]
    assert [M.delta(i) for i in range(M.dim)] == [Fraction(-1, 2), Fraction(1, 2)]


def test_vertex_module_with_two_points(unknot_cube):
    M = unknot_cube.modules[(0,)]
    assert (M.k, M.m, M.dim) == (1, 2, 4)
    assert sorted(M.alexander(i) for i in range(M.dim)) == [-1, -1, 0, 0]
    assert M.y_matrix(0) == M.y_matrix(1)
    assert (M.y_matrix(1) @ M.y_matrix(1)).is_zero()
    assert (M.gamma_matrix(0) @ M.gamma_matrix(0)).is_zero()
    assert M.gamma_matrix(0) @ M.y_matrix(1) == M.y_matrix(1) @ M.gamma_matrix(0)


def test_gradings_shift_with_the_cube(unknot_cube):
    M = unknot_cube.modules[(1,)]
    top = M.index(0, 0)
    assert M.maslov(top) == 1
    assert M.big_delta(top) == M.delta(top) + Fraction(1, 2)
    assert M.g_grading(top) == Fraction(1 - 2, 2)


def test_split_maps_on_the_kink(unknot_cube):
    source, target = unknot_cube.modules[(0,)], unknot_cube.modules[(1,)]
    saddle = unknot_cube.saddle((0,), (1,))
    assert saddle.is_split
    assert sorted(distinguished_points(unknot_cube, saddle, (0,), (1,))) == [0, 1]
    f0 = f0_edge_map(unknot_cube, (0,), (1,))
    assert f0.column(source.index(0, 0)) == {target.index(0, 1): 1, target.index(0, 2): 1}
    f1 = f1_edge_map(unknot_cube, (0,), (1,), f0)
    assert f1.column(source.index(0, 0)) == {}
    assert f1.column(source.index(2, 0)) == {target.index(0, 1): 1, target.index(0, 2): 1}
    assert f1.column(source.index(0, 1)) == {}
    assert f1.column(source.index(2, 1)) == {target.index(0, 3): 1}


def test_merge_base_case():
    d, points = setup(HOPF)
    cube = build_cube(d, points)
    merges = 0
    for u, v in cube_edges(d.n):
        saddle = cube.saddle(u, v)
        f1 = f1_edge_map(cube, u, v, saddle=saddle)
        top_u, top_v = cube.modules[u].index(0, 0), cube.modules[v].index(0, 0)
        if saddle.is_split:
            assert f1.column(top_u) == {}
        else:
            merges += 1
            assert f1.column(top_u) == {top_v: 1}
    assert merges == 2


@pytest.mark.parametrize("pd, points", [
    (UNKNOT1NEG, "1,2"),
    (HOPF, None),
    (TREFOIL, "1,2,3"),
])
def test_both_variants_are_complexes(pd, points):
    d, p = setup(pd, points)
    cube = build_cube(d, p)
    for variant in (F0_ONLY, FULL):
        E1 = build_e1(cube, variant)
        assert (E1.differential @ E1.differential).is_zero()
        assert len(E1.ledgers) == len(cube_edges(d.n))
        assert all(ledger.ok for ledger in E1.ledgers)
        assert E1.dim == 2 ** len(p) * 2 ** d.n


def test_ledgers_record_the_shifts():
    d, points = setup(UNKNOT1NEG, "1,2")
    E1 = build_e1_full(d, points)
    (ledger,) = E1.ledgers
    assert ledger.kind == "split"
    assert set(ledger.alexander_f0) == {0}
    assert set(ledger.alexander_f1) == {1}
    assert set(ledger.g_f0) == {0}
    assert set(ledger.g_f1) == {1}
    f0, f1 = E1.edge_maps[("0", "1")]
    assert f1 is not None and not f1.is_zero()


@pytest.mark.parametrize("pd, points", [
    (UNKNOT1NEG, "1,2"),
    (HOPF, None),
    (TREFOIL, "1,2,3"),
])
def test_filtration_inequality(pd, points):
    d, p = setup(pd, points)
    assert filtration_inequality(build_e1_f0(d, p), build_e1_full(d, p))


def test_crossingless_e2_has_full_rank():
    d, points = setup("", None, free_loops=2)
    E1 = build_e1_full(d, points)
    e2 = E1.e2_by_delta()
    assert e2.total() == 2 ** len(points)
    assert width(e2) == 3
    assert build_e1_f0(d, points).e2_by_g().total() == 4


def test_g_grading_needs_the_f0_variant():
    d, points = setup(UNKNOT1NEG, "1,2")
    with pytest.raises(VerificationFailure):
        build_e1_full(d, points).e2_by_g()


def test_degenerate_vertex():
    d, points = setup(UNKNOT1NEG, "1")
    with pytest.raises(DegenerateVertex):
        build_cube(d, points)


def test_width_counts_delta_gradings():
    ranks = GradedRankRegister({(0, Fraction(1, 2)): 1, (1, Fraction(1, 2)): 2, (1, Fraction(3, 2)): 1})
    assert width(ranks) == 2


@pytest.mark.parametrize("pd, points", [
    (UNKNOT1NEG, "1,2"),
    (HOPF, None),
    (TREFOIL, "1,2,3"),
])
def test_khovanov_and_floer_first_pages_agree(pd, points):
    d, p = setup(pd, points)
    result = compare_e1(d, p, threads=2)
    assert result.isomorphic
    assert result.e2_agrees
    assert len(result.witness) == 2 ** len(p) * 2 ** d.n


@pytest.mark.parametrize("pd, free_loops, total", [
    (TREFOIL, 0, 192),
    ("X(1,2,2,3), X(4,4,1,3)", 0, 16),
    (UNKNOT1NEG, 0, 4),
    ("", 1, 2),
])
def test_one_point_per_edge(pd, free_loops, total):
    d, points = setup(pd, free_loops=free_loops)
    full, f0 = build_e1_full(d, points), build_e1_f0(d, points)
    assert filtration_inequality(f0, full)
    assert full.e2_by_delta().total() == total
    assert f0.e2_by_delta().total() == total


def test_trefoil_pages_agree_with_a_point_on_every_edge():
    d, points = setup(TREFOIL)
    result = compare_e1(d, points)
    assert result.isomorphic
    assert result.e2_agrees
    assert result.hfk_e2.total() == 192


@pytest.mark.slow
def test_figure_eight_with_a_point_on_every_edge():
    d, points = setup("X(4,2,5,1), X(8,6,1,5), X(6,3,7,4), X(2,7,3,8)")
    full, f0 = build_e1_full(d, points), build_e1_f0(d, points)
    assert filtration_inequality(f0, full)
    assert full.e2_by_delta().total() == 1280


def rank_by_level(ranks):
    out = {}
    for (level, _), rank in ranks.items():
        out[level] = out.get(level, 0) + rank
    return out


def test_full_variant_sees_the_kink():
    crossingless = build_e1_full(*setup("", "1,1:1", free_loops=1)).e2_by_delta()
    kinked = build_e1_full(*setup(UNKNOT1NEG, "1,2")).e2_by_delta()
    assert crossingless.total() == kinked.total() == 4
    assert rank_by_level(crossingless) == {0: 4}
    assert rank_by_level(kinked) == {0: 2, 1: 2}
    assert crossingless != kinked
