import pytest

from diagram import Basepoint, autofill_basepoints, edge_parity, parse_basepoints, parse_pd, unlink_diagram
from errors import DifferentComponents, NotAdjacent, SameComponentRequired, UsageError
from exactla import F2, INTEGERS, RATIONALS, SparseMatrix
from khovanov import build_ckh
from pointed import (basepoint_move_iso, build_pointed, check_module_identities, doubling_witness, homology,
                     lambda_action, loop_chain_map, rank_table, recover_khovanov, reduced_relation, ses_inequality,
                     transport_homotopy, zeta_action)

UNKNOT1NEG = "X(1,2,2,1)"
TREFOIL = "X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)"
HOPF = "X(4,1,3,2), X(2,3,1,4)"
FIGURE8 = "X(4,2,5,1), X(8,6,1,5), X(6,3,7,4), X(2,7,3,8)"


@pytest.fixture(scope="module")
def trefoil():
    return parse_pd(TREFOIL)


@pytest.fixture(scope="module")
def trefoil_kh(trefoil):
    return build_ckh(trefoil)


def test_unknot_with_two_points():
    d = parse_pd(UNKNOT1NEG)
    points = parse_basepoints(d, "1,2")
    ranks = rank_table(d, points, INTEGERS)
    assert ranks.as_plain() == {(0, -1): 1, (1, 1): 1, (1, 3): 1, (2, 5): 1}


@pytest.mark.parametrize("k", [1, 2, 3])
def test_unlink_with_one_point_per_circle(k):
    d = unlink_diagram(k)
    points = autofill_basepoints(d)
    P = build_pointed(d, points)
    assert P.dim == 4 ** k
    assert homology(P, RATIONALS).total_rank() == 2 ** k


def test_gradings_shift_with_the_wedge_degree():
    d = parse_pd(UNKNOT1NEG)
    P = build_pointed(d, parse_basepoints(d, "1,2"))
    for i, (h, q) in enumerate(P.gradings):
        u, j = P.split_index(i)
        kh, kq = P.kh.gradings[j]
        k = bin(u).count("1")
        assert (h, q) == (kh + k, kq + 2 * k)
    assert P.index(*P.split_index(7)) == 7


def test_actions_have_the_right_bigrading():
    d = parse_pd(UNKNOT1NEG)
    P = build_pointed(d, parse_basepoints(d, "1,2"))
    for i in range(P.m):
        for (r, c), _ in lambda_action(P, i).entries():
            assert (P.gradings[r][0] - P.gradings[c][0], P.gradings[r][1] - P.gradings[c][1]) == (1, 2)
        for (r, c), _ in zeta_action(P, i).entries():
            assert (P.gradings[r][0] - P.gradings[c][0], P.gradings[r][1] - P.gradings[c][1]) == (-1, -4)


@pytest.mark.parametrize("pd, points", [
    (UNKNOT1NEG, "1,2"),
    (HOPF, "1,3"),
    (TREFOIL, "1,4"),
])
def test_module_identities(pd, points):
    d = parse_pd(pd)
    results = check_module_identities(build_pointed(d, parse_basepoints(d, points)))
    assert results
    assert all(results.values())


def test_transport_homotopy_at_every_crossing(trefoil, trefoil_kh):
    for c in trefoil.crossings:
        for p in range(4):
            if trefoil.edges[c.edges[p]].head == (c.index, p):
                H = transport_homotopy(trefoil_kh, c.index, c.edges[p], c.edges[(p + 2) % 4])
                assert H.shape == (trefoil_kh.dim, trefoil_kh.dim)


def test_transport_needs_a_strand(trefoil, trefoil_kh):
    c = trefoil.crossings[0]
    with pytest.raises(NotAdjacent):
        transport_homotopy(trefoil_kh, 0, c.edges[0], c.edges[1])


def test_basepoint_move(trefoil):
    P = build_pointed(trefoil, parse_basepoints(trefoil, "1"))
    move = basepoint_move_iso(P, 0, Basepoint(4))
    assert move.target.points[0] == Basepoint(4)
    identity = SparseMatrix.identity(P.dim)
    assert move.matrix @ move.inverse == identity
    assert homology(P, F2).ranks() == homology(move.target, F2).ranks()


def test_basepoint_move_stays_on_the_component():
    d = parse_pd(HOPF)
    P = build_pointed(d, parse_basepoints(d, "1,3"))
    with pytest.raises(DifferentComponents):
        basepoint_move_iso(P, 0, Basepoint(4))


def test_loop_chain_map(trefoil_kh):
    M = loop_chain_map(trefoil_kh, 1)
    assert M.shape == (trefoil_kh.dim, trefoil_kh.dim)
    free = build_ckh(unlink_diagram(1))
    assert loop_chain_map(free, 1).is_zero()


@pytest.mark.parametrize("pd, points", [
    (UNKNOT1NEG, "1,2"),
    (HOPF, "1,3"),
    ("", ""),
])
def test_recover_khovanov(pd, points):
    d = parse_pd(pd, 0 if pd else 1)
    P = build_pointed(d, parse_basepoints(d, points))
    iso = recover_khovanov(P)
    assert iso @ iso == SparseMatrix.identity(P.kh.dim)


def test_doubling_witness():
    d = parse_pd(UNKNOT1NEG)
    result = doubling_witness(d, parse_basepoints(d, "1,2"), 0, 1, F2)
    assert result.ok
    assert result.relation == "="
    assert result.left.total() == 4


@pytest.mark.parametrize("ring", [F2, RATIONALS])
@pytest.mark.parametrize("pd, points", [
    (FIGURE8, "1,2"),
    (TREFOIL, "1,4"),
    (HOPF, "1,2"),
])
def test_doubling_on_small_links(pd, points, ring):
    d = parse_pd(pd)
    result = doubling_witness(d, parse_basepoints(d, points), 0, 1, ring)
    assert result.ok
    assert result.left == result.right


def test_doubling_checks_the_kept_point():
    d = parse_pd(HOPF)
    points = parse_basepoints(d, "1,2,3")
    assert doubling_witness(d, points, 1, 0, F2).ok
    with pytest.raises(SameComponentRequired):
        doubling_witness(d, points, 2, 0, F2)


def test_doubling_needs_one_component():
    d = parse_pd(HOPF)
    with pytest.raises(SameComponentRequired):
        doubling_witness(d, parse_basepoints(d, "1,3"), 0, 1, F2)
    with pytest.raises(UsageError):
        doubling_witness(d, parse_basepoints(d, "1"), 0, 0, F2)


@pytest.mark.parametrize("pd, points, free_loops", [
    (HOPF, "1,3", 0),
    ("", "1,2", 2),
])
def test_ses_inequality(pd, points, free_loops):
    d = parse_pd(pd, free_loops)
    assert ses_inequality(d, parse_basepoints(d, points), 1, F2).ok


@pytest.mark.parametrize("pd, points, free_loops, relation", [
    (UNKNOT1NEG, "1,2", 0, "="),
    (TREFOIL, "1", 0, "="),
    (HOPF, "1,3", 0, "<="),
    ("", "1,2", 2, "<="),
])
def test_reduced_relation(pd, points, free_loops, relation):
    d = parse_pd(pd, free_loops)
    result = reduced_relation(d, parse_basepoints(d, points), F2)
    assert result.ok
    assert result.relation == relation


@pytest.mark.parametrize("ring", [F2, RATIONALS])
@pytest.mark.parametrize("pd, points, relation", [
    (FIGURE8, "1", "="),
    (FIGURE8, "1,3", "="),
    (FIGURE8, "1,3,5", "="),
    (TREFOIL, "1", "="),
    (TREFOIL, "1,4", "="),
    (TREFOIL, "1,3,5", "="),
    (HOPF, "1", "="),
    (HOPF, "1,2", "<="),
    (HOPF, "1,2,3", "<="),
])
def test_reduced_relation_on_small_links(pd, points, relation, ring):
    d = parse_pd(pd)
    result = reduced_relation(d, parse_basepoints(d, points), ring)
    assert result.relation == relation
    assert result.ok


def test_reduced_relation_needs_a_field_and_a_point():
    d = parse_pd(UNKNOT1NEG)
    with pytest.raises(UsageError):
        reduced_relation(d, parse_basepoints(d, "1"), INTEGERS)
    with pytest.raises(UsageError):
        reduced_relation(d, parse_basepoints(d, ""), F2)


def test_parities_on_the_kink():
    d = parse_pd(UNKNOT1NEG)
    P = build_pointed(d, parse_basepoints(d, "1,2"))
    assert P.parities == (1, 0)


def test_pointed_differential_on_the_top_generator():
    d = parse_pd(UNKNOT1NEG)
    P = build_pointed(d, parse_basepoints(d, "1,2"))
    assert P.kh.dim == 6
    # y_00 (x) 1 -> d_Kh(1) - y_10 (x) x + y_01 (x) x
    assert P.differential.column(P.index(0, 0)) == {3: -1, 4: -1, P.index(1, 1): -1, P.index(2, 1): 1}


def test_transport_homotopy_on_the_kink():
    d = parse_pd(UNKNOT1NEG)
    K = build_ckh(d)
    c = d.crossings[0]
    edge_in, edge_out = next((c.edges[p], c.edges[(p + 2) % 4]) for p in range(4) if d.edges[c.edges[p]].head == (0, p))
    H = transport_homotopy(K, 0, edge_in, edge_out)
    G = K.differential @ H + H @ K.differential
    s = -1 if edge_parity(d, K.coloring, edge_in) else 1
    cases = set()
    for v, r in K.resolutions.items():
        o = K.offsets[v]
        a, b = r.circle_of_edge[edge_in], r.circle_of_edge[edge_out]
        cases.add(a == b)
        if a == b:
            # 1 -> 2x, x -> 0
            assert G.column(o) == {o + (1 << a): 2 * s}
            assert G.column(o + (1 << a)) == {}
        else:
            # 1 -> x_a + x_b, x_a and x_b -> x_a x_b
            both = o + ((1 << a) | (1 << b))
            assert G.column(o) == {o + (1 << a): s, o + (1 << b): s}
            assert G.column(o + (1 << a)) == {both: s}
            assert G.column(o + (1 << b)) == {both: s}
            assert G.column(both) == {}
    assert cases == {True, False}
