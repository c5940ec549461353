import pytest

from diagram import (autofill_basepoints, classify_edge, cube_edges, cube_vertices, parse_basepoints, parse_pd, resolve,
                     unlink_diagram)
from errors import DegenerateResolution
from khovanov import SaddleMap
from unlinkmod import (abstract_gamma_action, abstract_y_action, check_action_linearity, check_edge_map,
                       edge_map_spec, formula_map, induced_map, module_structure, section_independence,
                       structural_homotopies, unlink_complex, wedge, wedge_sign, y_action_matrix)

UNKNOT1NEG = "X(1,2,2,1)"
TREFOIL = "X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)"
HOPF = "X(4,1,3,2), X(2,3,1,4)"


def resolutions(pd, points, free_loops=0):
    d = parse_pd(pd, free_loops)
    p = parse_basepoints(d, points) if points is not None else autofill_basepoints(d)
    return d, {v: resolve(d, v, None, p) for v in cube_vertices(d.n)}


def test_wedge_signs():
    assert wedge_sign(0b01, 0b10) == 1
    assert wedge_sign(0b10, 0b01) == -1
    assert wedge_sign(0b11, 0b01) == 0
    assert wedge({0b10: 1}, {0b01: 1}) == {0b11: -1}
    assert wedge({0b01: 1, 0b10: 1}, {0b01: 1, 0b10: 1}) == {}


def test_unlink_complex_is_a_complex():
    _, rs = resolutions(UNKNOT1NEG, "1,2")
    for r in rs.values():
        C = unlink_complex(r)
        assert C.dim == 2 ** (C.m + C.l)
        assert (C.differential @ C.differential).is_zero()


@pytest.mark.parametrize("pd, points, free_loops", [
    (UNKNOT1NEG, "1,2", 0),
    (HOPF, None, 0),
    (TREFOIL, "1,2,3", 0),
    ("", "1,2,3", 3),
    ("", "1,1:1", 1),
])
def test_module_rank_is_two_to_the_points(pd, points, free_loops):
    _, rs = resolutions(pd, points, free_loops)
    for r in rs.values():
        M = module_structure(r)
        assert M.dim == 2 ** M.m
        assert len(M.sections) == M.k == r.l


def test_single_circle_with_two_points():
    _, rs = resolutions(UNKNOT1NEG, "1,2")
    M = module_structure(rs[(0,)])
    assert (M.k, M.m) == (1, 2)
    assert M.sections == [0]
    assert M.basis == [(0, 0), (2, 0), (0, 1), (2, 1)]
    assert M.gradings == [(1, 3), (2, 5), (0, -1), (1, 1)]
    assert M.reduce({1: 1}) == {2: -1}
    assert M.element({1: 1}, {1: 1}) == {M.index(2, 1): -1}


def test_degenerate_resolution():
    _, rs = resolutions(UNKNOT1NEG, "1")
    module_structure(rs[(0,)])
    with pytest.raises(DegenerateResolution):
        module_structure(rs[(1,)])


@pytest.mark.parametrize("pd, points, free_loops", [
    (UNKNOT1NEG, "1,2", 0),
    (HOPF, None, 0),
    ("", "1,1:1,2", 2),
])
def test_actions_are_the_module_structure(pd, points, free_loops):
    _, rs = resolutions(pd, points, free_loops)
    for r in rs.values():
        M = module_structure(r)
        assert check_action_linearity(M)
        assert section_independence(M)
        homotopies = structural_homotopies(M)
        assert all(homotopies.values())
        for p in range(M.m):
            assert y_action_matrix(M, p) == abstract_y_action(M, p)
            assert (abstract_y_action(M, p) @ abstract_y_action(M, p)).is_zero()
        for i in range(M.k):
            assert (abstract_gamma_action(M, i) @ abstract_gamma_action(M, i)).is_zero()


@pytest.mark.parametrize("pd, points", [
    (UNKNOT1NEG, "1,2"),
    (HOPF, None),
    (TREFOIL, "1,2,3"),
])
def test_edge_maps_match_the_formulas(pd, points):
    d, rs = resolutions(pd, points)
    modules = {v: module_structure(r) for v, r in rs.items()}
    for u, v in cube_edges(d.n):
        saddle = classify_edge(d, u, v, rs[u], rs[v])
        spec = edge_map_spec(saddle)
        chain = SaddleMap(d, rs[u], rs[v], saddle.crossing)
        induced = check_edge_map(spec, modules[u], modules[v], chain)
        assert induced == formula_map(spec, modules[u], modules[v])
        assert induced == induced_map(modules[u], modules[v], chain)
        assert spec.ordering_sign in (1, -1)


def test_edge_map_spec_signs():
    d, rs = resolutions(UNKNOT1NEG, "1,2")
    spec = edge_map_spec(classify_edge(d, (0,), (1,), rs[(0,)], rs[(1,)]))
    assert spec.is_split
    assert (spec.source_circles, spec.target_circles) == ((0,), (0, 1))
    assert spec.ordering_sign == 1


def test_unlink_diagram_has_no_edge_maps():
    d = unlink_diagram(2)
    assert cube_edges(d.n) == []
