import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import Delaunay

from costkit import (CostError, CostGraph, Embedding, RegularGraph, Triangulation, balance_check,
                     cost_to_regular, cost_to_triangulation, kagome_2d, regular_to_cost,
                     triangulation_to_cost, two_color, unit_distance_check, validate_cost)
from costkit.core import NotTwoColorableError, require_valid

from conftest import isomorphic


def test_bowtie_counts(bowtie):
    g, e = bowtie
    assert g.counts() == (5, 6, 2)
    assert validate_cost(g) == []
    assert g.boundary == {0, 1, 3, 4}


def test_interior_vertices_have_degree_four(patch):
    g, _ = patch
    deg = g.degree()
    for v in range(g.n):
        assert deg[v] == (2 if v in g.boundary else 4)


def test_missing_edge_is_reported(bowtie):
    g, _ = bowtie
    h = g.copy()
    h.edges.discard((0, 1))
    kinds = {v.kind for v in validate_cost(h)}
    assert "simplex-edge" in kinds
    with pytest.raises(CostError):
        require_valid(h)


def test_overlapping_simplices_invalid():
    g = CostGraph.from_witness(2, 4, [(0, 1, 2), (1, 2, 3)])
    assert validate_cost(g)


def test_regular_round_trip(patch):
    g, _ = patch
    r = cost_to_regular(g)
    assert r.k == 3
    assert np.all(r.degree() + np.array(r.stubs) == 3)
    back = regular_to_cost(r)
    assert validate_cost(back) == []
    assert isomorphic(g, back)


def test_regular_to_cost_rejects_wrong_degree():
    with pytest.raises(CostError):
        regular_to_cost(RegularGraph(2, [(0, 1)], 3, [1, 2]))


def test_square_triangulation_is_bowtie(bowtie):
    t = Triangulation([(0, 1, 2), (1, 3, 2)], np.array([[0, 0], [1, 0], [0, 1], [1, 1.0]]))
    g, e = triangulation_to_cost(t)
    assert g.counts() == (5, 6, 2)
    assert isomorphic(g, bowtie[0])
    assert np.allclose(e.positions[2], [0.5, 0.5])


def test_triangulation_inverse_recovers_midpoints(patch):
    g, e = patch
    t, mid = cost_to_triangulation(g, e)
    for v, (a, b) in enumerate(mid):
        assert np.allclose(e.positions[v], (t.points[a] + t.points[b]) / 2)
    g2, _ = triangulation_to_cost(t)
    assert isomorphic(g, g2)


def test_periodic_not_planar():
    g, e = kagome_2d(2, 2, topology="toroidal")
    with pytest.raises(CostError):
        cost_to_triangulation(g, e)


def test_balance_matches_boundary(patch):
    g, e = patch
    bal = balance_check(g, e)
    for v in range(g.n):
        if v in g.boundary:
            assert not bal[v]
        else:
            assert bal[v]


def test_balance_3d_tetra_corner():
    dirs = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1.0]])
    # hand-built star: vertex 0 with four bars
    star = CostGraph(3, 5, {(0, 1), (0, 2), (0, 3), (0, 4)}, [(0, 1, 2, 3)])
    e = Embedding(np.vstack([[0, 0, 0], dirs]))
    assert balance_check(star, e)[0]
    e2 = Embedding(np.vstack([[0, 0, 0], dirs[:3], [1, 1, 1.0]]))
    assert not balance_check(star, e2)[0]


def test_unit_distance(patch):
    g, e = patch
    ok, worst = unit_distance_check(g, e, [0.5])
    assert ok and worst[2] < 1e-12
    ok, _ = unit_distance_check(g, e, [1.0])
    assert not ok


def test_two_color_proper(patch):
    g, _ = patch
    c = two_color(g)
    for m in g.membership():
        if len(m) == 2:
            assert c[m[0]] != c[m[1]]


def test_odd_cycle_not_two_colorable():
    # three triangles around a triangular hole pairwise share a corner
    g = CostGraph.from_witness(2, 6, [(0, 1, 2), (2, 3, 4), (4, 5, 0)])
    with pytest.raises(NotTwoColorableError):
        two_color(g)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=4, max_value=40), st.integers(0, 2**32 - 1))
def test_random_triangulation_bijection(k, seed):
    pts = np.random.default_rng(seed).uniform(size=(k, 2))
    tri = Delaunay(pts)
    t = Triangulation([tuple(int(x) for x in s) for s in tri.simplices], pts)
    g, e = triangulation_to_cost(t)
    assert validate_cost(g) == []
    assert g.n == len(t.edges())
    assert len(g.witness) == len(t.faces)
    assert len(g.boundary) == len(tri.convex_hull)
    t2, _ = cost_to_triangulation(g, e)
    assert len(t2.faces) == len(t.faces)
    g2, _ = triangulation_to_cost(t2)
    assert isomorphic(g, g2)
