import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costkit import CostError, Embedding, kagome_2d, kagome_3d
from costkit.editing.stiffen import stiffen, stiffen_3d
from costkit.rigidity import (FLEXIBLE, MINIMALLY_RIGID, OVERCONSTRAINED, bar_sizing, body_bar_pebble,
                              effective_resistance, laplacian, mass_measure, numeric_rank, pebble_game,
                              perturbed, rigidity_matrix, rigidity_report, stiffness_matrix, trivial_motions)


def laman_independent(n, edges):
    """Brute force: every edge subset on n' vertices has at most 2n' - 3 edges."""
    for k in range(2, len(edges) + 1):
        for sub in itertools.combinations(edges, k):
            verts = {v for e in sub for v in e}
            if len(sub) > 2 * len(verts) - 3:
                return False
    return True


def generic_rank(n, edges, d=2, seed=0):
    e = Embedding(np.random.default_rng(seed).normal(size=(n, d)))
    return numeric_rank(rigidity_matrix((n, edges), e)).rank


def test_triangle_minimally_rigid():
    r = pebble_game((3, [(0, 1), (0, 2), (1, 2)]))
    assert r.minimally_rigid and r.classification == MINIMALLY_RIGID


def test_square_one_dof():
    r = pebble_game((4, [(0, 1), (1, 2), (2, 3), (0, 3)]))
    assert r.free_dof == 1 and r.classification == FLEXIBLE


def test_k4_one_redundant():
    r = pebble_game((4, list(itertools.combinations(range(4), 2))))
    assert len(r.redundant_edges) == 1 and r.classification == OVERCONSTRAINED


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 6), st.data())
def test_pebble_matches_laman_and_rank(n, data):
    pairs = list(itertools.combinations(range(n), 2))
    edges = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=min(len(pairs), 10)))
    r = pebble_game((n, edges))
    assert r.independent == laman_independent(n, edges)
    assert len(edges) - len(r.redundant_edges) == generic_rank(n, edges)


def test_rigid_components_of_two_triangles():
    edges = [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]
    r = pebble_game((5, edges), components=True)
    assert sorted(sorted(c) for c in r.rigid_components) == [[0, 1, 2], [2, 3, 4]]


def test_trivial_motions_dimension():
    _, e2 = kagome_2d(2, 2)
    _, e3 = kagome_3d(2, 2, 2)
    assert np.linalg.matrix_rank(trivial_motions(e2)) == 3
    assert np.linalg.matrix_rank(trivial_motions(e3)) == 6


def test_rigidity_matrix_kills_trivial_motions(patch):
    g, e = patch
    R = rigidity_matrix(g, e)
    assert np.abs(R @ trivial_motions(e).T).max() < 1e-12


def test_k4_stress_in_left_null():
    e = Embedding(np.array([[0, 0], [1, 0], [0, 1], [0.3, 0.4]]))
    rep = rigidity_report((4, list(itertools.combinations(range(4), 2))), e)
    assert rep.stresses == 1 and rep.dof == 0
    R = rigidity_matrix((4, list(itertools.combinations(range(4), 2))), e)
    assert np.abs(rep.stress_basis @ R).max() < 1e-12


def test_flex_of_square_is_nontrivial():
    e = Embedding(np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]]))
    edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
    rep = rigidity_report((4, edges), e)
    assert rep.dof == 1
    flex = rep.flex_basis[0]
    assert np.abs(rigidity_matrix((4, edges), e) @ flex).max() < 1e-12
    t = trivial_motions(e)
    resid = flex - t.T @ np.linalg.lstsq(t.T, flex, rcond=None)[0]
    assert np.linalg.norm(resid) > 0.5


def test_open_kagome_dof_is_boundary_minus_three(patch):
    g, e = patch
    assert pebble_game(g).free_dof == len(g.boundary) - 3
    rep = rigidity_report(g, perturbed(e, np.random.default_rng(1)))
    assert rep.dof == len(g.boundary) - 3


@pytest.mark.parametrize("seed", range(3))
def test_stiffness_nullspace_matches_rigidity(patch, seed):
    g, e = patch
    rng = np.random.default_rng(seed)
    ep = perturbed(e, rng)
    k = {x: float(v) for x, v in zip(sorted(g.edges), rng.uniform(0.5, 2.0, len(g.edges)))}
    K = stiffness_matrix(g, ep, k)
    R = rigidity_matrix(g, ep)
    assert numeric_rank(K).nullity == numeric_rank(R).nullity
    assert np.allclose(K, K.T)


def test_stiffness_rejects_nonpositive(bowtie):
    g, e = bowtie
    with pytest.raises(CostError):
        stiffness_matrix(g, e, 0.0)


def test_body_bar_on_3d():
    g, e = kagome_3d(2, 2, 2)
    assert body_bar_pebble(g).free_dof > 0
    s = stiffen_3d(g, e)
    assert body_bar_pebble(s.base).classification == MINIMALLY_RIGID
    rep = rigidity_report(s, perturbed(e, np.random.default_rng(2), 0.02))
    assert rep.classification == MINIMALLY_RIGID


def test_resistance_series_parallel():
    tri = (3, [(0, 1), (1, 2), (0, 2)])
    sq = (4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert abs(effective_resistance(tri, None, 0, 1) - 2 / 3) < 1e-10
    assert abs(effective_resistance(sq, None, 0, 1) - 3 / 4) < 1e-10
    assert effective_resistance(tri, None, 1, 1) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 12), st.integers(0, 2**32 - 1))
def test_resistance_matches_pseudoinverse(n, seed):
    rng = np.random.default_rng(seed)
    edges = [(i, i + 1) for i in range(n - 1)]
    extra = [p for p in itertools.combinations(range(n), 2) if p not in edges and rng.random() < 0.3]
    edges += extra
    w = rng.uniform(0.5, 3.0, len(edges))
    weights = dict(zip(sorted(edges), w))
    L = laplacian((n, edges), weights)
    Lp = np.linalg.pinv(L)
    u, v = 0, n - 1
    oracle = Lp[u, u] + Lp[v, v] - 2 * Lp[u, v]
    assert abs(effective_resistance((n, edges), weights, u, v) - oracle) < 1e-9


def test_bar_sizing():
    assert bar_sizing(2.0, 3.0, 4.0) == 1.5
    with pytest.raises(CostError):
        bar_sizing(1.0, 1.0, 0.0)


def test_mass_modes():
    r, c = 2, 3
    g, e = kagome_2d(r, c)
    w = 2 * r * c
    assert mass_measure(g, mode="vertex") == pytest.approx(g.n)
    assert mass_measure(g, e, "edge") == pytest.approx(3 * w * 0.5)
    assert mass_measure(g, e, "face") == pytest.approx(w * math.sqrt(3) / 4 * 0.25)
    g3, e3 = kagome_3d(2, 2, 2)
    tet = math.sqrt(2) / 12 * 0.125
    assert mass_measure(g3, e3, "volume") == pytest.approx(len(g3.witness) * tet)
    assert mass_measure(g3, e3, "face") == pytest.approx(len(g3.witness) * 4 * math.sqrt(3) / 4 * 0.25)
    with pytest.raises(CostError):
        mass_measure(g, e, "volume")
    with pytest.raises(CostError):
        mass_measure(g, None, "edge")
