import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costkit import CostError, apply_map, balance_check, kagome_2d, kagome_3d, unit_distance_check, validate_cost
from costkit.core import BLUE
from costkit.generators import FoliationSpec, foliate


def grid_counts(r, c):
    # triangular grid parallelogram: faces, edges, hull edges
    return 2 * r * c, 3 * r * c + r + c, 2 * (r + c)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6))
def test_open_kagome_counts(r, c):
    g, e = kagome_2d(r, c)
    faces, edges, hull = grid_counts(r, c)
    assert g.counts() == (edges, 3 * faces, faces)
    assert len(g.boundary) == hull
    assert validate_cost(g) == []
    assert unit_distance_check(g, e, [0.5])[0]


@pytest.mark.parametrize("r,c", [(2, 2), (2, 3), (4, 3)])
def test_toroidal_kagome_counts(r, c):
    g, e = kagome_2d(r, c, topology="toroidal")
    assert g.counts() == (3 * r * c, 6 * r * c, 2 * r * c)
    assert not g.boundary
    assert np.all(g.degree() == 4)
    assert all(balance_check(g, e).values())


def test_toroidal_needs_two_cells():
    with pytest.raises(CostError):
        kagome_2d(1, 3, topology="toroidal")


def test_edge_length_scales():
    g, e = kagome_2d(2, 2, edge_length=3.0)
    assert unit_distance_check(g, e, [1.5])[0]


def test_up_faces_blue():
    g, e = kagome_2d(2, 2)
    for i, s in enumerate(g.witness):
        y = e.positions[list(s), 1]
        # the medial triangle of an up face has one low corner (base midpoint)
        up = np.sum(np.isclose(y, y.min())) == 1
        assert (g.coloring[i] == BLUE) == up


@pytest.mark.parametrize("shape", [(1, 1, 2), (2, 2, 2), (2, 3, 3), (3, 3, 4)])
def test_kagome_3d_structure(shape):
    r, c, L = shape
    g, e = kagome_3d(*shape)
    assert validate_cost(g) == []
    w = 2 * r * c * (L - 1)
    assert len(g.witness) == w
    assert len(g.edges) == 6 * w
    # each vertex lies in one or two tetrahedra
    assert 4 * w == 2 * g.n - len(g.boundary)
    assert unit_distance_check(g, e, [0.5])[0]
    assert len(g.layers) == 2 * L - 1


def test_kagome_3d_tetrahedra_regular():
    g, e = kagome_3d(2, 2, 3)
    vol = math.sqrt(2) / 12 * 0.5 ** 3
    for s in g.witness:
        d = np.array([e.displacement(s[0], v) for v in s[1:]])
        assert abs(abs(np.linalg.det(d)) / 6 - vol) < 1e-12


def test_kagome_3d_skin_tags():
    g, _ = kagome_3d(2, 2, 2, keep_skin=True)
    plain, _ = kagome_3d(2, 2, 2)
    assert len(g.edges) > len(plain.edges)
    assert set(g.tags.values()) == {"skin"}


def test_kagome_3d_toroidal():
    g, e = kagome_3d(2, 2, 3, topology="toroidal")
    assert validate_cost(g) == []
    assert e.period is not None and e.period.shape == (2, 3)
    # only the top and bottom layers are open
    assert all(g.degree()[v] == 6 for v in range(g.n) if v not in g.boundary)


def test_foliation_color_mismatch():
    a = kagome_2d(1, 1)
    b = kagome_2d(2, 1)
    with pytest.raises(CostError):
        foliate([(*a, a[0].coloring), (*b, b[0].coloring)], FoliationSpec(2, 0.2))


def test_affine_map_linear():
    _, e = kagome_2d(2, 2)
    A = np.array([[2.0, 1.0], [0.0, 1.0]])
    out = apply_map(e, "affine", A, [1, 2])
    assert np.allclose(out.positions, e.positions @ A.T + [1, 2])


def test_sphere_octant_lands_on_ball():
    _, e = kagome_3d(2, 2, 2)
    out = apply_map(e, "sphere-octant", fit=True)
    r = np.linalg.norm(out.positions, axis=1)
    assert np.all(r <= 1 + 1e-12)
    assert np.all(out.positions >= 0)


def test_sphere_octant_radius_is_coordinate_sum():
    from costkit import Embedding
    e = Embedding(np.array([[0.2, 0.1, 0.3], [0.0, 0.0, 1.0]]))
    out = apply_map(e, "sphere-octant")
    assert np.allclose(np.linalg.norm(out.positions, axis=1), [0.6, 1.0])


def test_unknown_map():
    _, e = kagome_2d(1, 1)
    with pytest.raises(CostError):
        apply_map(e, "mobius")
