import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costkit import CostError, kagome_2d, kagome_3d
from costkit.continuum import (BoxSplineField, boxspline_field, kagome_field, kagome_field_2d, lattice_basis,
                               level_set)
from costkit.continuum.boxspline import kagome_coefficients_2d
from costkit.continuum.levelset import sign_change_cells


def rotate_index(v):
    """Values after a 120 degree turn about site (0, 0) of a periodic grid:
    b1 -> b2 and b2 -> -b1 - b2, i.e. (i, j) -> (-j, i - j)."""
    n = v.shape[0]
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return v[(-j) % n, (i - j) % n]


@pytest.mark.parametrize("dimension,periodic", [(2, True), (2, False), (3, True), (3, False)])
def test_partition_of_unity(dimension, periodic):
    shape = (6,) * dimension if dimension == 2 else (4,) * dimension
    f = boxspline_field(dimension, np.full(shape, 2.5), periodic=periodic)
    level = 4 if dimension == 2 else 4
    v = f.refine(level)
    assert np.abs(v - 2.5).max() < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3), st.booleans())
def test_linearity(seed, a, b, periodic):
    rng = np.random.default_rng(seed)
    c1, c2 = rng.normal(size=(2, 6, 6))
    f = lambda c: boxspline_field(2, c, periodic).refine(3)
    lhs = f(a * c1 + b * c2)
    rhs = a * f(c1) + b * f(c2)
    assert np.abs(lhs - rhs).max() < 1e-13 * (1 + np.abs(rhs).max())


def test_delta_limit_values():
    # the three-direction box spline with doubled directions takes the value
    # 1/2 at its centre and 1/12 at the six lattice neighbours
    c = np.zeros((8, 8))
    c[4, 4] = 1
    f = BoxSplineField(c, lattice_basis(2), periodic=True)
    for level in (4, 6):
        v = f.refine(level)
        s = 2 ** level
        err = 4.0 ** -level
        assert abs(v[4 * s, 4 * s] - 0.5) < err
        for di, dj in ((1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)):
            assert abs(v[(4 + di) * s, (4 + dj) * s] - 1 / 12) < err
        assert abs(v[3 * s, 5 * s]) < 1e-15


def test_linear_reproduction_interior():
    i, j = np.meshgrid(np.arange(12), np.arange(12), indexing="ij")
    f = boxspline_field(2, 2 * i - 3 * j + 1.0)
    v = f.refine(3)
    I, J = np.meshgrid(np.arange(v.shape[0]), np.arange(v.shape[1]), indexing="ij")
    exact = 2 * I / 8 - 3 * J / 8 + 1
    assert np.abs(v - exact)[24:64, 24:64].max() < 1e-12


def test_kagome_coefficients():
    c = kagome_coefficients_2d(2)
    assert c.shape == (4, 4)
    assert c[0, 0] == -1 and c[0, 1] == 1 and c[1, 1] == 1


@pytest.mark.parametrize("level", [4, 5])
def test_kagome_field_symmetric_with_zero_set(level):
    s = kagome_field_2d(3).evaluate(level)
    v = s.values
    assert np.abs(rotate_index(v) - v).max() < 1e-6
    lines = level_set(s, 0.0)
    assert lines
    assert sign_change_cells(s).any()


def test_3d_kagome_field_has_surface():
    g, e = kagome_3d(2, 2, 2)
    f = kagome_field(g, e)
    s = f.evaluate(2)
    assert s.values.min() < 0 < s.values.max()
    V, F = level_set(s, 0.0)
    assert len(V) and len(F)


def test_2d_node_field_positive_at_nodes():
    g, e = kagome_2d(2, 2)
    f = kagome_field(g, e)
    assert f.coefficients.max() == 1 and f.coefficients.min() == -1
    s = f.evaluate(3)
    assert s.points().shape == s.values.shape + (2,)


def test_lattice_basis_shapes():
    b3 = lattice_basis(3, 2.0)
    lengths = np.linalg.norm(b3, axis=1)
    assert np.allclose(lengths, 2.0)
    assert np.allclose(np.linalg.norm(b3[0] - b3[1]), 2.0)
    with pytest.raises(CostError):
        lattice_basis(4)


def test_bad_field():
    with pytest.raises(CostError):
        BoxSplineField(np.zeros((3, 3)), np.zeros((2, 2)))
    with pytest.raises(CostError):
        boxspline_field(3, np.zeros((3, 3)))
    with pytest.raises(CostError):
        boxspline_field(2, np.zeros((3, 3))).refine(-1)
