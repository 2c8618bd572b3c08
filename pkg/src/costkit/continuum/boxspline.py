"""Box-spline fields on the triangular (2D) and FCC (3D) lattices, evaluated
by subdivision."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import CostError, CostGraph, Embedding

# directions in lattice-index space; each is used twice
DIRECTIONS = {
    2: np.array([[1, 0], [0, 1], [1, 1]]),
    3: np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]),
}


def lattice_basis(dimension: int, spacing: float = 1.0) -> np.ndarray:
    """Rows map index directions to space.

    In 2D the index directions (1,0), (0,1), (1,1) become the three edge
    directions of the triangular grid; in 3D the basis is three edges of a
    regular tetrahedron from one corner, so (1,1,1) is the axis normal to
    the opposite face.
    """
    if dimension == 2:
        return spacing * np.array([[1.0, 0.0], [-0.5, math.sqrt(3) / 2]])
    if dimension == 3:
        s = spacing / math.sqrt(2)
        return s * np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    raise CostError("dimension must be 2 or 3")


def _smooth(c: np.ndarray, d: np.ndarray, periodic: bool) -> np.ndarray:
    """Centered [1, 2, 1] / 4 average along lattice direction ``d``."""
    axes = tuple(range(c.ndim))
    if periodic:
        return (np.roll(c, tuple(d), axes) + 2 * c + np.roll(c, tuple(-d), axes)) / 4
    pad = np.pad(c, 1, mode="edge")
    core = tuple(slice(1, -1) for _ in axes)

    def shifted(s):
        return pad[tuple(slice(1 + k, pad.shape[a] - 1 + k) for a, k in enumerate(s))]

    return (shifted(-d) + 2 * pad[core] + shifted(d)) / 4


def subdivide(c: np.ndarray, directions: np.ndarray, periodic: bool) -> np.ndarray:
    """One subdivision step: upsample by two, then smooth along each direction."""
    dim = c.ndim
    if periodic:
        up = np.zeros(tuple(2 * n for n in c.shape))
        up[tuple(slice(None, None, 2) for _ in range(dim))] = c
    else:
        # pad with replicated values so the boundary behaves like a constant
        # continuation, refine, then cut back to the original extent
        c = np.pad(c, 2, mode="edge")
        up = np.zeros(tuple(2 * n - 1 for n in c.shape))
        up[tuple(slice(None, None, 2) for _ in range(dim))] = c
    up *= 2 ** dim
    for d in directions:  # one [1, 2, 1] pass = the direction taken twice
        up = _smooth(up, d, periodic)
    if not periodic:
        up = up[tuple(slice(4, -4) for _ in range(dim))]
    return up


@dataclass
class BoxSplineField:
    """Coefficients on a lattice; ``basis`` rows map index steps to space."""

    coefficients: np.ndarray
    basis: np.ndarray
    origin: np.ndarray | None = None
    periodic: bool = False

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        self.basis = np.asarray(self.basis, dtype=float)
        d = self.coefficients.ndim
        if d not in (2, 3) or self.basis.shape != (d, d):
            raise CostError("coefficients must be a 2D or 3D grid with a matching basis")
        if abs(np.linalg.det(self.basis)) < 1e-12:
            raise CostError("degenerate lattice basis")
        if not np.all(np.isfinite(self.coefficients)):
            raise CostError("coefficients must be finite")
        if self.origin is None:
            self.origin = np.zeros(d)

    @property
    def dimension(self) -> int:
        return self.coefficients.ndim

    @property
    def directions(self) -> np.ndarray:
        return DIRECTIONS[self.dimension]

    @property
    def degree(self) -> int:
        return 2 * len(self.directions) - self.dimension

    def refine(self, level: int) -> np.ndarray:
        """Refined coefficients; site ``k`` sits at index position ``k / 2**level``."""
        if level < 0:
            raise CostError("level must be non-negative")
        c = self.coefficients
        for _ in range(level):
            c = subdivide(c, self.directions, self.periodic)
        return c

    def sample_points(self, level: int, shape: tuple[int, ...]) -> np.ndarray:
        idx = np.stack(np.meshgrid(*[np.arange(n) for n in shape], indexing="ij"), axis=-1)
        return self.origin + (idx / 2 ** level) @ self.basis

    def evaluate(self, level: int) -> "FieldSamples":
        vals = self.refine(level)
        return FieldSamples(vals, self.basis / 2 ** level, self.origin.copy())


@dataclass
class FieldSamples:
    """Values on a sheared grid: point of index k is ``origin + k @ step``."""

    values: np.ndarray
    step: np.ndarray
    origin: np.ndarray

    def points(self) -> np.ndarray:
        idx = np.stack(np.meshgrid(*[np.arange(n) for n in self.values.shape], indexing="ij"), axis=-1)
        return self.origin + idx @ self.step

    def to_space(self, idx: np.ndarray) -> np.ndarray:
        return self.origin + np.asarray(idx, float) @ self.step


def boxspline_field(dimension: int, coefficients, periodic: bool = False, spacing: float = 1.0,
                    origin=None) -> BoxSplineField:
    c = np.asarray(coefficients, dtype=float)
    if c.ndim != dimension:
        raise CostError(f"expected a {dimension}D coefficient grid")
    return BoxSplineField(c, lattice_basis(dimension, spacing), None if origin is None else np.asarray(origin, float),
                          periodic)


def kagome_coefficients_2d(cells: int) -> np.ndarray:
    """Periodic +-1 grid: Kagome nodes +1, triangular-grid vertices -1.

    The index lattice has half the Kagome cell spacing; sites with both
    indices even are grid vertices (empty), all others are edge midpoints.
    """
    n = 2 * cells
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return np.where((i % 2 == 0) & (j % 2 == 0), -1.0, 1.0)


def kagome_field_2d(cells: int, edge_length: float = 1.0) -> BoxSplineField:
    return BoxSplineField(kagome_coefficients_2d(cells), lattice_basis(2, edge_length / 2), periodic=True)


def node_lattice(g: CostGraph, e: Embedding, pad: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficients +1 at CoST nodes and -1 at empty sites of the node lattice.

    The lattice is spanned by the edges of the first witness simplex; returns
    (coefficients, basis, origin).
    """
    if e.period is not None:
        raise CostError("node_lattice needs a non-periodic embedding")
    d = g.dimension
    pos = e.positions[:, :d]
    s = g.witness[0]
    basis = np.array([pos[s[k]] - pos[s[0]] for k in range(1, d + 1)])
    if abs(np.linalg.det(basis)) < 1e-12:
        raise CostError("first simplex is degenerate")
    idx = np.linalg.solve(basis.T, (pos - pos[s[0]]).T).T
    r = np.round(idx)
    if np.abs(idx - r).max() > 1e-6:
        raise CostError("nodes do not lie on the lattice spanned by one simplex")
    r = r.astype(int)
    lo = r.min(axis=0) - pad
    shape = tuple(r.max(axis=0) - lo + 1 + pad)
    c = -np.ones(shape)
    c[tuple((r - lo).T)] = 1.0
    return c, basis, pos[s[0]] + lo @ basis


def kagome_field(g: CostGraph, e: Embedding, pad: int = 1) -> BoxSplineField:
    c, basis, origin = node_lattice(g, e, pad)
    return BoxSplineField(c, basis, origin, periodic=False)
