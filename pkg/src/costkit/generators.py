"""Seed structures: planar and stacked Kagome CoSTs, and domain maps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import BLUE, GREEN, CostError, CostGraph, Embedding, edge, simplex_edges, two_color

OPEN = "open"
TOROIDAL = "toroidal"


def grid_vectors(edge_length: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Basis of the 3-direction triangular grid (60 degrees apart)."""
    return np.array([edge_length, 0.0]), np.array([edge_length / 2, edge_length * math.sqrt(3) / 2])


def kagome_2d(rows: int, cols: int, edge_length: float = 1.0,
              topology: str = OPEN) -> tuple[CostGraph, Embedding]:
    """Medial structure of a rows x cols parallelogram of the triangular grid.

    Every grid edge becomes a vertex; every grid face a witness triangle.
    Bars therefore have length ``edge_length / 2``.  Witness triangles come
    in cell order, up face before down face, so the up faces get colored blue.
    """
    if rows < 1 or cols < 1:
        raise CostError("rows and cols must be at least 1")
    a1, a2 = grid_vectors(edge_length)
    if topology == TOROIDAL:
        if rows < 2 or cols < 2:
            raise CostError("toroidal Kagome needs rows, cols >= 2")

        def gid(i, j, k):
            return 3 * ((j % rows) * cols + (i % cols)) + k

        pos = np.zeros((3 * rows * cols, 2))
        witness = []
        for j in range(rows):
            for i in range(cols):
                p = i * a1 + j * a2
                pos[gid(i, j, 0)] = p + a1 / 2
                pos[gid(i, j, 1)] = p + a2 / 2
                pos[gid(i, j, 2)] = p + (a1 + a2) / 2
                witness.append((gid(i, j, 0), gid(i, j, 1), gid(i, j, 2)))
                witness.append((gid(i, j, 2), gid(i + 1, j, 1), gid(i, j + 1, 0)))
        g = CostGraph.from_witness(2, len(pos), witness, boundary=set())
        e = Embedding(pos, period=np.array([cols * a1, rows * a2]))
    elif topology == OPEN:
        ids: dict[tuple, int] = {}
        pos_list = []

        def add(key, p):
            ids[key] = len(pos_list)
            pos_list.append(p)

        for j in range(rows + 1):
            for i in range(cols + 1):
                p = i * a1 + j * a2
                if i < cols:
                    add(("h", i, j), p + a1 / 2)
                if j < rows:
                    add(("v", i, j), p + a2 / 2)
                if i < cols and j < rows:
                    add(("d", i, j), p + (a1 + a2) / 2)
        witness = []
        for j in range(rows):
            for i in range(cols):
                witness.append((ids["h", i, j], ids["v", i, j], ids["d", i, j]))
                witness.append((ids["d", i, j], ids["v", i + 1, j], ids["h", i, j + 1]))
        g = CostGraph.from_witness(2, len(pos_list), witness)
        e = Embedding(np.array(pos_list))
    else:
        raise CostError(f"unknown topology {topology!r}")
    g.coloring = two_color(g)
    g.metadata["generator"] = f"kagome2d rows={rows} cols={cols} edge_length={edge_length!r} topology={topology}"
    return g, e


@dataclass
class FoliationSpec:
    """Stacking parameters: layer ``k`` sits at height ``2 * half_spacing * k``
    and is translated in-plane by ``shifts[k]``."""

    layer_count: int
    half_spacing: float
    shifts: list[np.ndarray] = field(default_factory=list)
    keep_skin: bool = False

    def __post_init__(self):
        if self.layer_count < 2:
            raise CostError("a foliation needs at least two layers")
        if not self.half_spacing > 0:
            raise CostError("half spacing must be positive")
        if not self.shifts:
            self.shifts = [np.zeros(2)] * self.layer_count
        if len(self.shifts) != self.layer_count:
            raise CostError("one shift per layer required")


def _centroids(g: CostGraph, e: Embedding, shift, idx: Sequence[int]) -> np.ndarray:
    out = []
    for i in idx:
        s = g.witness[i]
        base = e.positions[s[0]]
        out.append(base + sum(e.displacement(s[0], v) for v in s) / len(s) + shift)
    return np.array(out).reshape(-1, 2)


def foliate(layers: Sequence[tuple[CostGraph, Embedding, dict[int, str]]],
            spec: FoliationSpec) -> tuple[CostGraph, Embedding]:
    """Stack 2-colored planar CoSTs into a trivariate one.

    Across gap ``i`` (between layers ``i`` and ``i+1``) each blue triangle
    (green for odd ``i``) is matched to the translated triangle of the same
    color in the next layer; an apex joined to all six corners is placed
    midway between the two centroids.  Edges of triangles that end up in no
    tetrahedron are dropped, or kept with tag ``skin``.
    """
    if len(layers) != spec.layer_count:
        raise CostError("layer count does not match the foliation spec")
    h = spec.half_spacing
    counts = None
    for g, _, col in layers:
        if g.dimension != 2:
            raise CostError("layers must be bivariate")
        c = (sum(1 for x in col.values() if x == BLUE), sum(1 for x in col.values() if x == GREEN))
        if counts is not None and c != counts:
            raise CostError(f"blue/green counts differ between layers: {counts} vs {c}")
        counts = c

    offsets = np.cumsum([0] + [g.n for g, _, _ in layers])
    n_layer = int(offsets[-1])
    positions = []
    for k, (g, e, _) in enumerate(layers):
        p = e.positions + spec.shifts[k]
        positions.append(np.hstack([p, np.full((g.n, 1), 2 * h * k)]))
    period = layers[0][1].period
    all_edges = [np.hypot(*layers[0][1].displacement(u, v)) for u, v in layers[0][0].edges]
    match_tol = float(np.median(all_edges)) / 10 if all_edges else 0.0
    ref = Embedding(np.zeros((1, 2)), period)

    tets: list[tuple[int, ...]] = []
    apex_pos = []
    apex_layers = []
    used = [set() for _ in layers]
    for i in range(len(layers) - 1):
        color = BLUE if i % 2 == 0 else GREEN
        (g0, e0, c0), (g1, e1, c1) = layers[i], layers[i + 1]
        lo = sorted(k for k, c in c0.items() if c == color)
        hi = sorted(k for k, c in c1.items() if c == color)
        if len(lo) != len(hi):
            raise CostError(f"gap {i}: {len(lo)} vs {len(hi)} {color} triangles")
        clo = _centroids(g0, e0, spec.shifts[i], lo)
        chi = _centroids(g1, e1, spec.shifts[i + 1], hi)
        taken = set()
        ids = []
        for a, ca in zip(lo, clo):
            d = np.array([_periodic_norm(ref, cb - ca) for cb in chi])
            b = int(np.argmin(d))
            if d[b] > match_tol or b in taken:
                raise CostError(f"gap {i}: triangle {a} has no unique partner within {match_tol:g}")
            taken.add(b)
            delta = _periodic_vec(ref, chi[b] - ca)
            ids.append(n_layer + len(apex_pos))
            apex_pos.append(np.append(ca + delta / 2, 2 * h * i + h))
            apex = ids[-1]
            tets.append(tuple(sorted([int(v + offsets[i]) for v in g0.witness[a]] + [apex])))
            tets.append(tuple(sorted([apex] + [int(v + offsets[i + 1]) for v in g1.witness[hi[b]]])))
            used[i].add(a)
            used[i + 1].add(hi[b])
        apex_layers.append(ids)

    n = n_layer + len(apex_pos)
    pos = np.vstack(positions + ([np.array(apex_pos)] if apex_pos else []))
    # vertices covered by no tetrahedron (open-patch rims) are dropped
    covered = sorted({v for t in tets for v in t})
    relabel = {old: new for new, old in enumerate(covered)}
    tets = [tuple(sorted(relabel[v] for v in t)) for t in tets]
    g = CostGraph.from_witness(3, len(covered), tets)
    if spec.keep_skin:
        for k, (gl, _, _) in enumerate(layers):
            for i, s in enumerate(gl.witness):
                if i in used[k]:
                    continue
                for u, v in simplex_edges(s):
                    u, v = int(u + offsets[k]), int(v + offsets[k])
                    if u in relabel and v in relabel:
                        e_ = edge(relabel[u], relabel[v])
                        if e_ not in g.edges:
                            g.edges.add(e_)
                            g.tags[e_] = "skin"
    period3 = None if period is None else np.hstack([period, np.zeros((len(period), 1))])
    layer_ids = []
    for k in range(len(layers)):
        layer_ids.append([relabel[v] for v in range(int(offsets[k]), int(offsets[k + 1])) if v in relabel])
        if k < len(apex_layers):
            layer_ids.append([relabel[v] for v in apex_layers[k]])
    g.layers = layer_ids
    try:
        g.coloring = two_color(g)
    except CostError:
        g.coloring = None
    return g, Embedding(pos[covered], period3)


def _periodic_vec(ref: Embedding, d: np.ndarray) -> np.ndarray:
    if ref.period is None:
        return d
    cand = d + ref._images
    return cand[np.argmin(np.einsum("ij,ij->i", cand, cand))]


def _periodic_norm(ref: Embedding, d: np.ndarray) -> float:
    return float(np.linalg.norm(_periodic_vec(ref, d)))


def kagome_3d(rows: int, cols: int, layers: int, edge_length: float = 1.0,
              topology: str = OPEN, keep_skin: bool = False) -> tuple[CostGraph, Embedding]:
    """Pyrochlore-style stack of Kagome layers with regular tetrahedra.

    Each layer is shifted by a third of the cell diagonal relative to the one
    below so that an up face sits under a down face; the half spacing
    ``(edge_length / 2) * sqrt(2 / 3)`` makes every tetrahedron regular.
    """
    if layers < 2:
        raise CostError("kagome_3d needs at least two layers")
    topo = TOROIDAL if topology in (TOROIDAL, "toroidal-in-plane") else topology
    a1, a2 = grid_vectors(edge_length)
    shift = -(a1 + a2) / 3
    stack = []
    for k in range(layers):
        g, e = kagome_2d(rows, cols, edge_length, topo)
        col = dict(g.coloring)
        if k % 2:
            col = {i: GREEN if c == BLUE else BLUE for i, c in col.items()}
        stack.append((g, e, col))
    h = edge_length / 2 * math.sqrt(2 / 3)
    spec = FoliationSpec(layers, h, [k * shift for k in range(layers)], keep_skin)
    g, e = foliate(stack, spec)
    g.metadata["generator"] = (f"kagome3d rows={rows} cols={cols} layers={layers} "
                               f"edge_length={edge_length!r} topology={topo}")
    return g, e


# --- domain maps --------------------------------------------------------------

MAPS = ("identity", "affine", "sphere-octant")


def apply_map(e: Embedding, name: str, matrix=None, offset=None, fit: bool = False) -> Embedding:
    """Replace positions by their images; the graph is left untouched.

    ``sphere-octant`` sends the unit tetrahedron ``x >= 0, sum(x) <= 1`` onto
    the positive octant of the unit ball by keeping the direction of ``x``
    and using ``sum(x)`` as the radius.  With ``fit`` the embedding is first
    scaled uniformly into the tetrahedron.
    """
    p = e.positions
    if name == "identity":
        return e.copy()
    if name == "affine":
        A = np.eye(e.dimension) if matrix is None else np.asarray(matrix, dtype=float)
        b = np.zeros(e.dimension) if offset is None else np.asarray(offset, dtype=float)
        period = None if e.period is None else e.period @ A.T
        return Embedding(p @ A.T + b, period)
    if name == "sphere-octant":
        if e.period is not None:
            raise CostError("sphere-octant map is not defined on periodic embeddings")
        q = e.lifted(3).positions.copy()
        if fit:
            q = q - q.min(axis=0)
            span = q.max()
            if span > 0:
                q = q / (3 * span * (1 + 1e-12))
        tol = 1e-12
        if np.any(q < -tol) or np.any(q.sum(axis=1) > 1 + tol):
            raise CostError("point outside the unit tetrahedron")
        q = np.clip(q, 0, None)
        r = q.sum(axis=1)
        norm = np.linalg.norm(q, axis=1)
        scale = np.divide(r, norm, out=np.zeros_like(r), where=norm > 0)
        return Embedding(q * scale[:, None])
    raise CostError(f"unknown map {name!r}")
