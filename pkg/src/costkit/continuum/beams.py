"""Beam surfaces made of bi-quadratic Bezier patches, their exact enclosed
volume, and triangle-mesh sampling."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..core import CostError, CostGraph, Edge, Embedding, StiffenedStructure, edge

GAUSS_POINTS = 3  # exact for x . (P_u x P_v), degree 5 per parameter


def bernstein2(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.stack([(1 - t) ** 2, 2 * t * (1 - t), t ** 2], axis=-1)


def dbernstein2(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.stack([-2 * (1 - t), 2 - 4 * t, 2 * t], axis=-1)


@dataclass
class PatchSet:
    """Bi-quadratic patches; ``nets[k, i, j]`` is control point (i, j) of patch k.

    ``i`` runs along the u parameter and ``j`` along v; ``P_u x P_v`` points
    out of the enclosed volume.
    """

    nets: np.ndarray
    owner: list[Edge | None] = field(default_factory=list)
    thickness: dict[Edge, float] = field(default_factory=dict)

    def __post_init__(self):
        self.nets = np.asarray(self.nets, dtype=float).reshape(-1, 3, 3, 3)
        if not self.owner:
            self.owner = [None] * len(self.nets)

    def __len__(self) -> int:
        return len(self.nets)

    def __add__(self, other: "PatchSet") -> "PatchSet":
        return PatchSet(np.concatenate([self.nets, other.nets]), self.owner + other.owner,
                        {**self.thickness, **other.thickness})

    def evaluate(self, k: int, u, v) -> np.ndarray:
        return np.einsum("...i,...j,ijc->...c", bernstein2(u), bernstein2(v), self.nets[k])

    def partials(self, k: int, u, v) -> tuple[np.ndarray, np.ndarray]:
        bu, bv = bernstein2(u), bernstein2(v)
        du, dv = dbernstein2(u), dbernstein2(v)
        net = self.nets[k]
        return (np.einsum("...i,...j,ijc->...c", du, bv, net),
                np.einsum("...i,...j,ijc->...c", bu, dv, net))

    def normal(self, k: int, u, v) -> np.ndarray:
        pu, pv = self.partials(k, u, v)
        return np.cross(pu, pv)

    def translated(self, offset) -> "PatchSet":
        return PatchSet(self.nets + np.asarray(offset, dtype=float), list(self.owner), dict(self.thickness))

    def reversed(self) -> "PatchSet":
        return PatchSet(self.nets.transpose(0, 2, 1, 3).copy(), list(self.owner), dict(self.thickness))

    def boundary_curves(self, k: int) -> list[np.ndarray]:
        """The four oriented boundary curves (3 control points each)."""
        n = self.nets[k]
        return [n[:, 0], n[2, :], n[::-1, 2], n[0, ::-1]]

    def open_boundary(self, tol: float = 1e-9) -> list[tuple[int, int]]:
        """(patch, side) pairs whose boundary curve has no reversed partner."""
        scale = max(1.0, float(np.abs(self.nets).max())) if len(self) else 1.0
        q = tol * scale

        def key(c):
            return tuple(np.round(c.ravel() / q).astype(np.int64))

        count: Counter = Counter()
        where: dict = {}
        for k in range(len(self)):
            for s, c in enumerate(self.boundary_curves(k)):
                if np.ptp(c, axis=0).max() <= q:
                    continue  # collapsed to a point
                count[key(c)] += 1
                count[key(c[::-1])] -= 1
                where.setdefault(key(c), (k, s))
        return sorted(where[c] for c, n in count.items() if n > 0 and c in where)

    def is_closed(self, tol: float = 1e-9) -> bool:
        return not self.open_boundary(tol)

    def areas(self, n: int = GAUSS_POINTS) -> np.ndarray:
        x, w = _gauss01(n)
        u, v = np.meshgrid(x, x, indexing="ij")
        ww = np.outer(w, w)
        return np.array([float((np.linalg.norm(self.normal(k, u, v), axis=-1) * ww).sum())
                         for k in range(len(self))])

    def degenerate(self, tol: float = 1e-12) -> list[int]:
        """Patches with (numerically) zero area."""
        scale = max(1.0, float(np.abs(self.nets).max())) if len(self) else 1.0
        return [int(k) for k in np.flatnonzero(self.areas() <= tol * scale * scale)]

    def sample(self, density: int = 8) -> tuple[np.ndarray, np.ndarray]:
        """Triangle mesh with ``density`` intervals per parameter and patch.

        Coincident vertices are merged and zero-area triangles dropped.
        """
        t = np.linspace(0, 1, density + 1)
        u, v = np.meshgrid(t, t, indexing="ij")
        pts, tris = [], []
        m = density + 1
        base = np.arange(m * m).reshape(m, m)
        quad = np.stack([base[:-1, :-1], base[1:, :-1], base[1:, 1:], base[:-1, 1:]], -1).reshape(-1, 4)
        local = np.concatenate([quad[:, [0, 1, 2]], quad[:, [0, 2, 3]]])
        for k in range(len(self)):
            tris.append(local + k * m * m)
            pts.append(self.evaluate(k, u, v).reshape(-1, 3))
        if not pts:
            return np.zeros((0, 3)), np.zeros((0, 3), dtype=int)
        P = np.concatenate(pts)
        F = np.concatenate(tris)
        scale = max(1.0, float(np.abs(P).max()))
        keys = np.round(P / (1e-10 * scale)).astype(np.int64)
        _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
        inv = inv.ravel()
        V = P[first]
        F = inv[F]
        ok = (F[:, 0] != F[:, 1]) & (F[:, 1] != F[:, 2]) & (F[:, 0] != F[:, 2])
        return V, F[ok]

    def to_text(self) -> str:
        """One block per patch: a header line and 9 control points, row-major."""
        lines = [f"patchset {len(self)}"]
        for k, net in enumerate(self.nets):
            o = self.owner[k]
            lines.append(f"patch {k}" + ("" if o is None else f" edge {o[0]} {o[1]}"))
            lines.extend(" ".join(repr(float(c)) for c in p) for p in net.reshape(9, 3))
        return "\n".join(lines) + "\n"


def _gauss01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def beam_volume(p: PatchSet, n: int = GAUSS_POINTS, check: bool = True) -> float:
    """Enclosed volume (1/3) sum of the surface integral of x . n."""
    if n < GAUSS_POINTS:
        raise CostError(f"need at least {GAUSS_POINTS} Gauss points for exactness")
    if check and not p.is_closed():
        raise CostError("patch set is not closed")
    if not len(p):
        return 0.0
    x, w = _gauss01(n)
    bu, du = bernstein2(x), dbernstein2(x)
    N = p.nets
    P = np.einsum("ai,bj,kijc->kabc", bu, bu, N)
    Pu = np.einsum("ai,bj,kijc->kabc", du, bu, N)
    Pv = np.einsum("ai,bj,kijc->kabc", bu, du, N)
    f = np.einsum("kabc,kabc->kab", P, np.cross(Pu, Pv))
    return float(np.einsum("kab,a,b->", f, w, w) / 3)


def mesh_volume(V: np.ndarray, F: np.ndarray) -> float:
    """Signed volume of a closed triangle mesh (sum of origin tetrahedra)."""
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    return float(np.einsum("ij,ij->", a, np.cross(b, c)) / 6)


# --- construction ---------------------------------------------------------------

def profile_arcs(half: float) -> np.ndarray:
    """Four quadratic arcs (4, 3, 2) forming a C1 rounded square.

    The control polygon is the square of side ``2 * half``; arcs run
    counter-clockwise from side midpoint over a corner to the next midpoint.
    """
    mids = half * np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=float)
    corners = half * np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float)
    return np.stack([np.stack([mids[k], corners[k], mids[(k + 1) % 4]]) for k in range(4)])


def profile_area(half: float) -> float:
    """Area enclosed by :func:`profile_arcs`: diamond plus four parabolic segments."""
    return 2 * half ** 2 + 4 * (2 / 3) * (half ** 2 / 2)


def edge_frame(d: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = d / np.linalg.norm(d)
    ref = np.array([0.0, 0.0, 1.0]) if abs(t[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    a = np.cross(ref, t)
    a /= np.linalg.norm(a)
    return a, np.cross(t, a), t


def _ring(center, a, b, arcs) -> np.ndarray:
    return center + arcs[..., :1] * a + arcs[..., 1:] * b  # (4, 3, 3)


def tube_patches(p0, p1, half: float, a=None, b=None) -> np.ndarray:
    """Four patches of a straight rounded tube from ``p0`` to ``p1``."""
    p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
    if a is None:
        a, b, _ = edge_frame(p1 - p0)
    arcs = profile_arcs(half)
    r0, r1 = _ring(p0, a, b, arcs), _ring(p1, a, b, arcs)
    rm = (r0 + r1) / 2
    return np.stack([r0, rm, r1], axis=2)  # (4, 3 along u, 3 along v, 3)


def dome_patches(center, outward, half: float, a, b, height: float | None = None) -> np.ndarray:
    """Four patches closing the tube end at ``center`` with a rounded dome."""
    center, outward = np.asarray(center, float), np.asarray(outward, float)
    h = half if height is None else height
    ring = _ring(center, a, b, profile_arcs(half))
    mid = ring + h * outward
    apex = np.broadcast_to(center + h * outward, ring.shape)
    nets = np.stack([ring, mid, apex], axis=2)
    # keep the patch orientation consistent with the tube: v must run along +t
    if np.dot(outward, np.cross(a, b)) < 0:
        nets = nets[:, :, ::-1]
    return nets


def _thickness_map(g: CostGraph, thickness) -> dict[Edge, float]:
    if isinstance(thickness, dict):
        out = {edge(*k): float(v) for k, v in thickness.items()}
        missing = g.edges - set(out)
        if missing:
            raise CostError(f"no thickness for edges {sorted(missing)[:5]}")
        return out
    return {x: float(thickness) for x in g.edges}


def beam_surface(g: CostGraph | StiffenedStructure, e: Embedding, thickness=0.1) -> PatchSet:
    """Closed beam surfaces for every edge of ``g``.

    ``thickness`` (scalar or edge map) is the side of the square control
    polygon of the cross-section.  Each half-edge is a four-patch tube; both
    halves share the midpoint ring, and each beam end is closed by a four-patch
    dome of height ``thickness / 2`` that reaches into the node.
    """
    if isinstance(g, StiffenedStructure):
        g = g.base
    if e.period is not None:
        raise CostError("beam surfaces need a non-periodic embedding")
    pos = e.lifted(3).positions
    th = _thickness_map(g, thickness)
    shortest = np.full(g.n, np.inf)
    for u, v in g.edges:
        l = float(np.linalg.norm(pos[v] - pos[u]))
        if l == 0:
            raise CostError(f"edge {(u, v)} has zero length")
        shortest[u] = min(shortest[u], l)
        shortest[v] = min(shortest[v], l)
    nets, owner = [], []
    for x in sorted(g.edges):
        u, v = x
        s = th[x]
        if s < 0 or s >= min(shortest[u], shortest[v]) / 2:
            raise CostError(f"thickness {s} on edge {x} must lie in [0, half the shortest incident edge)")
        a, b, t = edge_frame(pos[v] - pos[u])
        m = (pos[u] + pos[v]) / 2
        parts = [tube_patches(pos[u], m, s / 2, a, b), tube_patches(m, pos[v], s / 2, a, b),
                 dome_patches(pos[u], -t, s / 2, a, b), dome_patches(pos[v], t, s / 2, a, b)]
        for p in parts:
            nets.append(p)
            owner.extend([x] * len(p))
    if not nets:
        return PatchSet(np.zeros((0, 3, 3, 3)))
    return PatchSet(np.concatenate(nets), owner, th)


def square_tube(side: float, length: float, origin=(0.0, 0.0, 0.0)) -> PatchSet:
    """Axis-aligned square prism along z with flat caps, as six planar patches."""
    o = np.asarray(origin, float)
    h = side / 2
    c = [np.array([h, -h]), np.array([h, h]), np.array([-h, h]), np.array([-h, -h])]
    nets = []
    for k in range(4):
        p, q = c[k], c[(k + 1) % 4]
        net = np.empty((3, 3, 3))
        for i, s in enumerate((0, 0.5, 1)):
            xy = p + s * (q - p)
            for j, z in enumerate((0, length / 2, length)):
                net[i, j] = [xy[0], xy[1], z]
        nets.append(net)
    for z, flip in ((0.0, True), (length, False)):
        net = np.empty((3, 3, 3))
        for i, x in enumerate((-h, 0, h)):
            for j, y in enumerate((-h, 0, h)):
                net[i, j] = [x, y, z]
        nets.append(net[::-1] if flip else net)
    return PatchSet(np.array(nets) + o)


def seam_tangent_gap(p: PatchSet, k1: int, k2: int, samples: int = 10) -> float:
    """Largest angle (radians) between tangent planes along the u-seam k1|k2.

    Patch ``k1`` at u = 1 must meet patch ``k2`` at u = 0.
    """
    v = np.linspace(0.05, 0.95, samples)
    n1 = p.normal(k1, np.ones_like(v), v)
    n2 = p.normal(k2, np.zeros_like(v), v)
    n1 /= np.linalg.norm(n1, axis=1, keepdims=True)
    n2 /= np.linalg.norm(n2, axis=1, keepdims=True)
    return float(np.max(np.arccos(np.clip(np.einsum("ij,ij->i", n1, n2), -1, 1))))
