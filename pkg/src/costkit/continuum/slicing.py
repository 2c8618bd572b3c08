"""Plane sections of patch sets by control-net subdivision."""

from __future__ import annotations

import math

import numpy as np

from ..core import CostError
from .beams import PatchSet


def split_u(net: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """de Casteljau split at u = 1/2 (first index)."""
    a, b, c = net[0], net[1], net[2]
    ab, bc = (a + b) / 2, (b + c) / 2
    m = (ab + bc) / 2
    return np.stack([a, ab, m]), np.stack([m, bc, c])


def split_v(net: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = split_u(net.transpose(1, 0, 2))
    return lo.transpose(1, 0, 2), hi.transpose(1, 0, 2)


def flatness(net: np.ndarray) -> float:
    """Largest second difference of the control net along either parameter."""
    du = net[0] - 2 * net[1] + net[2]
    dv = net[:, 0] - 2 * net[:, 1] + net[:, 2]
    return float(max(np.linalg.norm(du, axis=-1).max(), np.linalg.norm(dv, axis=-1).max()))


def depth_for(net: np.ndarray, tol: float) -> int:
    """Uniform subdivision depth bringing the piecewise-bilinear error under ``tol``."""
    f = flatness(net)
    if f <= 4 * tol:
        return 0
    return int(math.ceil(math.log(f / (4 * tol), 4)))


def _edge_point(p, q, dp, dq):
    # canonical endpoint order so shared edges give bit-identical points
    if tuple(q) < tuple(p):
        p, q, dp, dq = q, p, dq, dp
    t = dp / (dp - dq)
    return p + t * (q - p)


def _triangle_cut(tri: np.ndarray, dist: np.ndarray):
    pos = dist >= 0
    if pos.all() or not pos.any():
        return None
    pts = []
    for a, b in ((0, 1), (1, 2), (2, 0)):
        if pos[a] != pos[b]:
            pts.append(_edge_point(tri[a], tri[b], dist[a], dist[b]))
    return pts[0], pts[1]


def _collect(net, point, normal, depth, segs):
    d = (net - point) @ normal
    if d.min() > 0 or d.max() < 0:
        return  # convex hull property: no intersection
    if depth == 0:
        quad = net[[0, 2, 2, 0], [0, 0, 2, 2]]
        dq = (quad - point) @ normal
        for ids in ((0, 1, 2), (0, 2, 3)):
            cut = _triangle_cut(quad[list(ids)], dq[list(ids)])
            if cut is not None:
                segs.append(cut)
        return
    lo, hi = split_u(net)
    for half in (lo, hi):
        a, b = split_v(half)
        _collect(a, point, normal, depth - 1, segs)
        _collect(b, point, normal, depth - 1, segs)


def chain(segments: list[tuple[np.ndarray, np.ndarray]], tol: float) -> list[np.ndarray]:
    """Join segments sharing endpoints into polylines; closed loops repeat
    their first point at the end."""
    if not segments:
        return []
    pts = np.array([p for s in segments for p in s])
    scale = max(1.0, float(np.abs(pts).max()))
    keys = [tuple(np.round(p / (tol * scale)).astype(np.int64)) for p in pts]
    ids: dict = {}
    node = [ids.setdefault(k, len(ids)) for k in keys]
    coords = np.zeros((len(ids), pts.shape[1]))
    coords[node] = pts
    adj: dict[int, list[int]] = {}
    for s in range(len(segments)):
        a, b = node[2 * s], node[2 * s + 1]
        if a == b:
            continue
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen_edges: set = set()
    lines = []
    starts = sorted(adj, key=lambda v: (len(adj[v]) != 1, v))  # open ends first
    for s in starts:
        for nb in adj[s]:
            if (min(s, nb), max(s, nb)) in seen_edges:
                continue
            path = [s]
            prev, cur = s, nb
            seen_edges.add((min(s, nb), max(s, nb)))
            while True:
                path.append(cur)
                nxt = [w for w in adj[cur] if (min(cur, w), max(cur, w)) not in seen_edges]
                if not nxt or cur == s:
                    break
                w = nxt[0]
                seen_edges.add((min(cur, w), max(cur, w)))
                prev, cur = cur, w
            lines.append(coords[path])
    return lines


def slice_plane(p: PatchSet, point, normal, tol: float = 1e-6) -> list[np.ndarray]:
    """Polylines where the plane through ``point`` with ``normal`` cuts ``p``.

    Each patch is subdivided to a uniform depth chosen from its control-net
    flatness so that the bilinear pieces are within ``tol`` of the patch;
    pieces whose control hull misses the plane are pruned.
    """
    n = np.asarray(normal, dtype=float)
    if np.linalg.norm(n) == 0:
        raise CostError("normal must be non-zero")
    n = n / np.linalg.norm(n)
    x0 = np.asarray(point, dtype=float)
    segs: list = []
    for net in p.nets:
        _collect(net, x0, n, depth_for(net, tol), segs)
    return chain(segs, 1e-9)


def polyline_length(pl: np.ndarray) -> float:
    return float(np.linalg.norm(np.diff(pl, axis=0), axis=1).sum())
