"""Hierarchical refinement of planar and stacked CoSTs, and rebalancing."""

from __future__ import annotations

import itertools

import numpy as np

from ..core import CostError, CostGraph, Embedding, edge, planar_faces, require_valid, simplex_edges

R0, R1 = "r0", "r1"


def _midpoints(e: Embedding | None, pairs) -> np.ndarray | None:
    if e is None:
        return None
    return np.array([e.positions[u] + e.displacement(u, v) / 2 for u, v in pairs]).reshape(-1, e.dimension)


def _history(g: CostGraph, step: str) -> dict[str, str]:
    meta = dict(g.metadata)
    meta["refinement"] = (meta.get("refinement", "") + " " + step).strip()
    return meta


def refine(g: CostGraph, rule: str = R0, e: Embedding | None = None) -> tuple[CostGraph, Embedding | None]:
    """Split every witness edge at a new vertex and rebuild the witness set.

    ``r0`` joins the three midvertices inside each witness triangle; ``r1``
    instead joins the midvertices around every other face of the planar
    embedding, the outer face included.  Either way the new witness
    triangles are the corners cut off at the old vertices, two per interior
    vertex.  New vertices sit at edge midpoints.
    """
    rule = rule.lower()
    if g.dimension != 2:
        raise CostError("refine is bivariate; use refine_3d")
    if g.tags:
        raise CostError("refine before stiffening or joining (tagged edges present)")
    require_valid(g)
    wedges = sorted(g.edges)
    mid = {pair: g.n + i for i, pair in enumerate(wedges)}
    new_edges = set()
    for (u, v), z in mid.items():
        new_edges.add(edge(u, z))
        new_edges.add(edge(z, v))
    corners = []
    if rule == R0:
        for a, b, c in g.witness:
            zab, zbc, zac = mid[edge(a, b)], mid[edge(b, c)], mid[edge(a, c)]
            new_edges |= {edge(zab, zbc), edge(zbc, zac), edge(zab, zac)}
            corners += [(a, zab, zac), (b, zab, zbc), (c, zac, zbc)]
    elif rule == R1:
        if e is None:
            raise CostError("rule r1 needs a planar embedding to find faces")
        witness_sets = {frozenset(s) for s in g.witness}
        faces, _ = planar_faces(g, e)
        for f in faces:
            if len(f) == 3 and frozenset(f) in witness_sets:
                continue
            k = len(f)
            for i in range(k):
                prev, cur, nxt = f[i - 1], f[i], f[(i + 1) % k]
                zp, zn = mid[edge(prev, cur)], mid[edge(cur, nxt)]
                new_edges.add(edge(zp, zn))
                corners.append((cur, zp, zn))
    else:
        raise CostError(f"unknown rule {rule!r}")
    out = CostGraph.from_witness(2, g.n + len(wedges), corners, metadata=_history(g, rule))
    out.edges |= new_edges
    extra = out.edges - {x for s in out.witness for x in simplex_edges(s)}
    if extra:
        raise CostError(f"refinement produced edges outside the witness set: {sorted(extra)[:3]}")
    pos = None
    if e is not None:
        pos = Embedding(np.vstack([e.positions, _midpoints(e, wedges)]), e.period)
    return out, pos


def rebalance(g: CostGraph, e: Embedding, free_vertices, max_iters: int = 1000,
              tol: float = 1e-10) -> tuple[Embedding, int]:
    """Move each free vertex to the centroid of its neighbours until the
    largest step falls below ``tol``; returns the embedding and the number of
    sweeps taken."""
    adj = g.adjacency()
    free = sorted(set(free_vertices))
    for v in free:
        if len(adj[v]) < 2:
            raise CostError(f"vertex {v} has fewer than two neighbours")
    out = e.copy()
    for it in range(max_iters):
        step = np.zeros((len(free), e.dimension))
        for i, v in enumerate(free):
            step[i] = np.mean([out.displacement(v, w) for w in adj[v]], axis=0)
        out.positions[free] += step
        if len(free) == 0 or np.max(np.linalg.norm(step, axis=1)) < tol:
            return out, it
    return out, max_iters


def refine_3d(g: CostGraph, e: Embedding | None = None, restore_balance: bool = False,
              ) -> tuple[CostGraph, Embedding | None]:
    """Split every tetrahedron edge at its midpoint; four corner tetrahedra
    replace each tetrahedron.  Their edges already span the inner octahedron,
    which is left unfilled."""
    if g.dimension != 3:
        raise CostError("refine_3d needs a trivariate CoST")
    if g.tags:
        raise CostError("refine_3d expects an unstiffened structure without skin edges")
    require_valid(g)
    wedges = sorted(g.edges)
    mid = {pair: g.n + i for i, pair in enumerate(wedges)}
    corners = []
    for t in g.witness:
        for a in t:
            corners.append((a,) + tuple(mid[edge(a, b)] for b in t if b != a))
    out = CostGraph.from_witness(3, g.n + len(wedges), corners, metadata=_history(g, "r0-3d"))
    pos = None
    if e is not None:
        pos = Embedding(np.vstack([e.positions, _midpoints(e, wedges)]), e.period)
        if restore_balance:
            pos, _ = rebalance(out, pos, range(g.n, out.n))
        if g.layers is not None:
            z = np.round(pos.positions[:, 2], 9)
            levels = sorted(set(z))
            out.layers = [[int(v) for v in np.flatnonzero(z == lv)] for lv in levels]
    return out, pos
