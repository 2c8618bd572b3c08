"""Joining two CoSTs by merging paired boundary vertices."""

from __future__ import annotations

import numpy as np

from ..core import CostError, CostGraph, Embedding, StiffenedStructure, edge, require_valid, two_color


def _plain(x: CostGraph | StiffenedStructure) -> CostGraph:
    g = x.unstiffened() if isinstance(x, StiffenedStructure) else x.copy()
    for e_, tag in list(g.tags.items()):
        if tag == "stiffen":
            g.edges.discard(e_)
            del g.tags[e_]
    return g


def join(a: CostGraph | StiffenedStructure, b: CostGraph | StiffenedStructure,
         pairs: list[tuple[int, int]], ea: Embedding | None = None,
         eb: Embedding | None = None) -> tuple[CostGraph, Embedding | None]:
    """Merge boundary vertex ``u`` of ``a`` with ``v`` of ``b`` for each pair.

    Stiffening is removed first.  Vertices of ``a`` keep their ids; the
    unmerged vertices of ``b`` follow in order.  With both embeddings a merged
    vertex sits at the midpoint of its two originals.
    """
    ga, gb = _plain(a), _plain(b)
    if ga.dimension != gb.dimension:
        raise CostError("cannot join structures of different dimension")
    d = ga.dimension
    dga, dgb = ga.degree(), gb.degree()
    ba = sorted(v for v in ga.boundary if dga[v] == d)
    bb = sorted(v for v in gb.boundary if dgb[v] == d)
    if len(ba) != len(bb):
        raise CostError(f"boundary counts differ: {len(ba)} vs {len(bb)} degree-{d} vertices")
    if not pairs:
        raise CostError("no pairs to merge")
    ua, ub = [u for u, _ in pairs], [v for _, v in pairs]
    if len(set(ua)) != len(ua) or len(set(ub)) != len(ub):
        raise CostError("pairing reuses a vertex")
    sa, sb = set(ba), set(bb)
    for u, v in pairs:
        if u not in sa:
            raise CostError(f"vertex {u} is not a degree-{d} boundary vertex of the first structure")
        if v not in sb:
            raise CostError(f"vertex {v} is not a degree-{d} boundary vertex of the second structure")
    if ga.layers is not None and gb.layers is not None:
        la = {v: i for i, l in enumerate(ga.layers) for v in l}
        lb = {v: i for i, l in enumerate(gb.layers) for v in l}
        if len(ga.layers) != len(gb.layers) or any(la[u] != lb[v] for u, v in pairs):
            raise CostError("unmatched foliations: paired vertices must lie in the same layer")

    merged = dict((v, u) for u, v in pairs)
    idb, nxt = {}, ga.n
    for v in range(gb.n):
        if v in merged:
            idb[v] = merged[v]
        else:
            idb[v] = nxt
            nxt += 1
    edges = set(ga.edges)
    for u, v in gb.edges:
        ne = edge(idb[u], idb[v])
        if ne in edges:
            raise CostError(f"merge creates a double edge {ne}")
        edges.add(ne)
    witness = list(ga.witness) + [tuple(sorted(idb[v] for v in s)) for s in gb.witness]
    tags = dict(ga.tags)
    tags.update({edge(idb[u], idb[v]): t for (u, v), t in gb.tags.items()})
    layers = None
    if ga.layers is not None and gb.layers is not None:
        layers = [sorted(set(l1) | {idb[v] for v in l2}) for l1, l2 in zip(ga.layers, gb.layers)]
    g = CostGraph.from_witness(d, nxt, witness, tags=tags, layers=layers,
                               metadata={"join": f"{len(pairs)} pairs"})
    g.edges = edges
    require_valid(g)
    try:
        g.coloring = two_color(g)
    except CostError:
        g.coloring = None
    e = None
    if ea is not None and eb is not None:
        if ea.period is not None or eb.period is not None:
            raise CostError("joining periodic embeddings is not supported")
        pos = np.zeros((nxt, max(ea.dimension, eb.dimension)))
        pos[:ga.n, :ea.dimension] = ea.positions
        for v in range(gb.n):
            p = np.zeros(pos.shape[1])
            p[:eb.dimension] = eb.positions[v]
            if v in merged:
                pos[idb[v]] = (pos[idb[v]] + p) / 2
            else:
                pos[idb[v]] = p
        e = Embedding(pos)
    return g, e
