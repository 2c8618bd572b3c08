"""Local re-realization: move a few vertices so bars approach target lengths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import CostError, CostGraph, Edge, Embedding, edge


@dataclass
class RealizationResult:
    embedding: Embedding
    iterations: int
    residual: float  # max |length - target| over the constrained edges
    converged: bool
    diverged: bool = False


def rerealize_local(g: CostGraph, e: Embedding, region, target_lengths: dict[Edge, float] | None = None,
                    max_iters: int = 100, tol: float = 1e-10, patience: int = 10) -> RealizationResult:
    """Gauss-Newton on squared-length residuals over the ``region`` vertices.

    Only edges with an endpoint in the region take part; edges missing from
    ``target_lengths`` keep their current length.  If the error fails to
    improve for ``patience`` consecutive steps the best iterate is returned
    with ``diverged`` set.
    """
    region = sorted({int(v) for v in region})
    if not region:
        raise CostError("empty region")
    if any(not 0 <= v < g.n for v in region):
        raise CostError("region vertex out of range")
    targets = {edge(*k): float(t) for k, t in (target_lengths or {}).items()}
    col = {v: i for i, v in enumerate(region)}
    cons = sorted(x for x in g.edges if x[0] in col or x[1] in col)
    if not cons:
        raise CostError("region touches no edges")
    t = np.array([targets.get(x, e.length(*x)) for x in cons])
    d = e.dimension
    pos = e.positions.copy()
    work = Embedding(pos, e.period)

    def lengths() -> np.ndarray:
        return np.array([np.linalg.norm(work.displacement(u, v)) for u, v in cons])

    def error() -> float:
        return float(np.max(np.abs(lengths() - t)))

    err = error()
    best, best_pos, stall = err, pos.copy(), 0
    it = 0
    while err >= tol and it < max_iters:
        it += 1
        J = np.zeros((len(cons), d * len(region)))
        r = np.empty(len(cons))
        for k, (u, v) in enumerate(cons):
            dv = work.displacement(u, v)
            r[k] = dv @ dv - t[k] ** 2
            if v in col:
                J[k, d * col[v]:d * col[v] + d] = 2 * dv
            if u in col:
                J[k, d * col[u]:d * col[u] + d] = -2 * dv
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        pos[region] += step.reshape(-1, d)
        err = error()
        if err < best * (1 - 1e-12):
            best, best_pos, stall = err, pos.copy(), 0
        else:
            stall += 1
            if stall >= patience:
                return RealizationResult(Embedding(best_pos, e.period), it, best, best < tol, True)
    if err > best:
        pos[:] = best_pos
        err = best
    return RealizationResult(Embedding(pos.copy(), e.period), it, err, err < tol)
