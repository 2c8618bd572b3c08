"""Boundary stiffening: extra edges, pins or sliders that ground a patch."""

from __future__ import annotations

import numpy as np

from ..core import CostError, CostGraph, Embedding, StiffenedStructure, boundary_cycle, edge
from ..rigidity import PebbleGame, perturbed, rigidity_matrix

VARIANTS = ("edges", "pins", "sliders")


class StiffeningError(CostError):
    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class RowSpace:
    """Orthonormal basis of a growing set of constraint rows."""

    def __init__(self, cols: int, rows: np.ndarray | None = None, tol: float = 1e-8):
        self.tol = tol
        self.q = np.zeros((0, cols))
        self.scale = 1.0
        if rows is not None and len(rows):
            _, s, vt = np.linalg.svd(rows, full_matrices=False)
            self.scale = float(s[0]) if len(s) else 1.0
            self.q = vt[s > tol * self.scale]

    @property
    def rank(self) -> int:
        return len(self.q)

    def gain(self, rows: np.ndarray) -> int:
        """Rank increase ``rows`` would bring, without committing."""
        res = rows - (rows @ self.q.T) @ self.q
        s = np.linalg.svd(res, compute_uv=False)
        return int(np.sum(s > self.tol * max(self.scale, 1.0)))

    def add(self, rows: np.ndarray) -> int:
        res = rows - (rows @ self.q.T) @ self.q
        _, s, vt = np.linalg.svd(res, full_matrices=False)
        new = vt[s > self.tol * max(self.scale, 1.0)]
        if len(new):
            new = new - (new @ self.q.T) @ self.q
            new, _ = np.linalg.qr(new.T)
            self.q = np.vstack([self.q, new.T])
        return len(new)


def _check_open(g: CostGraph) -> None:
    if g.dimension != 2:
        raise CostError("stiffen works on bivariate CoSTs; use stiffen_3d")
    if not g.boundary:
        raise CostError("structure has no boundary to stiffen")
    if any(t == "stiffen" for t in g.tags.values()):
        raise CostError("structure is already stiffened")
    deg = g.degree()
    bad = [v for v in sorted(g.boundary) if deg[v] != 2]
    if bad:
        raise CostError(f"boundary vertices {bad[:5]} do not have degree 2")


def stiffen(g: CostGraph, e: Embedding, variant: str = "edges", anchor_choice: str = "deterministic",
            seed: int = 0) -> StiffenedStructure:
    """Ground the boundary of an open planar CoST.

    ``edges`` walks the boundary cycle and adds consecutive-pair edges while
    the (2,3) pebble game accepts them, stopping at ``2|V| - 3``.  ``pins``
    fixes alternating boundary vertices (one slider makes up an odd
    deficit).  ``sliders`` puts every boundary vertex on a random line.
    """
    if variant not in VARIANTS:
        raise CostError(f"unknown variant {variant!r}")
    _check_open(g)
    cycle = boundary_cycle(g, e)
    rng = np.random.default_rng(seed)
    if anchor_choice == "seeded":
        k = int(rng.integers(len(cycle)))
        cycle = cycle[k:] + cycle[:k]
    elif anchor_choice != "deterministic":
        raise CostError(f"unknown anchor choice {anchor_choice!r}")

    out = g.copy()
    if variant == "edges":
        game = PebbleGame(g.n, 2, 3)
        rejected = [x for x in sorted(g.edges) if not game.add_edge(*x)]
        if rejected:
            raise StiffeningError("CoST edges are not independent", rejected)
        target = 2 * g.n - 3
        added, omitted = [], []
        m = len(cycle)
        for i in range(m):
            pair = edge(cycle[i], cycle[(i + 1) % m])
            if pair in out.edges:
                continue
            if len(game.accepted) < target and game.add_edge(*pair):
                added.append(pair)
                out.edges.add(pair)
                out.tags[pair] = "stiffen"
            else:
                omitted.append(pair)
        if len(game.accepted) != target:
            raise StiffeningError(f"reached {len(game.accepted)} independent edges, need {target}", omitted)
        s = StiffenedStructure(out, "edges", added)
        s.notes["omitted"] = " ".join(f"{a}-{b}" for a, b in omitted)
        return s

    space = RowSpace(2 * g.n, rigidity_matrix(g, e))
    target = 2 * g.n
    pins: dict[int, np.ndarray] = {}
    sliders: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    if variant == "pins":
        order = cycle[0::2] + cycle[1::2]
        for v in order:
            need = target - space.rank
            if need == 0:
                break
            rows = np.zeros((2, 2 * g.n))
            rows[0, 2 * v] = rows[1, 2 * v + 1] = 1.0
            if need >= 2 and space.gain(rows) == 2:
                space.add(rows)
                pins[v] = e.positions[v].copy()
        if target - space.rank == 1:
            for v in order:
                if v in pins:
                    continue
                d = _direction(rng)
                row = np.zeros((1, 2 * g.n))
                row[0, 2 * v:2 * v + 2] = [-d[1], d[0]]
                if space.add(row):
                    sliders[v] = (e.positions[v].copy(), d)
                    break
    else:
        for v in cycle:
            if space.rank == target:
                break
            d = _direction(rng)
            row = np.zeros((1, 2 * g.n))
            row[0, 2 * v:2 * v + 2] = [-d[1], d[0]]
            if space.add(row):
                sliders[v] = (e.positions[v].copy(), d)
    if space.rank != target:
        raise StiffeningError(f"grounded rank {space.rank} short of {target}")
    s = StiffenedStructure(out, variant, [], pins, sliders)
    s.notes["constraints"] = str(2 * len(pins) + len(sliders))
    return s


GENERIC_AMPLITUDE = 0.05  # relative to the median bar


def _direction(rng: np.random.Generator) -> np.ndarray:
    a = rng.uniform(0, np.pi)
    return np.array([np.cos(a), np.sin(a)])


def stiffen_3d(g: CostGraph, e: Embedding, seed: int = 0, reach: float = 2.0) -> StiffenedStructure:
    """Greedily add boundary edges that raise the rank until ``3|V| - 6``.

    Candidates are non-adjacent boundary pairs no farther apart than
    ``reach`` times the median bar, taken layer by layer, then by length.
    Ranks are measured on a seeded generic perturbation of ``e``.
    """
    if g.dimension != 3:
        raise CostError("stiffen_3d needs a trivariate CoST")
    if not g.boundary or e.period is not None:
        raise CostError("stiffen_3d needs an open structure with boundary")
    rng = np.random.default_rng(seed)
    bars = float(np.median([e.length(u, v) for u, v in g.edges]))
    # a visible perturbation keeps near-dependent rows from passing as independent
    ep = perturbed(e, rng, GENERIC_AMPLITUDE * bars)
    R = rigidity_matrix(g, ep)
    space = RowSpace(3 * g.n, R, tol=1e-6)
    target = 3 * g.n - 6
    out = g.copy()
    added = []
    if space.rank < target:
        layer_of = {}
        for i, layer in enumerate(g.layers or [list(range(g.n))]):
            for v in layer:
                layer_of[v] = i
        bnd = sorted(g.boundary)
        cands = []
        for i, u in enumerate(bnd):
            for v in bnd[i + 1:]:
                if (u, v) in g.edges:
                    continue
                ln = e.length(u, v)
                if ln <= reach * bars:
                    cands.append((min(layer_of.get(u, 0), layer_of.get(v, 0)), round(ln, 9), u, v))
        cands.sort()
        rows = np.zeros((len(cands), 3 * g.n))
        for k, (_, _, u, v) in enumerate(cands):
            diff = ep.positions[u] - ep.positions[v]
            diff = diff / np.linalg.norm(diff)
            rows[k, 3 * u:3 * u + 3] = diff
            rows[k, 3 * v:3 * v + 3] = -diff
        free = list(range(len(cands)))
        while space.rank < target and free:
            # best-conditioned candidate next; argmax keeps the earliest on ties
            res = rows[free] - (rows[free] @ space.q.T) @ space.q
            norms = np.linalg.norm(res, axis=1)
            k = int(np.argmax(norms))
            if norms[k] <= space.tol:
                break
            _, _, u, v = cands[free.pop(k)]
            space.add(res[[k]] / norms[k])
            added.append((u, v))
            out.edges.add((u, v))
            out.tags[(u, v)] = "stiffen"
    if space.rank != target:
        raise StiffeningError(f"boundary edges reach rank {space.rank}, need {target}")
    return StiffenedStructure(out, "edges", added)
