"""Combinatorial and numerical rigidity, stiffness and Laplacian quantities."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .core import CostError, CostGraph, Edge, Embedding, StiffenedStructure, simplex_edges

MINIMALLY_RIGID = "minimally rigid"
FLEXIBLE = "flexible"
OVERCONSTRAINED = "overconstrained"
FLEXIBLE_AND_OVERCONSTRAINED = "flexible-and-overconstrained"


def classify(dof: int, stresses: int) -> str:
    if dof == 0:
        return MINIMALLY_RIGID if stresses == 0 else OVERCONSTRAINED
    return FLEXIBLE if stresses == 0 else FLEXIBLE_AND_OVERCONSTRAINED


def _graph_parts(graph) -> tuple[int, list[Edge]]:
    if isinstance(graph, StiffenedStructure):
        graph = graph.base
    if isinstance(graph, tuple):
        n, edges = graph
        return n, list(edges)
    return graph.n, sorted(graph.edges)


# --- pebble game ----------------------------------------------------------------

@dataclass
class SparsityReport:
    k: int
    l: int
    n: int
    m: int
    independent: bool
    minimally_rigid: bool
    free_dof: int
    redundant_edges: list[Edge] = field(default_factory=list)
    rigid_components: list[set[int]] = field(default_factory=list)

    @property
    def classification(self) -> str:
        return classify(self.free_dof, len(self.redundant_edges))


class PebbleGame:
    """Incremental (k, l)-pebble game on a multigraph with ``n`` vertices."""

    def __init__(self, n: int, k: int, l: int):
        if not (k > 0 and 0 <= l < 2 * k):
            raise CostError(f"need 0 <= l < 2k, got k={k}, l={l}")
        self.n, self.k, self.l = n, k, l
        self.pebbles = [k] * n
        self.out: list[list[int]] = [[] for _ in range(n)]
        self.accepted: list[Edge] = []

    def _fetch(self, start: int, blocked: set[int]) -> bool:
        """Move one pebble to ``start`` along a reversed directed path."""
        parent = {start: None}
        stack = [start]
        while stack:
            a = stack.pop()
            for b in self.out[a]:
                if b in parent or b in blocked:
                    continue
                parent[b] = a
                if self.pebbles[b] > 0:
                    self.pebbles[b] -= 1
                    self.pebbles[start] += 1
                    while parent[b] is not None:
                        a = parent[b]
                        self.out[a].remove(b)
                        self.out[b].append(a)
                        b = a
                    return True
                stack.append(b)
        return False

    def _gather(self, u: int, v: int, need: int) -> bool:
        while self.pebbles[u] + self.pebbles[v] < need:
            if self.pebbles[u] < self.k and self._fetch(u, {v}):
                continue
            if self.pebbles[v] < self.k and self._fetch(v, {u}):
                continue
            return False
        return True

    def add_edge(self, u: int, v: int) -> bool:
        """Insert edge (u, v) if it is independent; report acceptance."""
        if u == v:
            raise CostError("pebble game is for loopless graphs")
        if not self._gather(u, v, self.l + 1):
            return False
        src, dst = (u, v) if self.pebbles[u] > 0 else (v, u)
        self.pebbles[src] -= 1
        self.out[src].append(dst)
        self.accepted.append((min(u, v), max(u, v)))
        return True

    def free(self) -> int:
        return sum(self.pebbles) - self.l

    def component_of(self, u: int, v: int) -> set[int]:
        """Vertices rigidly attached to the accepted edge (u, v)."""
        self._gather(u, v, self.l)
        comp = {u, v}
        for w in range(self.n):
            if w in comp:
                continue
            seen, queue, free = {w, u, v}, deque([w]), self.pebbles[w] > 0
            while queue and not free:
                a = queue.popleft()
                for b in self.out[a]:
                    if b not in seen:
                        seen.add(b)
                        free = self.pebbles[b] > 0
                        if free:
                            break
                        queue.append(b)
            if not free:
                comp.add(w)
        return comp


def pebble_game(graph, k: int = 2, l: int = 3, components: bool = False) -> SparsityReport:
    """(k, l)-sparsity via the pebble game; (2, 3) is planar bar-joint rigidity."""
    n, edges = _graph_parts(graph)
    game = PebbleGame(n, k, l)
    redundant = [e for e in edges if not game.add_edge(*e)]
    free = k * n - l - len(game.accepted)
    comps: list[set[int]] = []
    if components:
        for u, v in game.accepted:
            if not any(u in c and v in c for c in comps):
                comps.append(game.component_of(u, v))
    independent = not redundant
    return SparsityReport(k, l, n, len(edges), independent,
                          independent and len(edges) == k * n - l, free, redundant, comps)


def body_bar_pebble(g: CostGraph) -> SparsityReport:
    """Fast trivariate heuristic: tetrahedra as bodies in a (6, 6) game.

    A corner shared by two tetrahedra is a pin, i.e. three parallel bars
    between the bodies; every tagged edge is one bar.
    """
    mem = g.membership()
    bars = []
    for v, m in enumerate(mem):
        if len(m) == 2:
            bars += [(m[0], m[1])] * 3
    for (u, v), _ in sorted(g.tags.items()):
        if mem[u] and mem[v] and mem[u][0] != mem[v][0]:
            bars.append((mem[u][0], mem[v][0]))
    return pebble_game((len(g.witness), bars), 6, 6)


# --- matrices -------------------------------------------------------------------

def _constraints(g):
    if isinstance(g, StiffenedStructure):
        return g.base, g.pins, g.sliders
    return g, {}, {}


def rigidity_matrix(g, e: Embedding, unit: bool = False) -> np.ndarray:
    """Rows: one per bar (sorted), then pin rows, then slider rows.

    Bar rows carry ``p(u) - p(v)`` in u's columns and ``p(v) - p(u)`` in v's
    (half the gradient of the squared length); ``unit`` normalises them.
    """
    base, pins, sliders = _constraints(g)
    n, edges = _graph_parts(base)
    d = e.dimension
    rows = []
    for u, v in edges:
        r = np.zeros(d * n)
        diff = -e.displacement(u, v)
        ln = np.linalg.norm(diff)
        if ln == 0:
            raise CostError(f"bar ({u}, {v}) has coincident endpoints")
        if unit:
            diff = diff / ln
        r[d * u:d * u + d] = diff
        r[d * v:d * v + d] = -diff
        rows.append(r)
    for v in sorted(pins):
        for i in range(d):
            r = np.zeros(d * n)
            r[d * v + i] = 1.0
            rows.append(r)
    for v in sorted(sliders):
        _, direction = sliders[v]
        for normal in _normals(np.asarray(direction, dtype=float)):
            r = np.zeros(d * n)
            r[d * v:d * v + d] = normal
            rows.append(r)
    return np.array(rows).reshape(-1, d * n)


def _normals(direction: np.ndarray) -> list[np.ndarray]:
    direction = direction / np.linalg.norm(direction)
    if len(direction) == 2:
        return [np.array([-direction[1], direction[0]])]
    q, _ = np.linalg.qr(np.column_stack([direction, np.eye(3)]))
    return [q[:, 1], q[:, 2]]


def trivial_motions(e: Embedding, grounded: bool = False) -> np.ndarray:
    """Infinitesimal rigid motions as rows (translations, then rotations)."""
    n, d = e.positions.shape
    if grounded or n == 0:
        return np.zeros((0, n * d))
    basis = []
    for i in range(d):
        t = np.zeros((n, d))
        t[:, i] = 1.0
        basis.append(t.ravel())
    if e.period is None:
        p = e.positions - e.positions.mean(axis=0)
        if d == 2:
            basis.append(np.column_stack([-p[:, 1], p[:, 0]]).ravel())
        else:
            for axis in np.eye(3):
                basis.append(np.cross(axis, p).ravel())
    return np.array(basis)


@dataclass
class RigidityReport:
    rank: int
    rows: int
    cols: int
    nullity: int
    trivial: int
    dof: int
    flex_basis: np.ndarray
    stress_basis: np.ndarray
    singular_values: np.ndarray

    @property
    def stresses(self) -> int:
        return self.rows - self.rank

    @property
    def classification(self) -> str:
        return classify(self.dof, self.stresses)


def numeric_rank(M: np.ndarray, rel_tol: float = 1e-8, trivial: np.ndarray | None = None) -> RigidityReport:
    """Rank, flexes and self-stresses of a constraint matrix via SVD."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows, cols = M.shape
    if rows == 0:
        U, s, Vt = np.zeros((0, 0)), np.zeros(0), np.eye(cols)
    else:
        U, s, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > rel_tol * s[0])) if len(s) and s[0] > 0 else 0
    null = Vt[rank:]
    t_rank = 0
    flex = null
    if trivial is not None and len(trivial):
        tu, ts, tvt = np.linalg.svd(trivial, full_matrices=False)
        q = tvt[ts > 1e-10 * ts[0]]
        t_rank = len(q)
        proj = null - (null @ q.T) @ q
        if len(proj):
            pu, ps, pvt = np.linalg.svd(proj, full_matrices=False)
            flex = pvt[ps > 0.5]
        else:
            flex = proj
    stress = U[:, rank:].T if rows else np.zeros((0, 0))
    nullity = cols - rank
    return RigidityReport(rank, rows, cols, nullity, t_rank, max(nullity - t_rank, 0),
                          flex, stress, s)


def rigidity_report(g, e: Embedding, rel_tol: float = 1e-8) -> RigidityReport:
    grounded = isinstance(g, StiffenedStructure) and g.grounded
    return numeric_rank(rigidity_matrix(g, e), rel_tol, trivial_motions(e, grounded))


def perturbed(e: Embedding, rng: np.random.Generator, amplitude: float = 1e-3) -> Embedding:
    """Copy with uniform noise in ``[-amplitude, amplitude]`` per coordinate."""
    return Embedding(e.positions + rng.uniform(-amplitude, amplitude, e.positions.shape), e.period)


def _edge_values(edges: Iterable[Edge], values, default: float = 1.0) -> np.ndarray:
    edges = list(edges)
    if values is None:
        return np.full(len(edges), default)
    if isinstance(values, Mapping):
        return np.array([values[e] for e in edges], dtype=float)
    return np.full(len(edges), float(values))


def stiffness_matrix(g, e: Embedding, spring_constants=None) -> np.ndarray:
    """``R^T diag(k) R`` with R built from unit bar directions."""
    base, _, _ = _constraints(g)
    k = _edge_values(_graph_parts(base)[1], spring_constants)
    if np.any(k <= 0):
        raise CostError("spring constants must be positive")
    R = rigidity_matrix(base, e, unit=True)
    return R.T @ (k[:, None] * R)


def laplacian(graph, weights=None) -> np.ndarray:
    n, edges = _graph_parts(graph)
    w = _edge_values(edges, weights)
    if np.any(w <= 0):
        raise CostError("weights must be positive")
    L = np.zeros((n, n))
    for (u, v), x in zip(edges, w):
        L[u, u] += x
        L[v, v] += x
        L[u, v] -= x
        L[v, u] -= x
    return L


def effective_resistance(graph, weights, u: int, v: int) -> float:
    """Resistance between u and v with edge conductances ``weights``."""
    n, edges = _graph_parts(graph)
    if u == v:
        return 0.0
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen, queue = {u}, deque([u])
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                queue.append(b)
    if v not in seen:
        raise CostError(f"vertices {u} and {v} lie in different components")
    comp = sorted(seen)
    idx = {x: i for i, x in enumerate(comp)}
    sub = [(idx[a], idx[b]) for a, b in edges if a in idx]
    w = None if weights is None else (
        {(idx[a], idx[b]): weights[(a, b)] for a, b in edges if a in idx}
        if isinstance(weights, Mapping) else weights)
    L = laplacian((len(comp), sub), w)
    keep = [i for i in range(len(comp)) if i != idx[v]]
    rhs = np.zeros(len(comp))
    rhs[idx[u]] = 1.0
    x = np.linalg.solve(L[np.ix_(keep, keep)], rhs[keep])
    return float(x[keep.index(idx[u])])


def bar_sizing(stress: float, length: float, target_stress: float) -> float:
    """Cross-sectional area carrying bar stress ``stress`` at material stress
    ``target_stress``."""
    if target_stress == 0:
        raise CostError("target stress must be nonzero")
    return length * stress / target_stress


def mass_measure(g: CostGraph, e: Embedding | None = None, mode: str = "edge",
                 vertex_mass=None) -> float:
    """Mass carried by the witness simplices.

    ``vertex``: every vertex mass is split evenly over its simplices, so the
    total is the plain sum.  ``edge``: total bar length.  ``face``: triangle
    area (planar) or tetrahedron surface area.  ``volume``: tetrahedron volume.
    """
    if mode == "vertex":
        mass = np.ones(g.n) if vertex_mass is None else np.asarray(vertex_mass, dtype=float)
        mem = g.membership()
        return float(sum(mass[v] / len(mem[v]) for s in g.witness for v in s))
    if e is None:
        raise CostError(f"mode {mode!r} needs an embedding")
    if mode == "edge":
        return float(sum(e.length(u, v) for s in g.witness for u, v in simplex_edges(s)))
    if mode == "face":
        total = 0.0
        for s in g.witness:
            faces = [s] if len(s) == 3 else [tuple(x for x in s if x != o) for o in s]
            for a, b, c in faces:
                ab, ac = e.displacement(a, b), e.displacement(a, c)
                if len(ab) == 2:
                    total += 0.5 * abs(ab[0] * ac[1] - ab[1] * ac[0])
                else:
                    total += 0.5 * float(np.linalg.norm(np.cross(ab, ac)))
        return total
    if mode == "volume":
        if g.dimension != 3:
            raise CostError("volume mode needs tetrahedra")
        return float(sum(abs(np.linalg.det(np.array([e.displacement(s[0], x) for x in s[1:]]))) / 6
                         for s in g.witness))
    raise CostError(f"unknown mass mode {mode!r}")
