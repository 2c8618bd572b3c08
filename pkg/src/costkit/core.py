"""Corner-sharing triangle/tetrahedron graphs and their structural bijections.

Vertices are the integers ``0..n-1``.  Edges are stored as sorted pairs.  The
witness set is the list of edge-disjoint simplices (triples in the plane,
quadruples in space) that certifies the corner-sharing property; edges that
belong to no witness simplex must carry a tag (``stiffen``, ``join``, ...).
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

Edge = tuple[int, int]

BLUE = "blue"
GREEN = "green"


class CostError(ValueError):
    """Raised when an input is not a structure the operation accepts."""


class NotTwoColorableError(CostError):
    pass


def edge(u: int, v: int) -> Edge:
    if u == v:
        raise CostError(f"loop at vertex {u}")
    return (u, v) if u < v else (v, u)


def simplex_edges(simplex: Sequence[int]) -> list[Edge]:
    return [edge(a, b) for a, b in itertools.combinations(simplex, 2)]


@dataclass
class CostGraph:
    dimension: int
    n: int
    edges: set[Edge]
    witness: list[tuple[int, ...]]
    boundary: set[int] = field(default_factory=set)
    tags: dict[Edge, str] = field(default_factory=dict)
    coloring: dict[int, str] | None = None
    layers: list[list[int]] | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_witness(cls, dimension: int, n: int, witness: Iterable[Sequence[int]],
                     boundary: Iterable[int] | None = None, **kw) -> "CostGraph":
        """Build a graph whose edges are exactly the witness-simplex edges.

        When ``boundary`` is omitted it is inferred as the vertices lying in a
        single witness simplex.
        """
        simplices = [tuple(sorted(s)) for s in witness]
        edges = {e for s in simplices for e in simplex_edges(s)}
        if boundary is None:
            count = np.zeros(n, dtype=int)
            for s in simplices:
                count[list(s)] += 1
            boundary = {int(v) for v in np.flatnonzero(count == 1)}
        return cls(dimension, n, edges, simplices, set(boundary), **kw)

    @property
    def vertices(self) -> range:
        return range(self.n)

    @property
    def witness_edges(self) -> set[Edge]:
        return {e for e in self.edges if e not in self.tags}

    def copy(self) -> "CostGraph":
        return replace(
            self,
            edges=set(self.edges),
            witness=list(self.witness),
            boundary=set(self.boundary),
            tags=dict(self.tags),
            coloring=None if self.coloring is None else dict(self.coloring),
            layers=None if self.layers is None else [list(x) for x in self.layers],
            metadata=dict(self.metadata),
        )

    def adjacency(self, witness_only: bool = False) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in sorted(self.witness_edges if witness_only else self.edges):
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def degree(self, witness_only: bool = False) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for u, v in (self.witness_edges if witness_only else self.edges):
            deg[u] += 1
            deg[v] += 1
        return deg

    def membership(self) -> list[list[int]]:
        """Witness-simplex indices containing each vertex."""
        mem: list[list[int]] = [[] for _ in range(self.n)]
        for i, s in enumerate(self.witness):
            for v in s:
                mem[v].append(i)
        return mem

    def counts(self) -> tuple[int, int, int]:
        return self.n, len(self.edges), len(self.witness)


@dataclass
class Embedding:
    """Vertex coordinates, optionally on a periodic domain.

    ``period`` holds lattice translation vectors as rows; displacements are
    then taken to the nearest periodic image.
    """

    positions: np.ndarray
    period: np.ndarray | None = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 2:
            raise CostError("positions must be an (n, d) array")
        if not np.all(np.isfinite(self.positions)):
            raise CostError("positions must be finite")
        if self.period is not None:
            self.period = np.atleast_2d(np.asarray(self.period, dtype=float))
            shifts = itertools.product((-1, 0, 1), repeat=len(self.period))
            self._images = np.array([np.asarray(s) @ self.period for s in shifts])

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    def __len__(self) -> int:
        return len(self.positions)

    def copy(self) -> "Embedding":
        return Embedding(self.positions.copy(), None if self.period is None else self.period.copy())

    def displacement(self, u: int, v: int) -> np.ndarray:
        d = self.positions[v] - self.positions[u]
        if self.period is None:
            return d
        cand = d + self._images
        return cand[np.argmin(np.einsum("ij,ij->i", cand, cand))]

    def length(self, u: int, v: int) -> float:
        return float(np.linalg.norm(self.displacement(u, v)))

    def lifted(self, dim: int = 3) -> "Embedding":
        if self.dimension >= dim:
            return self
        pad = np.zeros((len(self), dim - self.dimension))
        period = None
        if self.period is not None:
            period = np.hstack([self.period, np.zeros((len(self.period), dim - self.dimension))])
        return Embedding(np.hstack([self.positions, pad]), period)


@dataclass
class RegularGraph:
    n: int
    edges: list[Edge]
    k: int
    stubs: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.stubs:
            self.stubs = [0] * self.n

    @property
    def vertices(self) -> range:
        return range(self.n)

    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@dataclass
class Triangulation:
    """A triangulated planar patch: faces are vertex triples."""

    faces: list[tuple[int, int, int]]
    points: np.ndarray | None = None

    @property
    def n(self) -> int:
        return 1 + max(max(f) for f in self.faces) if self.faces else 0

    def edges(self) -> list[Edge]:
        return sorted({edge(a, b) for f in self.faces for a, b in itertools.combinations(f, 2)})

    def edge_faces(self) -> dict[Edge, list[int]]:
        out: dict[Edge, list[int]] = defaultdict(list)
        for i, f in enumerate(self.faces):
            for a, b in itertools.combinations(f, 2):
                out[edge(a, b)].append(i)
        return out


@dataclass
class Violation:
    kind: str
    message: str
    ids: tuple = ()

    def __str__(self) -> str:
        return self.message


# --- validation -------------------------------------------------------------

def validate_cost(g: CostGraph) -> list[Violation]:
    """Every violated invariant of ``g``; an empty list means valid."""
    out: list[Violation] = []
    size = g.dimension + 1
    if g.dimension not in (2, 3):
        out.append(Violation("dimension", f"dimension {g.dimension} not in (2, 3)"))
    for u, v in g.edges:
        if not (0 <= u < g.n and 0 <= v < g.n) or u == v:
            out.append(Violation("edge", f"edge ({u}, {v}) is not a pair of distinct vertices", (u, v)))
    owner: dict[Edge, int] = {}
    for i, s in enumerate(g.witness):
        if len(s) != size or len(set(s)) != size:
            out.append(Violation("simplex", f"simplex {i} {s} does not have {size} distinct vertices", (i,)))
            continue
        for e in simplex_edges(s):
            if e not in g.edges:
                out.append(Violation("simplex-edge", f"edge {e} of simplex {i} missing from edges", (i, e)))
            if e in g.tags:
                out.append(Violation("simplex-edge", f"edge {e} of simplex {i} is tagged {g.tags[e]!r}", (i, e)))
            if e in owner:
                out.append(Violation("disjoint", f"simplices {owner[e]} and {i} share edge {e}", (owner[e], i, e)))
            else:
                owner[e] = i
    for e in sorted(g.edges):
        if e not in owner and e not in g.tags:
            out.append(Violation("orphan-edge", f"edge {e} lies in no witness simplex and carries no tag", (e,)))

    mem = g.membership()
    wdeg = np.zeros(g.n, dtype=int)
    for u, v in owner:
        wdeg[u] += 1
        wdeg[v] += 1
    for v in range(g.n):
        k = len(mem[v])
        if v in g.boundary:
            if k != 1:
                out.append(Violation("membership", f"boundary vertex {v} in {k} witness simplices", (v,)))
            elif wdeg[v] != g.dimension:
                out.append(Violation("degree", f"boundary vertex {v} has witness degree {wdeg[v]}", (v,)))
        else:
            if k != 2:
                out.append(Violation("membership", f"vertex {v} in {k} witness simplices", (v,)))
            elif wdeg[v] != 2 * g.dimension:
                out.append(Violation("degree", f"vertex {v} has witness degree {wdeg[v]}", (v,)))
    if g.coloring is not None:
        for v in range(g.n):
            cols = [g.coloring.get(i) for i in mem[v]]
            if len(cols) == 2 and cols[0] == cols[1]:
                out.append(Violation("coloring", f"simplices {mem[v]} share vertex {v} and color {cols[0]}", (v,)))
    return out


def require_valid(g: CostGraph) -> None:
    problems = validate_cost(g)
    if problems:
        raise CostError("invalid CoST: " + "; ".join(map(str, problems[:5])))


# --- regular graph bijection -------------------------------------------------

def cost_to_regular(g: CostGraph) -> RegularGraph:
    require_valid(g)
    edges = []
    stubs = [0] * len(g.witness)
    for v, m in enumerate(g.membership()):
        if len(m) == 2:
            edges.append(edge(*m))
        else:
            stubs[m[0]] += 1
    return RegularGraph(len(g.witness), sorted(edges), g.dimension + 1, stubs)


def regular_to_cost(r: RegularGraph) -> CostGraph:
    if r.k not in (3, 4):
        raise CostError(f"regularity {r.k} not in (3, 4)")
    incident: list[list[int]] = [[] for _ in range(r.n)]
    for i, (u, v) in enumerate(r.edges):
        incident[u].append(i)
        incident[v].append(i)
    nxt = len(r.edges)
    boundary = set()
    for u in range(r.n):
        for _ in range(r.stubs[u]):
            incident[u].append(nxt)
            boundary.add(nxt)
            nxt += 1
    for u in range(r.n):
        if len(incident[u]) != r.k:
            raise CostError(f"vertex {u} has degree {len(incident[u])} including stubs, expected {r.k}")
    return CostGraph.from_witness(r.k - 1, nxt, incident, boundary)


# --- planar embedding helpers -------------------------------------------------

def rotation_system(g: CostGraph, e: Embedding, witness_only: bool = True) -> list[list[int]]:
    """Neighbours of each vertex sorted counter-clockwise by direction."""
    if e.dimension != 2:
        raise CostError("rotation system needs a planar embedding")
    rot = []
    for v, nb in enumerate(g.adjacency(witness_only)):
        ang = [math.atan2(*e.displacement(v, w)[::-1]) for w in nb]
        rot.append([w for _, w in sorted(zip(ang, nb))])
    return rot


def planar_faces(g: CostGraph, e: Embedding, witness_only: bool = True) -> tuple[list[list[int]], list[float]]:
    """Faces of the straight-line embedding with their signed areas.

    Bounded faces come out counter-clockwise (positive area); the outer face of
    an open patch is the one with negative area.
    """
    rot = rotation_system(g, e, witness_only)
    index = [{w: i for i, w in enumerate(r)} for r in rot]
    seen: set[tuple[int, int]] = set()
    faces, areas = [], []
    for u in range(g.n):
        for v in rot[u]:
            if (u, v) in seen:
                continue
            face, start, pos = [], (u, v), np.zeros(2)
            pts = []
            a, b = u, v
            while True:
                seen.add((a, b))
                face.append(a)
                pts.append(pos.copy())
                pos = pos + e.displacement(a, b)
                r = rot[b]
                w = r[(index[b][a] - 1) % len(r)]
                a, b = b, w
                if (a, b) == start:
                    break
            p = np.array(pts)
            area = 0.5 * float(np.sum(p[:, 0] * np.roll(p[:, 1], -1) - np.roll(p[:, 0], -1) * p[:, 1]))
            faces.append(face)
            areas.append(area)
    return faces, areas


def boundary_cycle(g: CostGraph, e: Embedding) -> list[int]:
    """Boundary vertices in the order met walking around the outer face."""
    faces, areas = planar_faces(g, e)
    outer = [f for f, a in zip(faces, areas) if a < 0]
    if len(outer) != 1:
        raise CostError(f"expected one outer face, found {len(outer)}")
    walk = [v for v in outer[0] if v in g.boundary]
    if len(walk) != len(set(walk)) or set(walk) != g.boundary:
        raise CostError("boundary is not a simple cycle")
    return walk


# --- triangulation bijection --------------------------------------------------

def triangulation_to_cost(t: Triangulation) -> tuple[CostGraph, Embedding | None]:
    """Medial structure: one vertex per triangulation edge, one witness
    triangle per face.  Vertex ids follow the sorted edge list of ``t``."""
    for f in t.faces:
        if len(f) != 3 or len(set(f)) != 3:
            raise CostError(f"face {tuple(f)} is not a triangle")
    tedges = t.edges()
    ids = {te: i for i, te in enumerate(tedges)}
    ef = t.edge_faces()
    if any(len(v) > 2 for v in ef.values()):
        raise CostError("triangulation is not a manifold patch")
    witness = [tuple(sorted(ids[edge(a, b)] for a, b in itertools.combinations(f, 2))) for f in t.faces]
    boundary = {ids[te] for te, fs in ef.items() if len(fs) == 1}
    g = CostGraph.from_witness(2, len(tedges), witness, boundary)
    emb = None
    if t.points is not None:
        p = np.asarray(t.points, dtype=float)
        emb = Embedding(np.array([(p[a] + p[b]) / 2 for a, b in tedges]))
    return g, emb


def cost_to_triangulation(g: CostGraph, e: Embedding) -> tuple[Triangulation, list[Edge]]:
    """Inverse of :func:`triangulation_to_cost` for planar bivariate input.

    Returns the triangulation and, for each CoST vertex, the triangulation
    edge it stands for.  Triangulation vertices are numbered by position
    (y, then x) so the numbering survives flips.
    """
    if g.dimension != 2 or e.dimension != 2:
        raise CostError("cost_to_triangulation needs a bivariate CoST with a planar embedding")
    if e.period is not None:
        raise CostError("periodic structures are not planar patches")
    require_valid(g)
    mem = g.membership()
    # corner (simplex, frozenset{x, y}) <-> triangulation vertex
    parent: dict = {}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    def corner(i, x, y):
        c = (i, frozenset((x, y)))
        parent.setdefault(c, c)
        return c

    for i, s in enumerate(g.witness):
        for x, y in itertools.combinations(s, 2):
            corner(i, x, y)
    rot = rotation_system(g, e)
    for y in range(g.n):
        if len(mem[y]) != 2:
            continue
        r = rot[y]
        owner = {w: next(i for i in mem[y] if w in g.witness[i]) for w in r}
        for a, b in zip(r, r[1:] + r[:1]):
            if owner[a] != owner[b]:
                ca, cb = find(corner(owner[a], y, a)), find(corner(owner[b], y, b))
                parent[ca] = cb

    classes: dict = {}
    for c in parent:
        classes.setdefault(find(c), len(classes))
    tedge = []
    for y in range(g.n):
        i = mem[y][0]
        others = [w for w in g.witness[i] if w != y]
        tedge.append(tuple(classes[find(corner(i, y, w))] for w in others))
    faces = []
    for i, s in enumerate(g.witness):
        a, b, c = s
        faces.append(tuple(classes[find(corner(i, x, y))] for x, y in ((a, b), (b, c), (a, c))))

    nt = len(classes)
    # midpoint equations m_y = (p + q) / 2, solved in least squares
    A = np.zeros((g.n, nt))
    for y, (p, q) in enumerate(tedge):
        A[y, p] += 0.5
        A[y, q] += 0.5
    pts = np.linalg.lstsq(A, e.positions, rcond=None)[0]
    order = sorted(range(nt), key=lambda k: (round(pts[k, 1], 9), round(pts[k, 0], 9), k))
    relabel = {old: new for new, old in enumerate(order)}
    pts = pts[order]
    tedge = [edge(relabel[p], relabel[q]) for p, q in tedge]
    faces = [_ccw(tuple(relabel[x] for x in f), pts) for f in faces]
    t = Triangulation(faces, pts)
    if nt - len(set(tedge)) + len(faces) != 1 or len(set(tedge)) != g.n:
        raise CostError("structure is not a planar disk patch")
    return t, tedge


def _ccw(f: tuple[int, int, int], pts: np.ndarray) -> tuple[int, int, int]:
    a, b, c = (pts[i] for i in f)
    cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return f if cross >= 0 else (f[0], f[2], f[1])


# --- geometric checks ---------------------------------------------------------

def _unit_directions(g: CostGraph, e: Embedding, v: int, adj) -> np.ndarray:
    dirs = []
    for w in adj[v]:
        d = e.displacement(v, w)
        n = np.linalg.norm(d)
        if n == 0:
            raise CostError(f"zero-length edge ({v}, {w})")
        dirs.append(d / n)
    return np.array(dirs).reshape(-1, e.dimension)


def balance_check(g: CostGraph, e: Embedding, tol: float = 1e-9) -> dict[int, bool]:
    """Whether the origin lies strictly inside the hull of each vertex's
    unit bar directions."""
    adj = g.adjacency()
    out = {}
    for v in range(g.n):
        dirs = _unit_directions(g, e, v, adj)
        out[v] = _balanced(dirs, tol)
    return out


def _balanced(dirs: np.ndarray, tol: float) -> bool:
    d = dirs.shape[1]
    if len(dirs) <= d:
        return False
    if d == 2:
        ang = np.sort(np.arctan2(dirs[:, 1], dirs[:, 0]))
        gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
        return bool(gaps.max() < np.pi - tol)
    if np.linalg.matrix_rank(dirs, tol=1e-12) < d:
        return False
    # a nonzero normal with every bar on its closed positive side separates
    res = linprog(-dirs.sum(axis=0), A_ub=-dirs, b_ub=np.zeros(len(dirs)),
                  bounds=[(-1, 1)] * d, method="highs")
    return bool(res.status == 0 and -res.fun <= tol)


def unit_distance_check(g: CostGraph, e: Embedding, lengths: Iterable[float],
                        tol: float = 1e-9) -> tuple[bool, tuple[Edge, float, float] | None]:
    """True iff every edge length is within ``tol`` of an allowed length.

    The second item is the worst edge as ``(edge, length, deviation)``.
    """
    allowed = np.asarray(sorted(lengths), dtype=float)
    worst = None
    for u, v in sorted(g.edges):
        ln = e.length(u, v)
        dev = float(np.min(np.abs(allowed - ln))) if len(allowed) else math.inf
        if worst is None or dev > worst[2]:
            worst = ((u, v), ln, dev)
    return (worst is None or worst[2] <= tol), worst


def two_color(g: CostGraph) -> dict[int, str]:
    """Proper 2-coloring of simplices that share a vertex."""
    adj: list[set[int]] = [set() for _ in g.witness]
    for m in g.membership():
        for a, b in itertools.combinations(m, 2):
            adj[a].add(b)
            adj[b].add(a)
    color: dict[int, str] = {}
    for start in range(len(g.witness)):
        if start in color:
            continue
        color[start] = BLUE
        queue = deque([start])
        while queue:
            i = queue.popleft()
            other = GREEN if color[i] == BLUE else BLUE
            for j in sorted(adj[i]):
                if j not in color:
                    color[j] = other
                    queue.append(j)
                elif color[j] == color[i]:
                    raise NotTwoColorableError(f"not 2-colorable: simplices {i} and {j} share a vertex and a parity")
    return color


@dataclass
class StiffenedStructure:
    """A CoST plus the constraints that ground its boundary.

    ``variant`` is ``edges``, ``pins`` or ``sliders``.  Added edges also
    appear in ``base.edges`` with tag ``stiffen``; pins map a vertex to its
    fixed coordinates; sliders map a vertex to ``(anchor, direction)``.
    """

    base: CostGraph
    variant: str
    added_edges: list[Edge] = field(default_factory=list)
    pins: dict[int, np.ndarray] = field(default_factory=dict)
    sliders: dict[int, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)

    @property
    def grounded(self) -> bool:
        return self.variant in ("pins", "sliders")

    def unstiffened(self) -> CostGraph:
        g = self.base.copy()
        for e in self.added_edges:
            g.edges.discard(e)
            g.tags.pop(e, None)
        return g
