"""Diagonal flips on planar CoSTs through their triangulation, random flip
processes, straight channel carving and flip logs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import (CostError, CostGraph, Edge, Embedding, Triangulation, cost_to_triangulation, edge,
                    require_valid, triangulation_to_cost, two_color)


class FlipError(CostError):
    pass


@dataclass(frozen=True)
class FlipRecord:
    removed: Edge
    inserted: Edge
    simplices: tuple[int, int]

    def line(self) -> str:
        return f"flip {self.removed[0]} {self.removed[1]} -> {self.inserted[0]} {self.inserted[1]}"


@dataclass
class FlipLog:
    """Ordered flips in triangulation-vertex ids; replayable."""

    records: list[FlipRecord] = field(default_factory=list)
    seed: int | None = None
    process: str = "manual"

    def __len__(self) -> int:
        return len(self.records)

    def to_text(self) -> str:
        head = [f"# process {self.process}"]
        if self.seed is not None:
            head.append(f"# seed {self.seed}")
        return "\n".join(head + [r.line() for r in self.records]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FlipLog":
        log = cls()
        for no, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[:1] == ["process"] and len(parts) == 2:
                    log.process = parts[1]
                elif parts[:1] == ["seed"] and len(parts) == 2:
                    log.seed = int(parts[1])
                continue
            tok = line.split()
            if len(tok) != 6 or tok[0] != "flip" or tok[3] != "->":
                raise CostError(f"flip log line {no}: expected 'flip U V -> W X', got {raw!r}")
            u, v, w, x = (int(t) for t in (tok[1], tok[2], tok[4], tok[5]))
            log.records.append(FlipRecord(edge(u, v), edge(w, x), (-1, -1)))
        return log

    def reversed(self) -> "FlipLog":
        return FlipLog([FlipRecord(r.inserted, r.removed, r.simplices) for r in reversed(self.records)],
                       self.seed, self.process + "-reversed")


def _cross(o, a, b) -> float:
    return float((a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]))


class FlipState:
    """A CoST kept in lockstep with its triangulation so flips are local.

    Face ``i`` of the triangulation is witness triangle ``i`` of the CoST and
    CoST vertex ``y`` stands for triangulation edge ``tedge[y]``.
    """

    def __init__(self, g: CostGraph, e: Embedding):
        self.t, self.tedge = cost_to_triangulation(g, e)
        self.g = g.copy()
        self.g.coloring = None
        self.pos = e.positions.copy()
        self.pts = self.t.points
        self.faces = [list(f) for f in self.t.faces]
        self.vertex_of = {te: y for y, te in enumerate(self.tedge)}
        self.faces_of: dict[Edge, list[int]] = {te: [] for te in self.tedge}
        for i, f in enumerate(self.faces):
            for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
                self.faces_of[edge(a, b)].append(i)
        self.scale = max(1e-300, float(np.ptp(self.pts, axis=0).max()) if len(self.pts) else 1.0)

    def embedding(self) -> Embedding:
        return Embedding(self.pos.copy())

    def quad(self, te: Edge) -> tuple[int, int, int, int]:
        """(p, q, w, s) with faces (p, q, w) and (q, p, s)."""
        fs = self.faces_of.get(te)
        if fs is None:
            raise FlipError(f"{te} is not a triangulation edge")
        if len(fs) != 2:
            raise FlipError(f"{te} is a boundary edge")
        p, q = te
        w = next(x for x in self.faces[fs[0]] if x not in te)
        s = next(x for x in self.faces[fs[1]] if x not in te)
        if _cross(self.pts[p], self.pts[q], self.pts[w]) < 0:
            w, s = s, w
        return p, q, w, s

    def combinatorial_ok(self, te: Edge) -> bool:
        try:
            p, q, w, s = self.quad(te)
        except FlipError:
            return False
        if edge(w, s) in self.faces_of:
            return False
        v = self.vertex_of
        return (edge(v[edge(p, w)], v[edge(p, s)]) not in self.g.edges
                and edge(v[edge(q, w)], v[edge(q, s)]) not in self.g.edges)

    def convex(self, te: Edge, tol: float = 1e-12) -> bool:
        p, q, w, s = self.quad(te)
        ring = [self.pts[i] for i in (p, s, q, w)]
        eps = tol * self.scale * self.scale
        return all(_cross(ring[i], ring[(i + 1) % 4], ring[(i + 2) % 4]) > eps for i in range(4))

    def admissible(self, te: Edge) -> bool:
        return self.combinatorial_ok(te) and self.convex(te)

    def interior_edges(self) -> list[Edge]:
        return sorted(te for te, fs in self.faces_of.items() if len(fs) == 2)

    def flip(self, te: Edge) -> FlipRecord:
        p, q, w, s = self.quad(te)
        ws = edge(w, s)
        if ws in self.faces_of:
            raise FlipError(f"flipping {te} would duplicate edge {ws}")
        v = self.vertex_of
        y, pw, qw, ps, qs = v[te], v[edge(p, w)], v[edge(q, w)], v[edge(p, s)], v[edge(q, s)]
        add1, add2 = edge(pw, ps), edge(qw, qs)
        if add1 in self.g.edges or add2 in self.g.edges:
            raise FlipError(f"flipping {te} would duplicate a CoST edge")
        f1, f2 = self.faces_of[te]
        if w not in self.faces[f1]:
            f1, f2 = f2, f1
        g = self.g
        g.edges -= {edge(pw, qw), edge(ps, qs)}
        g.edges |= {add1, add2}
        g.witness[f1] = tuple(sorted((y, pw, ps)))
        g.witness[f2] = tuple(sorted((y, qw, qs)))
        self.faces[f1] = [p, s, w] if _cross(self.pts[p], self.pts[s], self.pts[w]) >= 0 else [p, w, s]
        self.faces[f2] = [q, w, s] if _cross(self.pts[q], self.pts[w], self.pts[s]) >= 0 else [q, s, w]
        del self.faces_of[te]
        self.faces_of[ws] = [f1, f2]
        self.faces_of[edge(q, w)] = [f2 if i == f1 else i for i in self.faces_of[edge(q, w)]]
        self.faces_of[edge(p, s)] = [f1 if i == f2 else i for i in self.faces_of[edge(p, s)]]
        del v[te]
        v[ws] = y
        self.tedge[y] = ws
        self.pos[y] = (self.pts[w] + self.pts[s]) / 2
        return FlipRecord(te, ws, (f1, f2))

    def midpoint(self, te: Edge) -> np.ndarray:
        return (self.pts[te[0]] + self.pts[te[1]]) / 2


def triangulation_of(g: CostGraph, e: Embedding) -> Triangulation:
    return cost_to_triangulation(g, e)[0]


def diagonal_flip(g: CostGraph, e: Embedding, te: Edge) -> tuple[CostGraph, Embedding, FlipLog]:
    """Flip triangulation edge ``te`` (ids from :func:`cost_to_triangulation`).

    Runs through the triangulation bijection: the triangulation is flipped and
    mapped back; the CoST vertex of the removed edge is reused for the new
    one, so all other ids are unchanged.
    """
    te = edge(*te)
    t, tedge = cost_to_triangulation(g, e)
    ef = t.edge_faces()
    if te not in ef:
        raise FlipError(f"{te} is not a triangulation edge")
    if len(ef[te]) != 2:
        raise FlipError(f"{te} is a boundary edge")
    f1, f2 = ef[te]
    w = next(x for x in t.faces[f1] if x not in te)
    s = next(x for x in t.faces[f2] if x not in te)
    ws = edge(w, s)
    if ws in ef:
        raise FlipError(f"flipping {te} would duplicate edge {ws}")
    p, q = te
    faces = list(t.faces)
    faces[f1] = (w, s, p) if p in t.faces[f1] else (w, s, q)
    faces[f2] = (w, s, q) if p in t.faces[f1] else (w, s, p)
    t2 = Triangulation(faces, t.points)
    g2, e2 = triangulation_to_cost(t2)
    old_id = {x: y for y, x in enumerate(tedge)}
    old_id[ws] = old_id[te]
    relabel = {i: old_id[x] for i, x in enumerate(t2.edges())}
    witness = [tuple(sorted(relabel[v] for v in s_)) for s_ in g2.witness]
    out = g.copy()
    out.coloring = None
    out.witness = witness
    wedges = {edge(relabel[a], relabel[b]) for a, b in g2.edges}
    clash = wedges & set(g.tags)
    if clash:
        raise FlipError(f"flip would duplicate tagged edges {sorted(clash)}")
    out.edges = wedges | set(g.tags)
    pos = e.positions.copy()
    y = old_id[te]
    pos[y] = (t.points[w] + t.points[s]) / 2
    require_valid(out)
    rec = FlipRecord(te, ws, (f1, f2))
    return out, Embedding(pos), FlipLog([rec])


def geometric_flip_admissible(g: CostGraph, e: Embedding, te: Edge, tol: float = 1e-12) -> bool:
    """True iff the two faces on ``te`` form a strictly convex quadrilateral."""
    st = FlipState(g, e)
    te = edge(*te)
    st.quad(te)
    return st.convex(te, tol)


def replay(g: CostGraph, e: Embedding, log: FlipLog) -> tuple[CostGraph, Embedding]:
    st = FlipState(g, e)
    for rec in log.records:
        got = st.flip(rec.removed)
        if got.inserted != rec.inserted:
            raise FlipError(f"replay mismatch: {rec.line()} produced {got.inserted}")
    return st.g, st.embedding()


def random_flips(g: CostGraph, e: Embedding, process: str = "poisson", count: int = 1, seed: int = 0,
                 locality: float = 1.0) -> tuple[CostGraph, Embedding, FlipLog]:
    """Random sequence of geometrically admissible flips.

    ``poisson`` picks uniformly among admissible interior edges; ``markov``
    weights an edge by ``exp(-d / locality)`` with ``d`` the distance from its
    midpoint to the previous flip.
    """
    if process not in ("poisson", "markov"):
        raise CostError(f"unknown process {process!r}")
    if count < 0:
        raise CostError("count must be non-negative")
    if process == "markov" and not locality > 0:
        raise CostError("locality must be positive")
    rng = np.random.default_rng(seed)
    st = FlipState(g, e)
    log = FlipLog(seed=seed, process=process)
    last = None
    for _ in range(count):
        cands = [te for te in st.interior_edges() if st.admissible(te)]
        if not cands:
            break
        if process == "markov" and last is not None:
            d = np.array([np.linalg.norm(st.midpoint(te) - last) for te in cands])
            w = np.exp(-(d - d.min()) / locality)
            te = cands[int(rng.choice(len(cands), p=w / w.sum()))]
        else:
            te = cands[int(rng.integers(len(cands)))]
        rec = st.flip(te)
        last = st.midpoint(rec.inserted)
        log.records.append(rec)
    return st.g, st.embedding(), log


def _proper_cross(a, b, c, d, eps) -> float | None:
    """Parameter along ab where it properly crosses cd, else None."""
    d1, d2 = _cross(a, b, c), _cross(a, b, d)
    d3, d4 = _cross(c, d, a), _cross(c, d, b)
    if (d1 > eps and d2 < -eps or d1 < -eps and d2 > eps) and (d3 > eps and d4 < -eps or d3 < -eps and d4 > eps):
        return d3 / (d3 - d4)
    return None


# lattice directions in units of the shortest triangulation edge
DIRECTIONS = [(1.0, 0.0), (0.5, math.sqrt(3) / 2), (-0.5, math.sqrt(3) / 2),
              (1.5, math.sqrt(3) / 2), (0.0, math.sqrt(3)), (-1.5, math.sqrt(3) / 2)]


def crossed_edges(st: FlipState, a: np.ndarray, b: np.ndarray) -> list[tuple[float, Edge]]:
    eps = 1e-12 * st.scale * st.scale
    hits = []
    for te in st.faces_of:
        t = _proper_cross(a, b, st.pts[te[0]], st.pts[te[1]], eps)
        if t is not None:
            hits.append((t, te))
    return sorted(hits)


def _inside(st: FlipState, x: np.ndarray) -> bool:
    eps = 1e-9 * st.scale
    for f in st.faces:
        a, b, c = (st.pts[i] for i in f)
        if all(_cross(p, q, x) >= -eps * st.scale for p, q in ((a, b), (b, c), (c, a))):
            return True
    return False


def carve_channel(g: CostGraph, e: Embedding, start: int, direction: int, length: int,
                  max_flips: int = 10000) -> tuple[CostGraph, Embedding, FlipLog]:
    """Flip every edge properly crossed by a straight lattice segment.

    The segment starts at triangulation vertex ``start`` and runs ``length``
    steps along ``DIRECTIONS[direction]``, scaled by the shortest edge.
    """
    st = FlipState(g, e)
    if not 0 <= start < len(st.pts):
        raise CostError(f"no triangulation vertex {start}")
    if not 0 <= direction < len(DIRECTIONS):
        raise CostError(f"direction must be in 0..{len(DIRECTIONS) - 1}")
    unit = min(np.linalg.norm(st.pts[a] - st.pts[b]) for a, b in st.faces_of)
    a = st.pts[start]
    b = a + length * unit * np.asarray(DIRECTIONS[direction])
    for frac in np.linspace(0, 1, 4 * max(length, 1) + 1):
        if not _inside(st, a + frac * (b - a)):
            raise CostError("segment exits the patch")
    log = FlipLog(process="channel")
    while True:
        hits = crossed_edges(st, a, b)
        if not hits:
            break
        for _, te in hits:
            if len(st.faces_of[te]) == 2 and st.admissible(te):
                log.records.append(st.flip(te))
                break
        else:
            raise FlipError("no admissible flip along the segment")
        if len(log) > max_flips:
            raise FlipError("channel carving did not terminate")
    return st.g, st.embedding(), log


def nearest_previous_distance(log: FlipLog, points: np.ndarray) -> float:
    """Mean distance from each flip (after the first) to the closest earlier one."""
    mids = [(points[r.removed[0]] + points[r.removed[1]]) / 2 for r in log.records]
    ds = [min(np.linalg.norm(m - p) for p in mids[:i]) for i, m in enumerate(mids) if i]
    return float(np.mean(ds)) if ds else 0.0


# --- trivariate -----------------------------------------------------------------

def diagonal_flip_3d(g: CostGraph, e: Embedding, layer: int, te: Edge,
                     strict_coloring: bool = False) -> tuple[CostGraph, Embedding, FlipLog]:
    """Flip an edge in one Kagome layer of a foliated trivariate CoST.

    The layer's planar structure is read off the tetrahedra (each contributes
    its three in-layer corners).  After the planar flip the apex of each
    removed triangle is re-attached to the new triangle through its shared
    corner.  With ``strict_coloring`` the flip is rejected unless the
    tetrahedra stay 2-colorable.
    """
    if g.dimension != 3 or g.layers is None:
        raise CostError("diagonal_flip_3d needs a foliated trivariate CoST")
    if g.tags:
        raise CostError("flip before stiffening")
    if e.period is not None:
        raise CostError("trivariate flips need an open (non-periodic) embedding")
    if not 0 <= layer < len(g.layers):
        raise CostError(f"no layer {layer}")
    verts = g.layers[layer]
    local = {v: i for i, v in enumerate(verts)}
    tri_of, apex_of = [], []
    for k, tet in enumerate(g.witness):
        inside = [v for v in tet if v in local]
        if len(inside) == 3:
            tri_of.append(k)
            apex_of.append(next(v for v in tet if v not in local))
    if not tri_of:
        raise CostError(f"layer {layer} holds apexes only; pick a Kagome layer")
    tris = [tuple(sorted(local[v] for v in g.witness[k] if v in local)) for k in tri_of]
    sub = CostGraph.from_witness(2, len(verts), tris)
    problems = [v for v in range(len(verts)) if len(sub.membership()[v]) == 0]
    if problems:
        raise CostError(f"layer {layer} is not a full planar CoST (vertices outside every triangle)")
    sub_e = Embedding(e.positions[verts][:, :2])
    try:
        st = FlipState(sub, sub_e)
    except CostError as exc:
        raise CostError(f"layer {layer} is not a planar disk CoST (boundary layers carry only half "
                        f"their triangles): {exc}") from exc
    p, q, w, s = st.quad(edge(*te))
    rec = st.flip(edge(*te))
    f1, f2 = rec.simplices  # new faces (p, s, w) and (q, w, s); old faces held w and s
    out = g.copy()
    removed = {g.witness[tri_of[f1]], g.witness[tri_of[f2]]}
    # the apex of the old face on min(w, s) moves to the new face on min(p, q);
    # this pairing is its own inverse, so flipping back restores the tetrahedra
    to_p = apex_of[f1] if w < s else apex_of[f2]
    to_q = apex_of[f2] if w < s else apex_of[f1]
    for i, apex in ((f1, to_p), (f2, to_q)):
        out.witness[tri_of[i]] = tuple(sorted([verts[v] for v in st.g.witness[i]] + [apex]))
    old_edges = {edge(a, b) for t in removed for a in t for b in t if a < b}
    slots = {tri_of[f1], tri_of[f2]}
    kept = {edge(a, b) for k, t in enumerate(out.witness) if k not in slots for a in t for b in t if a < b}
    new_edges = {edge(a, b) for i in (f1, f2) for t in [out.witness[tri_of[i]]] for a in t for b in t if a < b}
    if new_edges & kept:
        raise FlipError("flip would duplicate an edge of a neighbouring tetrahedron")
    out.edges = (out.edges - old_edges) | new_edges
    out.coloring = None
    require_valid(out)
    try:
        out.coloring = two_color(out)
    except CostError:
        if strict_coloring:
            raise FlipError("flip breaks 2-colorability of the tetrahedra")
        out.metadata["coloring"] = "not 2-colorable"
    pos = e.positions.copy()
    y = verts[st.vertex_of[rec.inserted]]
    pos[y, :2] = st.pos[st.vertex_of[rec.inserted]]
    e2 = Embedding(pos, None if e.period is None else e.period.copy())
    log = FlipLog([FlipRecord(rec.removed, rec.inserted, (tri_of[f1], tri_of[f2]))], process=f"layer{layer}")
    return out, e2, log
