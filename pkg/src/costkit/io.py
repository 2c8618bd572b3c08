"""Text document format for CoSTs, OBJ export and matrix dumps."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import BLUE, GREEN, CostError, CostGraph, Embedding, StiffenedStructure, edge

FORMAT = "cost-document"
VERSION = 1


class DocumentError(CostError):
    pass


class DocumentSyntaxError(DocumentError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DocumentVersionError(DocumentError):
    pass


class DocumentIntegrityError(DocumentError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class CostDocument:
    graph: CostGraph
    embedding: Embedding | None = None
    variant: str | None = None  # stiffening variant, if any
    pins: dict[int, np.ndarray] = field(default_factory=dict)
    sliders: dict[int, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)

    @classmethod
    def of(cls, x: CostGraph | StiffenedStructure, e: Embedding | None = None) -> "CostDocument":
        if isinstance(x, StiffenedStructure):
            return cls(x.base, e, x.variant, dict(x.pins), dict(x.sliders), dict(x.notes))
        return cls(x, e)

    @property
    def stiffened(self) -> StiffenedStructure | None:
        if self.variant is None:
            return None
        added = sorted(x for x, t in self.graph.tags.items() if t == "stiffen")
        return StiffenedStructure(self.graph, self.variant, added, dict(self.pins), dict(self.sliders),
                                  dict(self.notes))


def _num(x: float) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise DocumentError(f"non-finite coordinate {x}")
    return repr(x + 0.0)  # folds -0.0 into 0.0


def _nums(a) -> str:
    return " ".join(_num(x) for x in np.ravel(a))


def save(doc: CostDocument) -> str:
    """Canonical text: ids ascending, edges lexicographic, keys sorted."""
    g, e = doc.graph, doc.embedding
    out = [f"{FORMAT} {VERSION}", f"dimension {g.dimension}", f"vertices {g.n}"]
    if e is not None:
        if len(e.positions) != g.n:
            raise DocumentError("embedding size does not match the graph")
        out.append(f"space {e.dimension}")
        if e.period is not None:
            out.extend(f"period {_nums(p)}" for p in e.period)
    for v in range(g.n):
        line = f"vertex {v} {'boundary' if v in g.boundary else 'interior'}"
        if e is not None:
            line += " " + _nums(e.positions[v])
        out.append(line)
    for u, v in sorted(g.edges):
        out.append(f"edge {u} {v} {g.tags.get((u, v), 'witness')}")
    for i, s in enumerate(g.witness):
        out.append(f"simplex {i} " + " ".join(str(v) for v in s))
    if g.coloring is not None:
        out.extend(f"color {i} {g.coloring[i]}" for i in sorted(g.coloring))
    if g.layers is not None:
        out.extend(f"layer {i} " + " ".join(str(v) for v in sorted(l)) for i, l in enumerate(g.layers))
    if doc.variant is not None:
        out.append(f"stiffening {doc.variant}")
        out.extend(f"pin {v} {_nums(doc.pins[v])}" for v in sorted(doc.pins))
        for v in sorted(doc.sliders):
            a, d = doc.sliders[v]
            out.append(f"slider {v} {_nums(a)} {_nums(d)}")
        out.extend(f"note {k} {json.dumps(doc.notes[k])}" for k in sorted(doc.notes))
    out.extend(f"meta {k} {json.dumps(g.metadata[k])}" for k in sorted(g.metadata))
    out.append("end")
    return "\n".join(out) + "\n"


def _ints(tok: list[str], no: int) -> list[int]:
    try:
        return [int(t) for t in tok]
    except ValueError:
        raise DocumentSyntaxError(no, f"expected integers, got {' '.join(tok)!r}") from None


def _floats(tok: list[str], no: int) -> np.ndarray:
    try:
        return np.array([float(t) for t in tok])
    except ValueError:
        raise DocumentSyntaxError(no, f"expected numbers, got {' '.join(tok)!r}") from None


def load(text: str | bytes) -> CostDocument:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.split("\n")
    if not lines or not lines[0].startswith(FORMAT + " "):
        raise DocumentSyntaxError(1, f"missing '{FORMAT} <version>' header")
    try:
        version = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise DocumentSyntaxError(1, "bad version field") from None
    if version != VERSION:
        raise DocumentVersionError(f"unsupported document version {version} (this build reads {VERSION})")
    dim = n = space = None
    period, verts, edges, simplices, colors, layers = [], [], [], [], {}, []
    variant, pins, sliders, notes, meta = None, {}, {}, {}, {}
    ended = False
    for no, raw in enumerate(lines[1:], 2):
        if not raw.strip():
            continue
        if ended:
            raise DocumentSyntaxError(no, "content after 'end'")
        key, *tok = raw.split()
        if key == "end":
            ended = True
        elif key == "dimension":
            (dim,) = _ints(tok, no) if len(tok) == 1 else (None,)
            if dim is None:
                raise DocumentSyntaxError(no, "dimension takes one value")
        elif key == "vertices":
            (n,) = _ints(tok, no) if len(tok) == 1 else (None,)
            if n is None:
                raise DocumentSyntaxError(no, "vertices takes one value")
        elif key == "space":
            (space,) = _ints(tok, no) if len(tok) == 1 else (None,)
            if space is None:
                raise DocumentSyntaxError(no, "space takes one value")
        elif key == "period":
            period.append(_floats(tok, no))
        elif key == "vertex":
            if len(tok) < 2 or tok[1] not in ("boundary", "interior"):
                raise DocumentSyntaxError(no, "vertex needs an id and boundary|interior")
            verts.append((_ints(tok[:1], no)[0], tok[1] == "boundary", _floats(tok[2:], no), no))
        elif key == "edge":
            if len(tok) != 3:
                raise DocumentSyntaxError(no, "edge needs two ids and a tag")
            edges.append((*_ints(tok[:2], no), tok[2], no))
        elif key == "simplex":
            ids = _ints(tok, no)
            if len(ids) < 2:
                raise DocumentSyntaxError(no, "simplex needs an index and vertices")
            simplices.append((ids[0], tuple(ids[1:]), no))
        elif key == "color":
            if len(tok) != 2 or tok[1] not in (BLUE, GREEN):
                raise DocumentSyntaxError(no, "color needs a simplex index and blue|green")
            colors[_ints(tok[:1], no)[0]] = tok[1]
        elif key == "layer":
            ids = _ints(tok, no)
            if not ids:
                raise DocumentSyntaxError(no, "layer needs an index")
            layers.append((ids[0], ids[1:], no))
        elif key == "stiffening":
            if len(tok) != 1:
                raise DocumentSyntaxError(no, "stiffening takes a variant name")
            variant = tok[0]
        elif key == "pin":
            pins[_ints(tok[:1], no)[0]] = (_floats(tok[1:], no), no)
        elif key == "slider":
            vals = _floats(tok[1:], no)
            if len(vals) % 2:
                raise DocumentSyntaxError(no, "slider needs an anchor and a direction of equal size")
            h = len(vals) // 2
            sliders[_ints(tok[:1], no)[0]] = ((vals[:h], vals[h:]), no)
        elif key in ("meta", "note"):
            parts = raw.split(None, 2)
            if len(parts) != 3:
                raise DocumentSyntaxError(no, f"{key} needs a key and a value")
            try:
                val = json.loads(parts[2])
            except json.JSONDecodeError:
                raise DocumentSyntaxError(no, f"{key} value must be a quoted string") from None
            (meta if key == "meta" else notes)[parts[1]] = str(val)
        else:
            raise DocumentSyntaxError(no, f"unknown record {key!r}")
    if not ended:
        raise DocumentSyntaxError(len(lines), "truncated document (no 'end')")
    if dim is None or n is None:
        raise DocumentSyntaxError(1, "dimension and vertices are required")

    def need(v, path):
        if not 0 <= v < n:
            raise DocumentIntegrityError(path, f"vertex {v} does not exist")

    if [v[0] for v in verts] != list(range(n)):
        raise DocumentIntegrityError("vertex", f"ids must be 0..{n - 1} in order")
    boundary = {v for v, b, _, _ in verts if b}
    pos = None
    if space is not None:
        bad = [v for v, _, p, _ in verts if len(p) != space]
        if bad:
            raise DocumentIntegrityError(f"vertex[{bad[0]}].position", f"expected {space} coordinates")
        pos = np.array([p for _, _, p, _ in verts]).reshape(n, space)
    elif any(len(p) for _, _, p, _ in verts):
        raise DocumentIntegrityError("space", "positions given without a 'space' record")
    eset, tags = set(), {}
    for k, (u, v, tag, _) in enumerate(edges):
        need(u, f"edge[{k}].u")
        need(v, f"edge[{k}].v")
        if u == v:
            raise DocumentIntegrityError(f"edge[{k}]", "loop")
        x = edge(u, v)
        if x in eset:
            raise DocumentIntegrityError(f"edge[{k}]", f"duplicate edge {x}")
        eset.add(x)
        if tag != "witness":
            tags[x] = tag
    witness = []
    for k, (i, s, _) in enumerate(simplices):
        if i != k:
            raise DocumentIntegrityError(f"simplex[{k}]", "simplex indices must be consecutive")
        for j, v in enumerate(s):
            need(v, f"simplex[{k}][{j}]")
        witness.append(tuple(s))
    for i in colors:
        if not 0 <= i < len(witness):
            raise DocumentIntegrityError(f"color[{i}]", f"simplex {i} does not exist")
    lay = None
    if layers:
        lay = []
        for k, (i, vs, _) in enumerate(layers):
            if i != k:
                raise DocumentIntegrityError(f"layer[{k}]", "layer indices must be consecutive")
            for j, v in enumerate(vs):
                need(v, f"layer[{k}][{j}]")
            lay.append(vs)
    for v in pins:
        need(v, f"pin[{v}]")
    for v in sliders:
        need(v, f"slider[{v}]")
    g = CostGraph(dim, n, eset, witness, boundary, tags, dict(colors) if colors else None, lay, meta)
    e = None
    if pos is not None:
        per = np.array(period) if period else None
        if per is not None and per.shape[1] != space:
            raise DocumentIntegrityError("period", f"expected {space} coordinates")
        e = Embedding(pos, per)
    return CostDocument(g, e, variant, {v: p for v, (p, _) in pins.items()},
                        {v: s for v, (s, _) in sliders.items()}, notes)


def read(path: str) -> CostDocument:
    with open(path, encoding="utf-8") as f:
        return load(f.read())


def write(path: str, doc: CostDocument) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(save(doc))


# --- OBJ ------------------------------------------------------------------------

def obj_text(vertices: np.ndarray | None = None, faces=None, lines=None, comment: str | None = None) -> str:
    out = ["# costkit obj"] + ([f"# {comment}"] if comment else [])
    if vertices is not None and len(vertices):
        V = np.asarray(vertices, dtype=float)
        if V.shape[1] == 2:
            V = np.hstack([V, np.zeros((len(V), 1))])
        out.extend("v " + _nums(p) for p in V)
    for f in faces if faces is not None else []:
        out.append("f " + " ".join(str(int(i) + 1) for i in f))
    for l in lines if lines is not None else []:
        out.append("l " + " ".join(str(int(i) + 1) for i in l))
    return "\n".join(out) + "\n"


def wireframe_obj(g: CostGraph, e: Embedding) -> str:
    if e.period is not None:
        raise CostError("wireframe export needs a non-periodic embedding")
    return obj_text(e.lifted(3).positions, lines=sorted(g.edges), comment=f"wireframe {g.n} vertices")


def mesh_obj(V: np.ndarray, F: np.ndarray, comment: str | None = None) -> str:
    return obj_text(V, faces=F, comment=comment)


def polylines_obj(polys: list[np.ndarray], comment: str | None = None) -> str:
    pts, lines, k = [], [], 0
    for pl in polys:
        pts.append(pl)
        lines.append(list(range(k, k + len(pl))))
        k += len(pl)
    V = np.concatenate(pts) if pts else None
    return obj_text(V, lines=lines, comment=comment)


def parse_obj(text: str) -> tuple[np.ndarray, list[list[int]], list[list[int]]]:
    V, F, L = [], [], []
    for raw in text.splitlines():
        tok = raw.split()
        if not tok or tok[0].startswith("#"):
            continue
        if tok[0] == "v":
            V.append([float(t) for t in tok[1:4]])
        elif tok[0] == "f":
            F.append([int(t.split("/")[0]) - 1 for t in tok[1:]])
        elif tok[0] == "l":
            L.append([int(t) - 1 for t in tok[1:]])
    return np.array(V).reshape(-1, 3), F, L


# --- matrices -------------------------------------------------------------------

def matrix_csv(M: np.ndarray) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return "\n".join(",".join(_num(x) for x in row) for row in M) + "\n"


def matrix_triplets(M: np.ndarray, tol: float = 0.0) -> str:
    """``row col value`` lines for the entries with ``|value| > tol``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows, cols = np.nonzero(np.abs(M) > tol)
    head = f"# {M.shape[0]} {M.shape[1]}"
    return "\n".join([head] + [f"{r} {c} {_num(M[r, c])}" for r, c in zip(rows, cols)]) + "\n"
