"""Command-line front end: every command reads and writes CoST documents or
plain-text reports, and is a pure function of its inputs, flags and seed."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import continuum, io, plotting, rigidity
from .core import CostError, CostGraph, Embedding, StiffenedStructure, edge, validate_cost
from .editing import flips as fl
from .editing.join import join
from .editing.refine import R0, R1, rebalance, refine, refine_3d
from .editing.stiffen import stiffen, stiffen_3d
from .generators import MAPS, apply_map, kagome_2d, kagome_3d


class Output:
    """Collects text for ``--output`` (or stdout)."""

    def __init__(self, path: str | None):
        self.path = path

    def write(self, text: str) -> None:
        if self.path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(self.path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)


def _read(path: str) -> io.CostDocument:
    if path == "-":
        return io.load(sys.stdin.read())
    return io.read(path)


def _embedding(doc: io.CostDocument) -> Embedding:
    if doc.embedding is None:
        raise CostError("this command needs vertex positions")
    return doc.embedding


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected U,V, got {text!r}") from None
    return a, b


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _report(items: list[tuple[str, object]]) -> str:
    def fmt(v):
        if isinstance(v, float):
            return repr(v + 0.0)
        if isinstance(v, bool):
            return "true" if v else "false"
        return str(v)
    return "".join(f"{k}: {fmt(v)}\n" for k, v in items)


def _append_meta(g: CostGraph, key: str, text: str) -> None:
    g.metadata[key] = (g.metadata.get(key, "") + ("\n" if key in g.metadata else "") + text).strip("\n")


# --- commands -------------------------------------------------------------------

def cmd_generate(a, out: Output) -> None:
    if a.kind == "kagome2d":
        g, e = kagome_2d(a.rows, a.cols, a.edge_length, a.topology)
    else:
        g, e = kagome_3d(a.rows, a.cols, a.layers, a.edge_length, a.topology, keep_skin=a.keep_skin)
    out.write(io.save(io.CostDocument(g, e)))


def cmd_refine(a, out: Output) -> None:
    doc = _read(a.input)
    g, e = doc.graph, doc.embedding
    for _ in range(a.steps):
        n0 = g.n
        g, e = refine(g, a.rule, e)
        if a.rebalance and e is not None:
            free = [v for v in range(n0, g.n) if v not in g.boundary]
            e, _ = rebalance(g, e, free, tol=a.tol)
    out.write(io.save(io.CostDocument(g, e)))


def cmd_refine3d(a, out: Output) -> None:
    doc = _read(a.input)
    g, e = doc.graph, doc.embedding
    for _ in range(a.steps):
        g, e = refine_3d(g, e, restore_balance=a.rebalance)
    out.write(io.save(io.CostDocument(g, e)))


def cmd_stiffen(a, out: Output) -> None:
    doc = _read(a.input)
    s = stiffen(doc.graph, _embedding(doc), a.variant, a.anchor, seed=a.seed)
    out.write(io.save(io.CostDocument.of(s, doc.embedding)))


def cmd_stiffen3d(a, out: Output) -> None:
    doc = _read(a.input)
    s = stiffen_3d(doc.graph, _embedding(doc), seed=a.seed)
    out.write(io.save(io.CostDocument.of(s, doc.embedding)))


def cmd_flip(a, out: Output) -> None:
    doc = _read(a.input)
    g, e = doc.graph, _embedding(doc)
    if a.mode == "edge":
        if a.edge is None:
            raise CostError("flip edge needs --edge U,V")
        if g.dimension == 3:
            g2, e2, log = fl.diagonal_flip_3d(g, e, a.layer, a.edge, strict_coloring=a.strict_coloring)
        else:
            g2, e2, log = fl.diagonal_flip(g, e, a.edge)
    elif a.mode == "random":
        g2, e2, log = fl.random_flips(g, e, a.process, a.count, a.seed, a.lam)
    elif a.mode == "channel":
        g2, e2, log = fl.carve_channel(g, e, a.start, a.dir, a.length)
    else:
        if a.log is None:
            raise CostError("flip replay needs --log FILE")
        with open(a.log, encoding="utf-8") as f:
            log = fl.FlipLog.from_text(f.read())
        if a.reverse:
            log = log.reversed()
        g2, e2 = fl.replay(g, e, log)
    g2.metadata = dict(g2.metadata)
    _append_meta(g2, "flips", "\n".join(r.line() for r in log.records))
    if a.log_out:
        with open(a.log_out, "w", encoding="utf-8", newline="\n") as f:
            f.write(log.to_text())
    out.write(io.save(io.CostDocument(g2, e2, doc.variant, doc.pins, doc.sliders, doc.notes)))


def _structure(doc: io.CostDocument):
    s = doc.stiffened
    return s if s is not None else doc.graph


def cmd_analyze(a, out: Output) -> None:
    doc = _read(a.input)
    g = doc.graph
    obj = _structure(doc)
    items: list[tuple[str, object]] = [("report", a.kind), ("dimension", g.dimension), ("vertices", g.n),
                                       ("edges", len(g.edges)), ("simplices", len(g.witness))]
    figure = None
    if a.kind in ("rigidity", "stress", "flex"):
        e = _embedding(doc)
        M = rigidity.rigidity_matrix(obj, e)
        rep = rigidity.rigidity_report(obj, e, a.tol)
        if a.kind == "rigidity":
            if g.dimension == 2:
                peb = rigidity.pebble_game(obj)
                items += [("pebble.game", "(2,3)")]
            else:
                peb = rigidity.body_bar_pebble(g)
                items += [("pebble.game", "(6,6) body-bar")]
            items += [("pebble.free_dof", peb.free_dof), ("pebble.redundant", len(peb.redundant_edges)),
                      ("pebble.classification", peb.classification)]
            items += [("numeric.rows", rep.rows), ("numeric.cols", rep.cols), ("numeric.rank", rep.rank),
                      ("numeric.trivial", rep.trivial), ("numeric.dof", rep.dof), ("numeric.stresses", rep.stresses),
                      ("numeric.classification", rep.classification)]
            if isinstance(obj, StiffenedStructure) and obj.grounded:
                items.append(("numeric.grounded", True))
            # special positions (collinear Kagome bars) can hide the generic answer
            rng = np.random.default_rng(a.seed)
            gen = rigidity.rigidity_report(obj, rigidity.perturbed(e, rng), a.tol)
            items += [("generic.rank", gen.rank), ("generic.dof", gen.dof), ("generic.stresses", gen.stresses),
                      ("generic.classification", gen.classification)]
            items.append(("valid", not validate_cost(g)))
            if a.dump_matrix:
                text = io.matrix_csv(M) if a.matrix_format == "csv" else io.matrix_triplets(M)
                with open(a.dump_matrix, "w", encoding="utf-8", newline="\n") as f:
                    f.write(text)
                items.append(("matrix", a.dump_matrix))
            if a.figure:
                if g.dimension == 2 and e.dimension == 2:
                    plotting.structure_figure(g, e, a.figure, rep.flex_basis, f"{rep.classification}, dof {rep.dof}")
                else:
                    s0 = rep.singular_values[0] if len(rep.singular_values) else 0.0
                    plotting.spectrum_figure(rep.singular_values, a.tol * s0, a.figure, rep.classification)
                figure = a.figure
        elif a.kind == "stress":
            items.append(("stresses", rep.stresses))
            w = None
            if rep.stresses:
                w = rep.stress_basis[0][:len(g.edges)]
                w = w / np.abs(w).max()
                w = w * np.sign(w[np.flatnonzero(np.abs(w) > 1e-12)[0]])
                w = np.where(np.abs(w) < 1e-12, 0.0, w)
                items += [(f"stress.{u}-{v}", float(x)) for (u, v), x in zip(sorted(g.edges), w)]
            if a.figure:
                if w is None:
                    plotting.structure_figure(g, e, a.figure, None, "no self-stress")
                else:
                    plotting.values_figure(g, e, w, a.figure, "self-stress")
                figure = a.figure
        else:
            items.append(("flexes", rep.dof))
            if rep.dof:
                f = rep.flex_basis[0]
                f = f / np.abs(f).max()
                f = f * np.sign(f[np.flatnonzero(np.abs(f) > 1e-12)[0]])
                f = np.where(np.abs(f) < 1e-12, 0.0, f).reshape(g.n, -1)
                items += [(f"flex.{v}", " ".join(repr(float(x) + 0.0) for x in f[v])) for v in range(g.n)]
            if a.figure:
                plotting.structure_figure(g, e, a.figure, rep.flex_basis if rep.dof else None, f"dof {rep.dof}")
                figure = a.figure
    elif a.kind == "resistance":
        if a.source is None or a.target is None:
            raise CostError("resistance needs --from U --to V")
        r = rigidity.effective_resistance(g, None, a.source, a.target)
        items += [("from", a.source), ("to", a.target), ("resistance", r)]
        if a.figure:
            plotting.structure_figure(g, _embedding(doc), a.figure, None, f"R({a.source},{a.target}) = {r:.6g}")
            figure = a.figure
    else:
        m = rigidity.mass_measure(g, doc.embedding, a.mode)
        items += [("mode", a.mode), ("mass", m)]
        if a.figure:
            plotting.structure_figure(g, _embedding(doc), a.figure, None, f"{a.mode} mass {m:.6g}")
            figure = a.figure
    if figure:
        items.append(("figure", figure))
    out.write(_report(items))


def cmd_join(a, out: Output) -> None:
    da, db = _read(a.first), _read(a.second)
    pairs = []
    with open(a.pairs, encoding="utf-8") as f:
        for no, raw in enumerate(f, 1):
            tok = raw.split("#")[0].split()
            if not tok:
                continue
            if len(tok) != 2:
                raise CostError(f"{a.pairs}:{no}: expected 'U V'")
            pairs.append((int(tok[0]), int(tok[1])))
    g, e = join(_structure(da), _structure(db), pairs, da.embedding, db.embedding)
    out.write(io.save(io.CostDocument(g, e)))


def cmd_map(a, out: Output) -> None:
    doc = _read(a.input)
    e = _embedding(doc)
    matrix = None
    if a.matrix:
        vals = _floats(a.matrix)
        d = int(round(len(vals) ** 0.5))
        if d * d != len(vals):
            raise CostError("--matrix needs d*d comma-separated entries")
        matrix = np.array(vals).reshape(d, d)
    offset = _floats(a.offset) if a.offset else None
    e2 = apply_map(e, a.name, matrix, offset, a.fit)
    _append_meta(doc.graph, "maps", a.name)
    out.write(io.save(io.CostDocument(doc.graph, e2, doc.variant, doc.pins, doc.sliders, doc.notes)))


def _field_samples(doc: io.CostDocument, level: int, res: int):
    f = continuum.kagome_field(doc.graph, _embedding(doc))
    while level > 0 and max(f.coefficients.shape) * 2 ** level > res:
        level -= 1
    return f.evaluate(level), level


def cmd_export(a, out: Output) -> None:
    doc = _read(a.input)
    g = doc.graph
    e = _embedding(doc)
    if a.kind == "wireframe":
        out.write(io.wireframe_obj(g, e))
        return
    if a.kind == "levelset":
        samples, level = _field_samples(doc, a.level, a.res)
        res = continuum.level_set(samples, a.iso)
        if samples.values.ndim == 3:
            V, F = res
            out.write(io.mesh_obj(V, F, comment=f"levelset iso={a.iso!r} level={level}"))
        else:
            out.write(io.polylines_obj(res, comment=f"levelset iso={a.iso!r} level={level}"))
        return
    patches = continuum.beam_surface(g, e, a.thickness)
    if a.kind == "beams":
        if a.format == "bezier":
            out.write(patches.to_text())
        else:
            V, F = patches.sample(a.density)
            out.write(io.mesh_obj(V, F, comment=f"beams thickness={a.thickness!r}"))
        return
    plane = _floats(a.plane)
    if len(plane) != 6:
        raise CostError("--plane needs PX,PY,PZ,NX,NY,NZ")
    lines = continuum.slice_plane(patches, plane[:3], plane[3:], a.tol_slice)
    out.write(io.polylines_obj(lines, comment=f"slice {a.plane}"))


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="costkit", description="Design and analyze corner-sharing simplex structures.")
    p.add_argument("--seed", type=int, default=0, help="seed for every randomized step")
    p.add_argument("--tol", type=float, default=1e-8, help="relative rank / convergence tolerance")
    p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
    # the global flags are also accepted after the command name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--output", "-o", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    q = sub.add_parser("generate", help="Kagome seed structures")
    q.add_argument("kind", choices=["kagome2d", "kagome3d"])
    q.add_argument("--rows", type=int, required=True)
    q.add_argument("--cols", type=int, required=True)
    q.add_argument("--layers", type=int, default=2)
    q.add_argument("--edge-length", type=float, default=1.0)
    q.add_argument("--topology", default="open", choices=["open", "toroidal", "toroidal-in-plane"])
    q.add_argument("--keep-skin", action="store_true")
    q.set_defaults(func=cmd_generate)

    q = sub.add_parser("refine", help="planar refinement")
    q.add_argument("input")
    q.add_argument("--rule", choices=[R0, R1], default=R0)
    q.add_argument("--steps", type=int, default=1)
    q.add_argument("--rebalance", action="store_true")
    q.set_defaults(func=cmd_refine)

    q = sub.add_parser("refine3d", help="tetrahedral refinement")
    q.add_argument("input")
    q.add_argument("--steps", type=int, default=1)
    q.add_argument("--rebalance", action="store_true")
    q.set_defaults(func=cmd_refine3d)

    q = sub.add_parser("stiffen", help="ground a planar boundary")
    q.add_argument("input")
    q.add_argument("--variant", choices=["edges", "pins", "sliders"], default="edges")
    q.add_argument("--anchor", choices=["deterministic", "seeded"], default="deterministic")
    q.set_defaults(func=cmd_stiffen)

    q = sub.add_parser("stiffen3d", help="greedy boundary bars for a trivariate structure")
    q.add_argument("input")
    q.set_defaults(func=cmd_stiffen3d)

    q = sub.add_parser("flip", help="diagonal flips")
    q.add_argument("mode", choices=["edge", "random", "channel", "replay"])
    q.add_argument("input")
    q.add_argument("--edge", type=_pair, help="triangulation edge U,V")
    q.add_argument("--layer", type=int, default=2, help="layer index for trivariate flips")
    q.add_argument("--strict-coloring", action="store_true")
    q.add_argument("--process", choices=["poisson", "markov"], default="poisson")
    q.add_argument("--count", type=int, default=1)
    q.add_argument("--lambda", dest="lam", type=float, default=1.0)
    q.add_argument("--start", type=int, default=0)
    q.add_argument("--dir", type=int, default=3)
    q.add_argument("--length", type=int, default=1)
    q.add_argument("--log", help="flip log to replay")
    q.add_argument("--reverse", action="store_true", help="replay the log backwards")
    q.add_argument("--log-out", help="write the flip log here")
    q.set_defaults(func=cmd_flip)

    q = sub.add_parser("analyze", help="key: value reports")
    q.add_argument("kind", choices=["rigidity", "stress", "flex", "resistance", "mass"])
    q.add_argument("input")
    q.add_argument("--from", dest="source", type=int)
    q.add_argument("--to", dest="target", type=int)
    q.add_argument("--mode", choices=["vertex", "edge", "face", "volume"], default="edge")
    q.add_argument("--figure", help="write a PNG figure here")
    q.add_argument("--dump-matrix", help="write the rigidity matrix here")
    q.add_argument("--matrix-format", choices=["csv", "triplets"], default="csv")
    q.set_defaults(func=cmd_analyze)

    q = sub.add_parser("join", help="merge paired boundary vertices of two structures")
    q.add_argument("first")
    q.add_argument("second")
    q.add_argument("--pairs", required=True, help="file with one 'U V' pair per line")
    q.set_defaults(func=cmd_join)

    q = sub.add_parser("map", help="domain maps of the embedding")
    q.add_argument("input")
    q.add_argument("--name", choices=list(MAPS), required=True)
    q.add_argument("--matrix", help="affine matrix, row-major, comma-separated")
    q.add_argument("--offset", help="affine offset, comma-separated")
    q.add_argument("--fit", action="store_true", help="scale into the unit tetrahedron first")
    q.set_defaults(func=cmd_map)

    q = sub.add_parser("export", help="OBJ and text exports")
    q.add_argument("kind", choices=["wireframe", "beams", "levelset", "slice"])
    q.add_argument("input")
    q.add_argument("--thickness", type=float, default=0.1)
    q.add_argument("--format", choices=["obj", "bezier"], default="obj")
    q.add_argument("--density", type=int, default=4, help="samples per patch side for OBJ meshes")
    q.add_argument("--iso", type=float, default=0.0)
    q.add_argument("--level", type=int, default=3)
    q.add_argument("--res", type=int, default=256, help="cap on samples per axis")
    q.add_argument("--plane", default="0,0,0,0,0,1")
    q.add_argument("--tol-slice", type=float, default=1e-4)
    q.set_defaults(func=cmd_export)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        a.func(a, Output(a.output))
    except (CostError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
