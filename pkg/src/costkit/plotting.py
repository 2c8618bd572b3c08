"""Figures for analysis reports (matplotlib, Agg backend, deterministic PNG)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402

from .core import BLUE, CostGraph, Embedding  # noqa: E402

COLORS = {"blue": "#1f5fbf", "green": "#2e9e4f", "stiffen": "#c0392b", "join": "#8e44ad", "skin": "#999999"}
PNG_META = {"Software": None}


def _segments(g: CostGraph, e: Embedding, edges) -> np.ndarray:
    pos = e.positions[:, :2]
    segs = []
    for u, v in edges:
        a = pos[u]
        segs.append([a, a + e.displacement(u, v)[:2]])
    return np.array(segs).reshape(-1, 2, 2)


def _edge_color(g: CostGraph) -> dict:
    out = {}
    for i, s in enumerate(g.witness):
        c = COLORS["blue"] if g.coloring is None or g.coloring.get(i, BLUE) == BLUE else COLORS["green"]
        for a in s:
            for b in s:
                if a < b:
                    out[(a, b)] = c
    return out


def draw_structure(ax, g: CostGraph, e: Embedding, flex: np.ndarray | None = None, title: str | None = None):
    """Bars colored by witness simplex color, tagged edges dashed, boundary dots.

    Trivariate structures are drawn in projection on the xy plane.
    """
    ec = _edge_color(g)
    plain = sorted(x for x in g.edges if x not in g.tags)
    ax.add_collection(LineCollection(_segments(g, e, plain), colors=[ec.get(x, "k") for x in plain], linewidths=1.2))
    tagged = sorted(g.tags)
    if tagged:
        ax.add_collection(LineCollection(_segments(g, e, tagged), colors=[COLORS.get(g.tags[x], "k") for x in tagged],
                                         linewidths=1.0, linestyles="dashed"))
    pos = e.positions[:, :2]
    b = sorted(g.boundary)
    ax.scatter(pos[:, 0], pos[:, 1], s=6, c="k", zorder=3)
    if b:
        ax.scatter(pos[b, 0], pos[b, 1], s=18, facecolors="none", edgecolors="k", zorder=4)
    if flex is not None and len(flex):
        v = np.asarray(flex[0], float).reshape(g.n, -1)[:, :2]
        scale = 0.3 * np.ptp(pos, axis=0).max() / max(np.abs(v).max(), 1e-300)
        ax.quiver(pos[:, 0], pos[:, 1], v[:, 0] * scale, v[:, 1] * scale, angles="xy", scale_units="xy", scale=1,
                  color="#d35400", width=0.003)
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_axis_off()
    if title:
        ax.set_title(title, fontsize=9)


def save_figure(fig, path: str) -> None:
    fig.savefig(path, dpi=120, metadata=PNG_META)
    plt.close(fig)


def structure_figure(g: CostGraph, e: Embedding, path: str, flex: np.ndarray | None = None,
                     title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    draw_structure(ax, g, e, flex, title)
    save_figure(fig, path)


def spectrum_figure(singular_values: np.ndarray, threshold: float, path: str, title: str | None = None) -> None:
    """Singular values of the rigidity matrix on a log scale with the rank cut."""
    s = np.asarray(singular_values, float)
    fig, ax = plt.subplots(figsize=(5, 3))
    floor = max(s.max() * 1e-18, 1e-300) if len(s) else 1e-300
    ax.semilogy(np.arange(len(s)), np.maximum(s, floor), ".", ms=3, color="#1f5fbf")
    ax.axhline(threshold, color="#c0392b", lw=0.8, ls="--")
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    save_figure(fig, path)


def values_figure(g: CostGraph, e: Embedding, values: np.ndarray, path: str, label: str) -> None:
    """Bars colored by a per-edge value (sorted edge order), e.g. a self-stress."""
    edges = sorted(g.edges)
    v = np.asarray(values, float)
    fig, ax = plt.subplots(figsize=(5, 5))
    lim = max(np.abs(v).max(), 1e-300)
    lc = LineCollection(_segments(g, e, edges), array=v, cmap="coolwarm", linewidths=1.6)
    lc.set_clim(-lim, lim)
    ax.add_collection(lc)
    fig.colorbar(lc, ax=ax, shrink=0.7, label=label)
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_axis_off()
    save_figure(fig, path)
