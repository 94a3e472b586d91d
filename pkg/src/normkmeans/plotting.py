"""Static figures: learned features, 2-D projections, residual curves.

Everything is drawn on bare :class:`matplotlib.figure.Figure` objects (no
pyplot state) and saved as SVG with a fixed hash salt and no date stamp,
so identical inputs give byte-identical files.  Each plotted feature curve
is wrapped in an SVG group with id ``curve-<i>``.
"""

from pathlib import Path

import matplotlib
import matplotlib.image
import numpy as np
from matplotlib.figure import Figure

from .extract import ShapeMismatch

__all__ = [
    "FIGURE_KINDS",
    "plot_centroids",
    "plot_comparison",
    "plot_residual_curve",
    "plot_scatter2d",
    "render_figure",
    "save_rgb_png",
]

FIGURE_KINDS = ("centroids", "scatter2d", "residual_curve")

_STYLE = {
    "svg.hashsalt": "normkmeans",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.4,
}
_BACKGROUND = "#b0b0b0"


def _colors(k):
    cmap = matplotlib.colormaps["tab10"]
    return [cmap(i % 10) for i in range(k)]


def _save(fig, path):
    path = Path(path)
    with matplotlib.rc_context(_STYLE):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})


def _draw_centroids(ax, vectors, names=None):
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    if V.size == 0:
        raise ShapeMismatch("no feature vectors to plot")
    t = np.arange(V.shape[1])
    for i, (v, c) in enumerate(zip(V, _colors(V.shape[0]))):
        label = names[i] if names else f"f{i + 1}"
        (line,) = ax.plot(t, v, color=c, label=label)
        line.set_gid(f"curve-{i}")
    ax.set_xlabel("sample index")
    ax.set_ylabel("amplitude")
    ax.legend(frameon=False, fontsize=7)


def _draw_scatter(ax, coords, labels, arrows=None, axis_names=("p1", "p2"), background=0):
    P = np.asarray(coords, dtype=float)
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ShapeMismatch("scatter plot needs a non-empty label set")
    if P.ndim != 2 or P.shape[1] != 2 or P.shape[0] != labels.shape[0]:
        raise ShapeMismatch("coordinates must be (N, 2) with one label per point")
    values = np.unique(labels)
    palette = _colors(len(values))
    for v, c in zip(values, palette):
        m = labels == v
        color = _BACKGROUND if background is not None and v == background else c
        ax.scatter(P[m, 0], P[m, 1], s=6, color=color, linewidths=0, label=str(v))
    if arrows is not None:
        A = np.atleast_2d(np.asarray(arrows, dtype=float))
        reach = np.abs(P).max() if P.size else 1.0
        for a in A:
            a = a / (np.linalg.norm(a) or 1.0) * reach
            for sgn in (1.0, -1.0):
                ax.annotate("", xy=sgn * a, xytext=(0, 0),
                            arrowprops={"arrowstyle": "->", "color": "k", "lw": 1.0})
    ax.set_xlabel(axis_names[0])
    ax.set_ylabel(axis_names[1])
    ax.set_aspect("equal", adjustable="datalim")


def _draw_residual(ax, history):
    h = np.asarray(history, dtype=float)
    if h.size == 0:
        raise ShapeMismatch("residual history is empty")
    (line,) = ax.plot(np.arange(1, h.size + 1), h, marker="o", ms=3, color="k")
    line.set_gid("curve-0")
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean residual")


def plot_centroids(vectors, path, title=None, names=None):
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(5, 3))
        ax = fig.add_subplot()
        _draw_centroids(ax, vectors, names)
        if title:
            ax.set_title(title)
        fig.tight_layout()
    _save(fig, path)


def plot_scatter2d(coords, labels, path, arrows=None, title=None, axis_names=("p1", "p2"),
                   background=0):
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(4, 4))
        ax = fig.add_subplot()
        _draw_scatter(ax, coords, labels, arrows, axis_names, background)
        if title:
            ax.set_title(title)
        fig.tight_layout()
    _save(fig, path)


def plot_residual_curve(history, path, title=None):
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(4, 3))
        ax = fig.add_subplot()
        _draw_residual(ax, history)
        if title:
            ax.set_title(title)
        fig.tight_layout()
    _save(fig, path)


def render_figure(kind, path, **inputs):
    """Dispatch on ``kind`` in :data:`FIGURE_KINDS`.

    ``centroids`` takes ``vectors``; ``scatter2d`` takes ``coords`` and
    ``labels`` (plus optional ``arrows``); ``residual_curve`` takes
    ``history``.  ``title`` is accepted by all.
    """
    if kind == "centroids":
        plot_centroids(inputs["vectors"], path, inputs.get("title"), inputs.get("names"))
    elif kind == "scatter2d":
        plot_scatter2d(inputs["coords"], inputs["labels"], path, inputs.get("arrows"),
                       inputs.get("title"), inputs.get("axis_names", ("p1", "p2")),
                       inputs.get("background", 0))
    elif kind == "residual_curve":
        plot_residual_curve(inputs["history"], path, inputs.get("title"))
    else:
        raise ValueError(f"unknown figure kind {kind!r}; expected one of {FIGURE_KINDS}")


def plot_comparison(rows, path):
    """Grid with one row per method: features on the left, projected points on the right.

    ``rows`` is a list of dicts with keys ``name``, ``vectors``, ``coords``,
    ``labels`` and optionally ``arrows``, ``axis_names`` and ``background``.
    """
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(8, 2.6 * len(rows)))
        axes = fig.subplots(len(rows), 2, squeeze=False)
        for (left, right), row in zip(axes, rows):
            _draw_centroids(left, row["vectors"])
            left.set_title(f"{row['name']}: features")
            _draw_scatter(right, row["coords"], row["labels"], row.get("arrows"),
                          row.get("axis_names", ("p1", "p2")), row.get("background"))
            right.set_title(f"{row['name']}: data points")
        fig.tight_layout()
    _save(fig, path)


def save_rgb_png(rgb, path):
    """Write an (H, W, 3) float image in [0, 1] as an 8-bit PNG."""
    img = np.clip(np.asarray(rgb, dtype=float), 0.0, 1.0)
    pixels = np.round(img * 255).astype(np.uint8)
    matplotlib.image.imsave(Path(path), pixels, format="png",
                            metadata={"Software": "normkmeans"})
