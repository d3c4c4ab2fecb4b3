"""Figures written next to the JSON reports.

All functions take an output path, render with the Agg backend and return
the path. Nothing here is needed by the library proper.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .construct import ArrayLayout, GeneratorA  # noqa: E402
from .graph import Graph, GraphCodePlan  # noqa: E402

DATA_COLOR = "#4c72b0"
PARITY_COLOR = "#dd8452"


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_generator(gen: GeneratorA, path) -> Path:
    """Nonzero pattern of A with the n x n block grid overlaid."""
    pr = gen.params
    a = gen.a_full.array
    fig, ax = plt.subplots(figsize=(min(10, 2 + a.shape[1] * 0.25), min(12, 2 + a.shape[0] * 0.25)))
    ax.imshow(a != 0, cmap="Greys", interpolation="nearest", aspect="auto")
    for b in range(1, pr.n):
        ax.axhline(b * pr.m - 0.5, color="tab:red", lw=0.6)
        ax.axvline(b * pr.p - 0.5, color="tab:red", lw=0.6)
    if a.size <= 1600:
        for (i, j), v in np.ndenumerate(a):
            if v:
                ax.text(j, i, str(v), ha="center", va="center", color="white", fontsize=7)
    ax.set_xlabel("parity symbol (node-major)")
    ax.set_ylabel("data symbol (node-major)")
    ax.set_title(f"A for [n={pr.n}, k={pr.k}], m={pr.m}, p={pr.p}, GF({pr.q})")
    return _save(fig, path)


def plot_layout(layout: ArrayLayout, path) -> Path:
    """The (m+p) x n storage array with every symbol label in place."""
    pr = layout.params
    labels = layout.labels()
    fig, ax = plt.subplots(figsize=(1 + 0.8 * pr.n, 1 + 0.5 * pr.rows))
    for row in range(pr.rows):
        for col in range(pr.n):
            lab = labels[row][col]
            color = DATA_COLOR if lab.startswith("d") else PARITY_COLOR
            ax.add_patch(plt.Rectangle((col, pr.rows - 1 - row), 1, 1, fc=color, ec="white", alpha=0.8))
            ax.text(col + 0.5, pr.rows - 0.5 - row, lab, ha="center", va="center", fontsize=8, color="white")
    ax.set_xlim(0, pr.n)
    ax.set_ylim(0, pr.rows)
    ax.set_xticks(np.arange(pr.n) + 0.5, [str(j) for j in range(pr.n)])
    ax.set_yticks(np.arange(pr.rows) + 0.5, [str(pr.rows - 1 - i) for i in range(pr.rows)])
    ax.set_xlabel("node")
    ax.set_ylabel("array row")
    ax.set_aspect("equal")
    return _save(fig, path)


def _circle(n: int) -> np.ndarray:
    ang = np.pi / 2 - 2 * np.pi * np.arange(n) / n
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


def plot_topology(g: Graph, path, plan: GraphCodePlan | None = None, witness=None) -> Path:
    """Topology edges in grey; links used by the plan in blue; reduction removals dashed."""
    pos = _circle(g.n)
    fig, ax = plt.subplots(figsize=(5, 5))
    used = plan.embedded_support().edges if plan is not None else frozenset()
    for u, v in sorted(g.edges):
        style = dict(color="tab:blue", lw=2.0) if (u, v) in used else dict(color="0.75", lw=1.0)
        ax.plot(*pos[[u, v]].T, zorder=1, **style)
    if plan is not None:
        for u, v in plan.removed_edges:
            ax.plot(*pos[[u, v]].T, color="tab:red", ls="--", lw=1.0, zorder=1)
    marked = set(witness or ())
    for v in range(g.n):
        fc = "tab:red" if v in marked else "white"
        ax.scatter(*pos[v], s=400, fc=fc, ec="k", zorder=2)
        ax.text(*pos[v], str(v), ha="center", va="center", zorder=3)
    if plan is not None:
        for c, v in enumerate(plan.relabeling):
            ax.annotate(f"c{c}", pos[v] * 1.22, ha="center", va="center", fontsize=8, color="tab:blue")
    ax.set_xlim(-1.45, 1.45)
    ax.set_ylim(-1.45, 1.45)
    ax.set_aspect("equal")
    ax.axis("off")
    title = f"{g.n} nodes, min degree {g.min_degree()}"
    if witness is not None:
        title += f", failing set {sorted(marked)}"
    ax.set_title(title)
    return _save(fig, path)

