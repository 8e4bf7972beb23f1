"""Figures for the CLI report path (Agg backend, PNG files)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 8,
    "figure.dpi": 120,
}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_stage_growth(U, ledger, path):
    """Stage sizes, with F1 and F2 completions per stage."""
    with plt.rc_context(RC):
        fig, (ax, bx) = plt.subplots(1, 2, figsize=(7, 2.8))
        ax.plot(range(U.depth), [s.size for s in U.stages], marker=".", lw=1)
        ax.set_xlabel("stage")
        ax.set_ylabel("points")
        f1 = [0] * U.depth
        f2 = [0] * U.depth
        for e in ledger.entries:
            (f1 if e.stage < 0 else f2)[e.completed] += 1
        xs = range(U.depth)
        bx.bar(xs, f1, color="0.3", label="F1")
        bx.bar(xs, f2, bottom=f1, color="0.7", label="F2")
        bx.set_xlabel("completion stage")
        bx.set_ylabel("tasks")
        bx.legend(frameon=False)
        return _save(fig, path)


def plot_matrix_sizes(M, path):
    """Carrier sizes of the grid objects; empty cells lie above the diagonal."""
    import numpy as np

    n = M.depth
    grid = np.full((n, n + 1), np.nan)
    for i, row in enumerate(M.rows):
        for j, w in enumerate(row):
            grid[i, j] = w.size
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(1 + 0.6 * (n + 1), 1 + 0.5 * n))
        im = ax.imshow(grid, cmap="Greys", vmin=0)
        for i in range(n):
            for j in range(len(M.rows[i])):
                ax.text(j, i, int(grid[i, j]), ha="center", va="center",
                        color="white" if grid[i, j] > np.nanmax(grid) / 2 else "black")
        ax.set_xlabel("column j")
        ax.set_ylabel("row i")
        ax.set_xticks(range(n + 1))
        ax.set_yticks(range(n))
        fig.colorbar(im, ax=ax, shrink=0.8)
        return _save(fig, path)


def plot_verdicts(rows, path, title=None):
    """Horizontal bars, one per check; ``rows`` are (name, passed) pairs."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 0.35 * len(rows) + 0.8))
        names = [r[0] for r in rows]
        ok = [bool(r[1]) for r in rows]
        ax.barh(range(len(rows)), [1] * len(rows), color=["0.35" if v else "tab:red" for v in ok])
        ax.set_yticks(range(len(rows)), names)
        ax.set_xticks([])
        ax.invert_yaxis()
        for i, v in enumerate(ok):
            ax.text(0.5, i, "pass" if v else "fail", ha="center", va="center", color="white")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_metric_space(X, path, balls=()):
    """Classical MDS picture of a finite metric space, with optional ball radii."""
    import numpy as np

    n = X.size
    D = np.array([[float(X.d(i, j)) for j in range(n)] for i in range(n)]) if n else np.zeros((0, 0))
    if n > 1:
        J = np.eye(n) - 1.0 / n
        B = -0.5 * J @ (D ** 2) @ J
        vals, vecs = np.linalg.eigh(B)
        top = np.argsort(vals)[::-1][:2]
        pts = vecs[:, top] * np.sqrt(np.clip(vals[top], 0, None))
    else:
        pts = np.zeros((n, 2))
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(3.2, 3.2))
        ax.scatter(pts[:, 0], pts[:, 1], color="black", s=12, zorder=3)
        for i in range(n):
            ax.annotate(str(i), pts[i], textcoords="offset points", xytext=(3, 3))
        for b in balls:
            ax.add_patch(plt.Circle(pts[b.center], float(b.radius), fill=False, ls="--", lw=0.8))
        ax.set_aspect("equal")
        ax.autoscale_view()
        ax.margins(0.3)
        return _save(fig, path)
