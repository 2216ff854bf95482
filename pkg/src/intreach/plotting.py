"""Static figures of boundaries and trajectory clouds (matplotlib, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .model import SystemSpec  # noqa: E402
from .support import supporting_point_block_batch  # noqa: E402

__all__ = ["outline", "plot_boundary", "plot_cloud"]


def outline(spec: SystemSpec, n: int = 720, t: float | None = None) -> np.ndarray:
    """Supporting points along ``n`` directions of the first 2 or 3 state coordinates.

    Works for any system with ``d`` equal to 2 or 3. Directions avoid the
    coordinate axes so product sets with flat faces still return vertices.
    """
    t = float(spec.t if t is None else t)
    d = spec.d
    if d == 2:
        th = (np.arange(n) + 0.5) * (2 * np.pi / n) + 1e-3
        Y = np.column_stack([np.cos(th), np.sin(th)])
    elif d == 3:
        k = int(np.sqrt(n)) + 1
        i = np.arange(k * k) + 0.5
        phi = np.arccos(1 - 2 * i / (k * k))
        th = np.pi * (1 + 5**0.5) * i
        Y = np.column_stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)])
    else:
        raise ValueError("outlines are drawn only for 2- or 3-dimensional systems")
    parts = [supporting_point_block_batch(b, Yj, t) for b, Yj in zip(spec.blocks, spec.split(Y))]
    return np.concatenate(parts, axis=1)


def _axes(dim: int):
    fig = plt.figure(figsize=(5.5, 5))
    ax = fig.add_subplot(projection="3d") if dim == 3 else fig.add_subplot()
    return fig, ax


def plot_boundary(rows: list[tuple[int, int, np.ndarray]], path, title: str = "") -> None:
    """Scatter sheet samples ``(block, sheet, x)``; one panel per block, colour by sheet."""
    blocks = sorted({b for b, _, _ in rows})
    fig = plt.figure(figsize=(5.5 * len(blocks), 5))
    for i, j in enumerate(blocks):
        pts = {s: np.array([x for b, sh, x in rows if b == j and sh == s]) for s in (1, -1)}
        dim = pts[1].shape[1]
        ax = fig.add_subplot(1, len(blocks), i + 1, projection="3d" if dim >= 3 else None)
        for s, colour in ((1, "tab:red"), (-1, "tab:blue")):
            P = pts[s]
            if dim == 1:
                ax.scatter(P[:, 0], np.zeros(len(P)), c=colour, s=12, label=f"sheet {s:+d}")
            elif dim == 2:
                order = np.argsort(np.arctan2(P[:, 1] - P[:, 1].mean(), P[:, 0] - P[:, 0].mean()))
                ax.plot(P[order, 0], P[order, 1], ".", color=colour, ms=2, label=f"sheet {s:+d}")
            else:
                ax.scatter(P[:, 0], P[:, 1], P[:, 2], c=colour, s=1, label=f"sheet {s:+d}")
        ax.set_xlabel("x1")
        if dim == 1:
            ax.set_yticks([])
        else:
            ax.set_ylabel("x2")
        ax.set_title(f"block {j}")
        ax.legend(loc="best", fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_cloud(spec: SystemSpec, cloud: np.ndarray, path, t: float | None = None, title: str = "") -> None:
    """Trajectory endpoints over the exact reach-set outline (first 2 or 3 coordinates)."""
    dim = min(spec.d, 3)
    fig, ax = _axes(dim)
    if dim == 2:
        ax.scatter(cloud[:, 0], cloud[:, 1], s=1, c="tab:blue", alpha=0.4, label="trajectory endpoints")
        if spec.d == 2:
            O = outline(spec, t=t)
            O = np.vstack([O, O[:1]])
            ax.plot(O[:, 0], O[:, 1], "k-", lw=1.2, label="exact boundary")
        ax.set_aspect("equal", adjustable="datalim")
        ax.legend(loc="best", fontsize=8)
    elif dim == 3:
        ax.scatter(cloud[:, 0], cloud[:, 1], cloud[:, 2], s=1, c="tab:blue", alpha=0.3)
        if spec.d == 3:
            O = outline(spec, n=2000, t=t)
            ax.scatter(O[:, 0], O[:, 1], O[:, 2], s=1, c="k", alpha=0.3)
    else:
        ax.scatter(cloud[:, 0], np.zeros(len(cloud)), s=2)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
