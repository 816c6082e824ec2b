"""SVG figures for training curves and penultimate-norm scatter plots.

Figures are built on ``matplotlib.figure.Figure`` directly (no pyplot state)
and written with a fixed hash salt and no date stamp so identical data give
identical bytes.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

_RC = {
    "svg.hashsalt": "hingefnn",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def loss_figure(report) -> Figure:
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(5.0, 3.2), layout="constrained")
        ax = fig.add_subplot()
        ep = np.arange(1, len(report.train_loss) + 1)
        ax.plot(ep, report.train_loss, lw=1.2, label="training")
        ax.plot(ep, report.val_loss, lw=1.2, ls="--", label="validation")
        for e in report.lr_reductions:
            ax.axvline(e, color="0.7", lw=0.6)
        ax.set_xlabel("epoch")
        ax.set_ylabel("hinge loss")
        ax.legend(frameon=False)
    return fig


def scatter_figure(table, title: str = "") -> Figure:
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(6.0, 3.4), layout="constrained")
        ax = fig.add_subplot()
        n = np.arange(len(table))
        bad = np.asarray(table.misclassified, dtype=bool)
        ax.scatter(n[~bad], table.norm[~bad], s=1.5, lw=0, c="tab:blue", rasterized=True, label="correct")
        ax.scatter(n[bad], table.norm[bad], s=1.5, lw=0, c="tab:red", rasterized=True, label="misclassified")
        ax.set_xlabel("test sample index $n$")
        ax.set_ylabel(r"$\|y_{K-1,n}\|$")
        if title:
            ax.set_title(title)
        if len(table):
            ax.legend(frameon=False, markerscale=6, loc="upper left")
    return fig


def save_loss_plot(report, path) -> Path:
    return _save(loss_figure(report), path)


def save_scatter_plot(table, path, title: str = "") -> Path:
    return _save(scatter_figure(table, title), path)
