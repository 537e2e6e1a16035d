"""Static figure rendering for the CLI report paths.

Every renderer writes a PNG next to the delimited output it illustrates.
Output bytes are deterministic for fixed inputs (fixed geometry, no
timestamps), which the CLI's reproducibility contract relies on.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_coefficient_curves",
    "save_lag_curve",
    "save_table1_figure",
    "save_table2_figure",
    "save_selection_figure",
]

_DPI = 130


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_coefficient_curves(grid, beta, names, path) -> None:
    """One panel per predictor with its fitted coefficient curve."""
    beta = np.asarray(beta)
    p = beta.shape[1]
    ncols = min(p, 3)
    nrows = math.ceil(p / ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.6 * ncols, 2.6 * nrows), squeeze=False
    )
    for j in range(p):
        ax = axes[j // ncols][j % ncols]
        ax.plot(grid, beta[:, j], lw=1.5)
        ax.set_title(names[j], fontsize=10)
        ax.axhline(0.0, color="grey", lw=0.6, alpha=0.6)
    for k in range(p, nrows * ncols):
        axes[k // ncols][k % ncols].set_axis_off()
    fig.supxlabel("conditioner u")
    fig.supylabel("coefficient")
    _finish(fig, path)


def save_lag_curve(taus, rmses, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(taus, rmses, marker="o", ms=3.5, lw=1.2)
    if len(rmses):
        best = int(np.argmin(rmses))
        ax.axvline(taus[best], color="crimson", lw=0.8, ls="--")
        ax.annotate(f"min at {taus[best]:g}", (taus[best], rmses[best]), fontsize=9)
    ax.set_xlabel("lag")
    ax.set_ylabel("residual RMSE")
    _finish(fig, path)


def save_table1_figure(summary_rows, path) -> None:
    """Grouped bars of the per-coefficient errors for each method."""
    methods = [r["method"] for r in summary_rows]
    vals = np.array(
        [[r[f"mse{j + 1}_x100_mean"] for j in range(4)] for r in summary_rows]
    )
    x = np.arange(4)
    width = 0.8 / len(methods)
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    for i, m in enumerate(methods):
        ax.bar(x + i * width, vals[i], width, label=m)
    ax.set_xticks(x + width * (len(methods) - 1) / 2)
    ax.set_xticklabels([f"beta{j + 1}" for j in range(4)])
    ax.set_ylabel("MSE x 100")
    ax.legend()
    _finish(fig, path)


def save_table2_figure(summary_rows, path) -> None:
    ns = [r["n"] for r in summary_rows]
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.4))
    axes[0].plot(ns, [r["selected_mean"] for r in summary_rows], marker="o")
    axes[0].axhline(6, color="grey", lw=0.8, ls="--")
    axes[0].set_xlabel("individuals")
    axes[0].set_ylabel("mean selected predictors")
    axes[1].plot(ns, [r["pct_exact"] for r in summary_rows], marker="o", label="exact")
    axes[1].plot(
        ns,
        [r["pct_no_false_negative"] for r in summary_rows],
        marker="s",
        label="no false negative",
    )
    axes[1].set_xlabel("individuals")
    axes[1].set_ylabel("% of replicates")
    axes[1].set_ylim(0, 105)
    axes[1].legend()
    _finish(fig, path)


def save_selection_figure(report, path) -> None:
    """Stem plot of the per-predictor coefficient-function norms."""
    norms = np.asarray(report.group_norms)
    idx = np.arange(1, norms.size + 1)
    fig, ax = plt.subplots(figsize=(7.0, 3.4))
    ax.vlines(idx, 0, norms, lw=1.0)
    active = np.array(report.active, dtype=int)
    if active.size:
        ax.plot(active, norms[active - 1], "o", ms=4, color="crimson", label="selected")
        ax.legend()
    ax.set_xlabel("predictor")
    ax.set_ylabel("group norm")
    _finish(fig, path)
