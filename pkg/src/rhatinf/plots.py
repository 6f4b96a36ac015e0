"""Figure rendering for reports and replication studies.

Figures are drawn on standalone Agg canvases (no pyplot state) and saved
with fixed sizes and without the toolkit-version metadata stamp, so repeat
runs differ only where the data differ.
"""

import math

import numpy as np
from matplotlib.figure import Figure

__all__ = ["save_curve_figure", "save_histogram_figure", "save_mv_figure"]

_PNG_OPTS = {"dpi": 120, "metadata": {"Software": None}}


def save_curve_figure(path, curve, threshold=None, overlay=None, title=None):
    """Render a threshold-indexed diagnostic curve to ``path`` (PNG).

    ``overlay`` is an optional (xs, values, label) triple, typically the
    population curve of a reference model evaluated on the same thresholds.
    """
    fig = Figure(figsize=(7.0, 4.2))
    ax = fig.subplots()
    finite = np.isfinite(curve.rhat)
    ax.plot(curve.xs[finite], curve.rhat[finite], color="C0", lw=1.3,
            label="local scale reduction")
    if overlay is not None:
        xs, values, label = overlay
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float)
        ok = np.isfinite(values)
        ax.plot(xs[ok], values[ok], color="C1", ls="--", lw=1.1, label=label)
    if threshold is not None:
        ax.axhline(threshold, color="C3", ls=":", lw=1.0,
                   label=f"cutoff {threshold:.4f}")
    i = curve.argmax()
    if math.isfinite(curve.rhat[i]):
        ax.plot([curve.xs[i]], [curve.rhat[i]], "C0o", ms=4)
    ax.set_xlabel("x")
    ax.set_ylabel("scale reduction at x")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, **_PNG_OPTS)


def save_histogram_figure(path, result, cutoffs=None, title=None, bins=30):
    """One histogram panel per recorded statistic of a SimulationResult.

    ``cutoffs`` maps statistic names to vertical reference lines.
    """
    stats = list(result.stat_names)
    cutoffs = cutoffs or {}
    fig = Figure(figsize=(3.6 * len(stats), 3.2))
    axes = fig.subplots(1, len(stats), squeeze=False)[0]
    for ax, stat in zip(axes, stats):
        vals = np.asarray(result.values[stat], dtype=float)
        vals = vals[np.isfinite(vals)]
        ax.hist(vals, bins=bins, color="C0", alpha=0.85)
        if stat in cutoffs:
            ax.axvline(cutoffs[stat], color="C3", ls=":", lw=1.2)
        ax.set_title(stat, fontsize=10)
        ax.tick_params(labelsize=8)
    if title:
        fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    fig.savefig(path, **_PNG_OPTS)


def save_mv_figure(path, report, title=None):
    """Two panels for an MvReport: per-margin suprema and the directional max."""
    margins = np.asarray(report.margin_rhat_inf, dtype=float)
    fig = Figure(figsize=(7.0, 3.4))
    ax1, ax2 = fig.subplots(1, 2)
    ax1.bar(np.arange(1, margins.size + 1), margins - 1.0, bottom=1.0, color="C0")
    ax1.axhline(report.margin_threshold, color="C3", ls=":", lw=1.2)
    ax1.set_xlabel("coordinate")
    ax1.set_ylabel("margin supremum")
    ax1.set_xticks(np.arange(1, margins.size + 1))
    ax2.bar([0], [report.copula_rhat_max_inf - 1.0], bottom=1.0, color="C1")
    ax2.axhline(report.copula_threshold, color="C3", ls=":", lw=1.2)
    ax2.set_xticks([0])
    ax2.set_xticklabels(["all directions"])
    ax2.set_ylabel("dependence supremum")
    if title:
        fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    fig.savefig(path, **_PNG_OPTS)
