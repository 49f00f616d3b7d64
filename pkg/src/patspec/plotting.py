"""Matplotlib renderers for the report paths.

Figures are written straight to files (Agg backend); the CSV/JSON outputs
stay the primary artifacts and plots are always optional.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import ComparisonReport
from .spectra import Histogram


def plot_histogram(hist: Histogram, path: str, title: str = "") -> None:
    """Spectral histogram as a density bar chart."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    widths = np.diff(hist.edges)
    density = hist.mass / widths
    ax.bar(hist.edges[:-1], density, width=widths, align="edge",
           color="#4878b0", edgecolor="none")
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("density")
    if title:
        ax.set_title(title, fontsize=10)
    if hist.below or hist.above:
        ax.text(0.02, 0.95, f"outlier mass: {hist.below + hist.above:.3g}",
                transform=ax.transAxes, fontsize=8, va="top")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_comparison(report: ComparisonReport, path: str, title: str = "") -> None:
    """Empirical vs theoretical moments with 3-sigma bars, one panel per n."""
    ns = sorted({r.n for r in report.rows})
    fig, axes = plt.subplots(1, len(ns), figsize=(4.2 * len(ns), 3.4), squeeze=False)
    for ax, n in zip(axes[0], ns):
        rows = [r for r in report.rows if r.n == n]
        ks = [r.k for r in rows]
        ax.errorbar(ks, [r.empirical for r in rows],
                    yerr=[3 * r.empirical_se for r in rows],
                    fmt="o", capsize=3, label="simulation (3 SE)", color="#4878b0")
        ax.errorbar([k + 0.12 for k in ks], [r.theory for r in rows],
                    yerr=[3 * r.theory_se for r in rows],
                    fmt="s", capsize=3, label="theory", color="#d65f5f")
        ax.set_xlabel("moment order k")
        ax.set_ylabel("(1/n) Tr A^k")
        ax.set_title(f"n = {n}", fontsize=10)
        ax.legend(fontsize=8)
    if title:
        fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
