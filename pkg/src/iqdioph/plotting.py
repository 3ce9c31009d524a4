"""Matplotlib figure rendering for the report paths.

Figures are written as SVG with a fixed hash salt and no date metadata, so
rerendering the same data produces the same bytes.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .asymptotics import ConvergenceTable  # noqa: E402
from .heights import TailReport  # noqa: E402
from .siegelmc import SiegelReport  # noqa: E402

__all__ = [
    "save_svg",
    "convergence_figure",
    "tail_blocks_figure",
    "siegel_figure",
]

matplotlib.rcParams["svg.hashsalt"] = "iqdioph"


def save_svg(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def convergence_figure(table: ConvergenceTable):
    """Ratio count/predicted against log10(T), one polyline per theta."""
    fig, ax = plt.subplots(figsize=(8, 6))
    by_theta: dict[int, list[tuple[float, float]]] = {}
    for row in table.rows:
        by_theta.setdefault(row.theta_index, []).append((row.T, row.ratio))
    for idx in sorted(by_theta):
        pts = sorted(by_theta[idx])
        ax.plot(
            [math.log10(t) for t, _ in pts],
            [r for _, r in pts],
            marker="o",
            linewidth=1.0,
            markersize=3,
            label=f"theta {idx}",
        )
    ax.axhline(1.0, color="black", linewidth=1.0, linestyle="--")
    ax.set_xlabel("log10 T")
    ax.set_ylabel("count / predicted")
    ax.set_title("Convergence of the solution count to the predicted volume")
    if len(by_theta) <= 12:
        ax.legend(fontsize=8)
    return fig


def tail_blocks_figure(report: TailReport):
    """Dyadic block sums against the fitted geometric bound."""
    fig, ax = plt.subplots(figsize=(8, 6))
    js = [b.j for b in report.blocks]
    ax.semilogy(js, [max(b.total, 1e-300) for b in report.blocks], marker="o", label="S_j")
    ax.semilogy(js, [report.bound(j) for j in js], linestyle="--", label="fitted C * 2^((k-d)j)")
    ax.set_xlabel("dyadic block j")
    ax.set_ylabel("block sum of height^(-d)")
    ax.set_title(f"Height tail decay, k={report.k}, d={report.d}")
    ax.legend()
    return fig


def siegel_figure(report: SiegelReport):
    """Mean count with a 3-standard-error band against the target area."""
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.errorbar(
        [0.0],
        [report.mean_count],
        yerr=[3.0 * report.std_error],
        fmt="o",
        capsize=6,
        label="mean count (3 s.e.)",
    )
    ax.axhline(report.target_area, color="black", linestyle="--", label="disc area")
    ax.set_xlim(-1, 1)
    ax.set_xticks([])
    ax.set_ylabel("mean nonzero lattice points in disc")
    ax.set_title(f"Mean value check, {report.samples} lattices")
    ax.legend()
    return fig
