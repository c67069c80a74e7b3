"""
plots.py — Self-contained SVG figures of fitness clouds and GHC dynamics.

The CSV files are the contract; these figures are a convenience view of the
same data. SVG output is pinned (no date metadata, fixed hash salt) so that
identical inputs give identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from cloud import CloudShape, EvolvabilityThresholds  # noqa: E402
from heuristic import AverageTrajectory  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "nkcloud"

CURVE_STYLE = {
    "min": {"color": "#2b6cb0", "label": "FC_min"},
    "mean": {"color": "#111111", "label": "FC_mean"},
    "max": {"color": "#c53030", "label": "FC_max"},
}
THRESHOLD_CURVE = {"alpha": "min", "beta": "mean", "gamma": "max"}


def _draw_shape(ax, sh: CloudShape) -> None:
    phi = sh.column("phi")
    mean = sh.column("mean")
    std = sh.column("std")
    ax.fill_between(phi, mean - std, mean + std, color="#a0aec0", alpha=0.4, linewidth=0,
                    label="FC_mean ± std")
    for curve, style in CURVE_STYLE.items():
        ax.plot(phi, sh.column(curve), linewidth=1.0, **style)
    lo = float(min(phi.min(), sh.column("min").min()))
    hi = float(max(phi.max(), sh.column("max").max()))
    ax.plot([lo, hi], [lo, hi], linestyle="--", color="#718096", linewidth=0.8, label="f̃ = f")
    ax.set_xlabel("fitness f")
    ax.set_ylabel("bordering fitness f̃")


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_cloud_shape(path: Path, sh: CloudShape, *, title: str,
                     line: Optional[tuple[float, float]] = None,
                     points: Optional[tuple] = None) -> Path:
    """Shape curves with the ±1 std band, the diagonal, and optionally the predicted line and raw points."""
    fig, ax = plt.subplots(figsize=(6, 6))
    if points is not None and len(points[0]):
        ax.scatter(points[0], points[1], s=1, color="#cbd5e0", label="cloud")
    _draw_shape(ax, sh)
    if line is not None:
        phi = sh.column("phi")
        slope, intercept = line
        ax.plot(phi, slope * phi + intercept, color="#38a169", linewidth=1.0, linestyle=":",
                label=f"Weinberger line (slope {slope:.4g})")
    ax.set_title(title)
    ax.legend(loc="upper left", fontsize=8)
    return _save(fig, path)


def plot_ghc_dynamics(path: Path, sh: CloudShape, t: EvolvabilityThresholds,
                      avg: AverageTrajectory, *, title: str) -> Path:
    """GHC cloud shape with the average trajectory and the α/β/γ crossings."""
    fig, ax = plt.subplots(figsize=(6, 6))
    _draw_shape(ax, sh)
    ax.plot([p.mean_f for p in avg.points], [p.mean_f_border for p in avg.points],
            color="#d69e2e", linewidth=1.6, marker=".", markersize=3, label="average trajectory")
    for name, curve in THRESHOLD_CURVE.items():
        value = t.value(name)
        if value is not None:
            ax.plot([value], [value], marker="o", color=CURVE_STYLE[curve]["color"], linestyle="none")
            ax.annotate(name, (value, value), textcoords="offset points", xytext=(4, -10), fontsize=8)
    ax.set_title(title)
    ax.legend(loc="upper left", fontsize=8)
    return _save(fig, path)
