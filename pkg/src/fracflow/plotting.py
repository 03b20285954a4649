"""Static PNG figures for the CLI report paths (Agg backend, no pyplot state)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure


def _save(fig: Figure, path: Path) -> Path:
    FigureCanvasAgg(fig)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata={"Software": None})
    return path


def plot_profile(vel, tau, path) -> Path:
    """Velocity and stress against r, one curve per sampled time."""
    fig = Figure(figsize=(9, 3.8), layout="constrained")
    ax_v, ax_s = fig.subplots(1, 2)
    for j, t in enumerate(vel.t_samples):
        ax_v.plot(vel.r_samples, vel.values[:, j], marker=".", label=f"t={t:g}")
        ax_s.plot(tau.r_samples, tau.values[:, j], marker=".")
    ax_v.set_xlabel("r")
    ax_v.set_ylabel("velocity")
    ax_s.set_xlabel("r")
    ax_s.set_ylabel("shear stress")
    if len(vel.t_samples) <= 12:
        ax_v.legend(fontsize="small")
    return _save(fig, path)


def plot_compare(report, path) -> Path:
    """Relative deviations of the series from each reference stack."""
    fig = Figure(figsize=(6, 4), layout="constrained")
    ax = fig.subplots()
    cols = {"series-oracle": 7, "series-fd": 9}
    for pair, col in cols.items():
        for qty, mark in (("velocity", "o"), ("stress", "s")):
            pts = [(row[2], row[col]) for row in report.rows
                   if row[0] == qty and row[col] is not None and row[col] > 0]
            if pts:
                t, dev = np.array(pts).T
                ax.semilogy(t, dev, mark, fillstyle="none", label=f"{pair} {qty}")
    for pair, tol in (("series-oracle", 1e-3), ("series-fd", 2e-2)):
        ax.axhline(tol, ls="--", lw=0.8, color="grey")
    ax.set_xlabel("t")
    ax.set_ylabel("relative deviation")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize="small")
    return _save(fig, path)
