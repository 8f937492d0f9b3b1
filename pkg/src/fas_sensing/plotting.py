"""Figure rendering for sweep curves and convergence traces (PNG, non-interactive)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (4.2, 3.2),
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}

MARKERS = {"FAS": "o", "FPA": "s", "RPA": "^", "EAS": "D"}

AXIS_LABELS = {
    "P_dBm": "PU transmit power $P$ (dBm)",
    "delta": r"Maximum false-alarm probability $\delta$",
    "none": "",
}


def plot_curves(points: Sequence, path, sweep_param: str = "P_dBm") -> Path:
    """Mean detection probability per scheme with one-standard-error bars."""
    path = Path(path)
    if sweep_param == "none":
        return _plot_bars(points, path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for scheme in dict.fromkeys(p.scheme for p in points):
            sel = [p for p in points if p.scheme == scheme]
            x = np.array([p.sweep_value for p in sel])
            y = np.array([p.mean_pd for p in sel])
            se = np.array([p.stderr for p in sel])
            ax.errorbar(x, y, yerr=se, marker=MARKERS.get(scheme, "."), capsize=2, label=scheme)
        ax.set_xlabel(AXIS_LABELS.get(sweep_param, sweep_param))
        ax.set_ylabel("Detection probability $P_d$")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(loc="lower right")
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path


def _plot_bars(points: Sequence, path: Path) -> Path:
    # single operating point: one bar per scheme
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x = np.arange(len(points))
        ax.bar(x, [p.mean_pd for p in points], yerr=[p.stderr for p in points], capsize=3, color="0.6")
        ax.set_xticks(x, [p.scheme for p in points])
        ax.set_ylabel("Detection probability $P_d$")
        ax.set_ylim(0, 1.02)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_convergence(runs: Sequence, path) -> Path:
    """Average AO trace per antenna count; shorter traces are held at their final value."""
    path = Path(path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for n in sorted({r.n_antennas for r in runs}):
            traces = [r.trace.pd for r in runs if r.n_antennas == n]
            length = max(len(t) for t in traces)
            padded = np.array([t + [t[-1]] * (length - len(t)) for t in traces])
            ax.plot(np.arange(length), padded.mean(axis=0), marker="o", markevery=max(1, length // 10),
                    label=f"N = {n}")
        ax.set_xlabel("Outer iteration")
        ax.set_ylabel("Detection probability $P_d$")
        ax.legend(loc="lower right")
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path
