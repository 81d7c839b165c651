"""PNG figures for the report command, drawn with the non-interactive Agg backend."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import GapPoint, ProfilePoint  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.frameon": False,
}
COLORS = {"compact": "#1f5a99", "benders": "#c0392b"}


def _series(points, attr: str) -> dict:
    out = defaultdict(lambda: ([], []))
    for p in points:
        xs, ys = out[p.method]
        xs.append(getattr(p, attr))
        ys.append(p.pct)
    return out


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_profile(points: Sequence[ProfilePoint], path: str | Path, title: str = "") -> Path:
    """Step plot of percentage of problems against the performance ratio."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for method, (xs, ys) in sorted(_series(points, "tau").items()):
            ax.step(xs, ys, where="post", label=method, color=COLORS.get(method))
        ax.set_xscale("log")
        ax.set_xlabel("performance ratio $\\tau$")
        ax.set_ylabel("% of problems")
        ax.set_ylim(0, 101)
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right")
        return _save(fig, path)


def plot_gap_curve(points: Sequence[GapPoint], path: str | Path, title: str = "") -> Path:
    """Percentage of runs within each optimality gap."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for method, (xs, ys) in sorted(_series(points, "gap").items()):
            ax.step(xs, ys, where="post", label=method, color=COLORS.get(method))
        ax.set_xlabel("optimality gap (%)")
        ax.set_ylabel("% of runs")
        ax.set_ylim(0, 101)
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right")
        return _save(fig, path)


def plot_objective_means(rows: Sequence[dict], path: str | Path) -> Path:
    """Mean optimal makespan against gamma, one line per instance set."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        by_set = defaultdict(list)
        for row in rows:
            if row["mean_objective"] is not None:
                by_set[row["instance_set"]].append((row["gamma"], row["mean_objective"]))
        for s, pts in sorted(by_set.items()):
            pts.sort()
            ax.plot([g for g, _ in pts], [v for _, v in pts], marker="o", label=s or "instances")
        ax.set_xlabel("$\\Gamma$")
        ax.set_ylabel("mean optimal makespan")
        if by_set:
            ax.legend(loc="lower right")
        return _save(fig, path)
