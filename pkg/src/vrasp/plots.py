"""Figure rendering for solutions, search traces and benchmark summaries.

Everything renders to files through the Agg backend so the CLI and the
benchmark harness work headless; each function returns the written path.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .domain import Instance, Solution
from .vns import SearchLog


def plot_routes(instance: Instance, solution: Solution, path, title: str = "") -> Path:
    """Client map with one polyline per non-empty route (depot legs included)."""
    fig, ax = plt.subplots(figsize=(6, 6))
    dx, dy = instance.depot_xy
    ax.plot([dx], [dy], "ks", markersize=9, label="depot")
    cmap = plt.get_cmap("tab10")
    for idx, route in enumerate(solution.routes):
        if not route.visits:
            continue
        xs = [dx] + [instance.clients[v - 1].x for v in route.visits] + [dx]
        ys = [dy] + [instance.clients[v - 1].y for v in route.visits] + [dy]
        ax.plot(xs, ys, "-o", color=cmap(idx % 10), label=f"caregiver {route.caregiver}")
    for c in instance.clients:
        ax.annotate(str(c.id), (c.x, c.y), textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title or f"routes ({instance.n} clients, {instance.caregiver_count} caregivers)")
    ax.legend(loc="best", fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_convergence(log: SearchLog, path, title: str = "search convergence") -> Path:
    """Candidate and best-so-far cost against the iteration counter."""
    fig, ax = plt.subplots(figsize=(7, 4))
    iters = [e.iteration for e in log.entries]
    ax.plot(iters, [e.cost for e in log.entries], ".", color="0.6", label="iteration result")
    ax.step(iters, [e.best for e in log.entries], where="post", color="C3", label="best")
    ax.set_xlabel("iteration")
    ax.set_ylabel("cost")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_gap_bars(labels: Sequence[str], gaps: Sequence[float], path, title: str) -> Path:
    """Per-instance gap bars (in percent) with the mean as a dashed line."""
    fig, ax = plt.subplots(figsize=(7, 4))
    values = [100.0 * g for g in gaps]
    ax.bar(range(len(values)), values, color="C0")
    if values:
        mean = sum(values) / len(values)
        ax.axhline(mean, color="C3", linestyle="--", label=f"mean {mean:.2f}%")
        ax.legend(loc="best", fontsize=8)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("gap (%)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
