"""File outputs for scenario runs: JSON, CSV and rendered figures.

Figures go through the Agg backend so runs work headless; every function
writes to a path and returns it.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def write_result_json(result, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(result.to_dict(), indent=2) + "\n")
    return path


def write_distances_csv(measurements, path: str | Path) -> Path:
    """One row per phone pair per repetition: set_index,i,j,distance_m,masked."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["set_index", "i", "j", "distance_m", "masked"])
        for k, dm in enumerate(measurements):
            n = dm.n_phones
            for i in range(n):
                for j in range(i + 1, n):
                    writer.writerow(
                        [k, i, j, repr(float(dm.d[i, j])), "true" if dm.mask[i, j] else "false"]
                    )
    return path


def render_positions_figure(truth_xy, estimate_xy, path: str | Path) -> Path:
    """Ground truth (red asterisks) against aligned estimates (blue circles)."""
    truth_xy = np.asarray(truth_xy)
    estimate_xy = np.asarray(estimate_xy)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(truth_xy[:, 0], truth_xy[:, 1], "r*", markersize=11, label="actual")
    ax.plot(estimate_xy[:, 0], estimate_xy[:, 1], "bo", fillstyle="none", label="estimated")
    for t, e in zip(truth_xy, estimate_xy):
        ax.plot([t[0], e[0]], [t[1], e[1]], color="0.7", linewidth=0.8, zorder=0)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal", adjustable="datalim")
    ax.grid(True, alpha=0.4)
    ax.legend(loc="best")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_cost_trace_figure(cost_trace, path: str | Path) -> Path:
    """Cost after every sweep; log scale when all values are positive."""
    trace = np.asarray(cost_trace, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(trace.size), trace, marker=".", linewidth=1.0)
    if trace.size and np.all(trace > 0):
        ax.set_yscale("log")
    ax.set_xlabel("sweep")
    ax.set_ylabel("s-stress cost")
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_weighting_figure(summary: dict, path: str | Path) -> Path:
    """Per-seed aligned error for both fusion strategies."""
    seeds = [e["seed"] for e in summary["per_seed"]]
    eq = [e.get("equal_error_m") for e in summary["per_seed"]]
    op = [e.get("optimal_error_m") for e in summary["per_seed"]]
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = np.arange(len(seeds))
    ax.plot(xs, eq, "s-", color="tab:orange", label="equal weights")
    ax.plot(xs, op, "o-", color="tab:blue", label="optimal weights")
    ax.set_xticks(xs)
    ax.set_xticklabels([str(s) for s in seeds], rotation=90, fontsize=7)
    ax.set_xlabel("seed")
    ax.set_ylabel("mean aligned error [m]")
    ax.grid(True, alpha=0.4)
    ax.legend(loc="best")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def write_weighting_csv(summary: dict, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "equal_error_m", "optimal_error_m"])
        for e in summary["per_seed"]:
            writer.writerow([e["seed"], e.get("equal_error_m"), e.get("optimal_error_m")])
    return path


def write_weighting_json(summary: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(summary, indent=2) + "\n")
    return path
