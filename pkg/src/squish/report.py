"""Optional matplotlib figures rendered next to the delimited outputs.

The CLI's default outputs stay machine-parseable (NDJSON + CSV); these
renderers run only behind --plot.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine import Snapshot, SweepCell
from .integrate import AccuracyTable


def plot_run(snapshots: Sequence[Snapshot], out_path: Path) -> Path:
    """Metric time series for one scenario run."""
    t = [s.time for s in snapshots]
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    if any(s.volume_outer is not None for s in snapshots):
        axes[0].plot(t, [s.volume_outer for s in snapshots], label="outer volume")
        if any(s.volume_inner is not None for s in snapshots):
            axes[0].plot(t, [s.volume_inner for s in snapshots], label="inner volume")
        axes[0].set_ylabel("volume")
        axes[0].legend()
    axes[1].plot(t, [s.ke for s in snapshots], label="kinetic")
    axes[1].plot(t, [s.pe for s in snapshots], label="spring potential")
    axes[1].set_ylabel("energy")
    axes[1].legend()
    axes[2].plot(t, [s.max_norm for s in snapshots], color="tab:red")
    axes[2].set_ylabel("max |position|")
    axes[2].set_xlabel("time [s]")
    fig.suptitle("scenario metrics")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def plot_sweep(cells: Sequence[SweepCell], out_path: Path) -> Path:
    """Survival grid over dt x integrator, annotated with steps to divergence."""
    dts = sorted({c.dt for c in cells})
    kinds = sorted({c.integrator.value for c in cells})
    fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(dts), 1.5 + 0.8 * len(kinds)))
    for c in cells:
        x = dts.index(c.dt)
        y = kinds.index(c.integrator.value)
        color = "#7fc97f" if c.survived else "#f0027f"
        ax.add_patch(plt.Rectangle((x, y), 1, 1, color=color, alpha=0.7))
        label = "ok" if c.survived else f"diverged\n@{c.steps_to_divergence}"
        ax.text(x + 0.5, y + 0.5, label, ha="center", va="center", fontsize=9)
    ax.set_xlim(0, len(dts))
    ax.set_ylim(0, len(kinds))
    ax.set_xticks([k + 0.5 for k in range(len(dts))], [repr(d) for d in dts])
    ax.set_yticks([k + 0.5 for k in range(len(kinds))], kinds)
    ax.set_xlabel("dt [s]")
    ax.set_title("stability ladder")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def plot_accuracy(tables: Sequence[AccuracyTable], out_path: Path) -> Path:
    """Log-log global error vs step size, one line per integrator."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for table in tables:
        hs = [r.h for r in table.rows]
        errs = [r.error for r in table.rows]
        ax.loglog(hs, errs, "o-",
                  label=f"{table.kind.value} (order {table.fitted_order:.2f})")
    ax.set_xlabel("step size h")
    ax.set_ylabel("global error at final time")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    ax.set_title("integrator convergence")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path
