"""Figure rendering for sweep rows and repeated-game traces.

Lives apart from the CLI so matplotlib is only imported when a figure
is actually requested.  Output is file-based (Agg backend); nothing
here opens a window.
"""

from __future__ import annotations

from collections.abc import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 - backend must be set first

from .analysis import SweepRow
from .model import GameTrace

__all__ = ["sweep_figure", "trace_figure"]


def _shares_and_bonus(ax, x, f1, f2, bonus, xlabel):
    ax.plot(x, f1, color="tab:blue", label="f1 (insurer FFS share)")
    ax.plot(x, f2, color="tab:orange", label="f2 (practice FFS share)")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("equilibrium share")
    ax.set_ylim(-0.05, 1.05)
    twin = ax.twinx()
    twin.plot(x, bonus, color="tab:green", linestyle="--", label="bonus")
    twin.set_ylabel("bonus transfer")
    handles = ax.get_lines() + twin.get_lines()
    ax.legend(handles, [h.get_label() for h in handles],
              loc="center left", fontsize=8)


def sweep_figure(rows: Sequence[SweepRow], path: str) -> None:
    """Render equilibrium shares and the bonus against alpha into ``path``."""
    if not rows:
        raise ValueError("no sweep rows to plot")
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    _shares_and_bonus(ax,
                      [r.alpha for r in rows],
                      [r.f1 for r in rows],
                      [r.f2 for r in rows],
                      [r.bonus for r in rows],
                      "alpha")
    ax.set_title(f"equilibrium vs. bonus scale ({rows[0].rounds} round(s))")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def trace_figure(trace: GameTrace, path: str) -> None:
    """Render the per-round path of a repeated game into ``path``."""
    if not trace.rounds:
        raise ValueError("no rounds to plot")
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    reports = [rec.report for rec in trace.rounds]
    _shares_and_bonus(ax,
                      [rec.round_index for rec in trace.rounds],
                      [rep.fractions.f1 for rep in reports],
                      [rep.fractions.f2 for rep in reports],
                      [rep.bonus for rep in reports],
                      "round")
    ax.set_title(f"repeated game, {len(trace.rounds)} round(s)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
