"""Deterministic SVG plots for sweep and society result tables.

SVG output normally varies between runs because matplotlib salts element
ids with a random value and stamps the file with the current date.  Both
sources are pinned here so identical tables yield identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .dynamics import SweepTable, csv_number

HASH_SALT = "softeq"


def _grouped(table: SweepTable):
    """Rows bucketed by alpha, preserving first-appearance order."""
    groups: dict[float, list] = {}
    for row in table.rows:
        groups.setdefault(row.alpha, []).append(row.report)
    return groups


def _sweep_axes(ax, table: SweepTable) -> None:
    groups = _grouped(table)
    alphas = [a for a in groups if math.isfinite(a)]
    for player in range(table.player_count):
        means = [
            sum(r.per_player_payoff[player] for r in groups[a]) / len(groups[a])
            for a in alphas
        ]
        ax.plot(alphas, means, marker="o", label=f"player {player}")
    ax.set_xlabel("alpha")
    ax.set_ylabel("mean expected payoff")
    ax.set_title("payoff against soft-response sharpness")
    ax.legend()


def _society_axes(ax, table: SweepTable) -> None:
    for alpha, reports in _grouped(table).items():
        overall = [r.overall for r in reports]
        ax.plot(
            range(len(overall)),
            overall,
            marker="o",
            markersize=3,
            linewidth=1.0,
            label=f"alpha={csv_number(alpha)}",
        )
    ax.set_xlabel("restart")
    ax.set_ylabel("overall payoff")
    ax.set_title("equilibrium quality across restarts")
    ax.legend()


def emit_plot(table: SweepTable, kind: str, path) -> Path:
    """Render a results table to an SVG file; same table, same bytes."""
    if kind not in ("sweep", "society"):
        raise ValueError(f"no plot layout for kind {kind!r}")
    path = Path(path)
    with plt.rc_context({"svg.hashsalt": HASH_SALT}):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        try:
            if kind == "sweep":
                _sweep_axes(ax, table)
            else:
                _society_axes(ax, table)
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return path
