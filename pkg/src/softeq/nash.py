"""Best-response dynamics and exact Nash computation for small games.

This is the alpha -> infinity ground truth: sequential best-response walks
for pure outcomes, exhaustive pure-equilibrium enumeration, and classic
support enumeration for mixed equilibria of bimatrix games.  Everything here
works on raw payoffs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import EquilibriumReport, SweepRow, SweepTable, raw_epsilon_gap
from .games import (
    GraphicalGame,
    NormalFormGame,
    StrategyProfile,
    induce_normal_form,
    raw_action_values,
    unilateral_payoffs,
)

VERIFY_SLACK = 1e-12
SUPPORT_TOL = 1e-9
DEDUP_TOL = 1e-7
MAX_JOINT_ACTIONS = 10**7


@dataclass(frozen=True)
class PureOutcome:
    """Endpoint of a best-response walk.

    ``kind`` is "equilibrium" for a fixed point, "cycle" when a previously
    seen joint action recurs, or "exhausted" when max_steps improving moves
    happen without either.  ``steps`` counts improving moves.
    """

    kind: str
    joint_action: tuple[int, ...]
    steps: int
    cycle_length: int = 0


def best_response_dynamics(game, start_joint_action: Sequence[int], max_steps: int = 10000) -> PureOutcome:
    """Sequential exact best response in player index order, ties to lowest index."""
    joint = [int(a) for a in start_joint_action]
    counts = game.action_counts
    if len(joint) != len(counts) or any(not 0 <= a < k for a, k in zip(joint, counts)):
        raise ValueError(f"invalid start {tuple(joint)} for action counts {counts}")
    visited = {tuple(joint): 0}
    steps = 0
    while True:
        moved = False
        for i in range(game.player_count):
            values = unilateral_payoffs(game, joint, i)
            best = int(np.argmax(values))
            if values[best] > values[joint[i]]:
                joint[i] = best
                steps += 1
                moved = True
                key = tuple(joint)
                if key in visited:
                    return PureOutcome(
                        kind="cycle",
                        joint_action=key,
                        steps=steps,
                        cycle_length=steps - visited[key],
                    )
                visited[key] = steps
                if steps >= max_steps:
                    return PureOutcome(kind="exhausted", joint_action=key, steps=steps)
        if not moved:
            return PureOutcome(kind="equilibrium", joint_action=tuple(joint), steps=steps)


def enumerate_pure_nash(game) -> list[tuple[int, ...]]:
    """Exhaustively list joint actions with no strictly improving deviation."""
    if isinstance(game, GraphicalGame):
        game = induce_normal_form(game)
    size = game.joint_action_count
    if size > MAX_JOINT_ACTIONS:
        raise ValueError(f"joint action space {size} exceeds {MAX_JOINT_ACTIONS}")
    stable = np.ones(game.action_counts, dtype=bool)
    for i, table in enumerate(game.payoffs):
        stable &= table >= table.max(axis=i, keepdims=True)
    return [tuple(int(a) for a in joint) for joint in np.argwhere(stable)]


def _support_candidate(matrix: np.ndarray) -> tuple[np.ndarray, float] | None:
    """Solve matrix @ p = v, sum(p) = 1 for a probability vector p and value v."""
    k = matrix.shape[0]
    system = np.zeros((k + 1, k + 1))
    system[:k, :k] = matrix
    system[:k, k] = -1.0
    system[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        solution = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.isfinite(solution).all():
        return None
    return solution[:k], float(solution[k])


def support_enumeration_mixed_nash(game: NormalFormGame) -> list[StrategyProfile]:
    """All Nash equilibria of a bimatrix game via equal-size support enumeration."""
    if game.player_count != 2:
        raise ValueError("support enumeration handles exactly 2 players")
    m, n = game.action_counts
    if max(m, n) > 8:
        raise ValueError(f"support enumeration limited to 8 actions, got {m}x{n}")
    a, b = game.payoffs
    found: list[tuple[np.ndarray, np.ndarray]] = []
    for k in range(1, min(m, n) + 1):
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                if k == 1:
                    r, c = rows[0], cols[0]
                    if (a[r, c] >= a[:, c] - SUPPORT_TOL).all() and (
                        b[r, c] >= b[r, :] - SUPPORT_TOL
                    ).all():
                        x = np.zeros(m)
                        x[r] = 1.0
                        y = np.zeros(n)
                        y[c] = 1.0
                        found.append((x, y))
                    continue
                # x makes the column player indifferent across `cols`;
                # y makes the row player indifferent across `rows`
                col_sol = _support_candidate(b[np.ix_(rows, cols)].T)
                row_sol = _support_candidate(a[np.ix_(rows, cols)])
                if col_sol is None or row_sol is None:
                    continue
                x_sub, col_value = col_sol
                y_sub, row_value = row_sol
                if (x_sub < -SUPPORT_TOL).any() or (y_sub < -SUPPORT_TOL).any():
                    continue
                x = np.zeros(m)
                x[list(rows)] = np.clip(x_sub, 0.0, None)
                y = np.zeros(n)
                y[list(cols)] = np.clip(y_sub, 0.0, None)
                x /= x.sum()
                y /= y.sum()
                if (a @ y > row_value + SUPPORT_TOL).any():
                    continue
                if (b.T @ x > col_value + SUPPORT_TOL).any():
                    continue
                found.append((x, y))
    unique: list[tuple[np.ndarray, np.ndarray]] = []
    for x, y in found:
        if not any(
            max(np.abs(x - px).max(), np.abs(y - py).max()) <= DEDUP_TOL
            for px, py in unique
        ):
            unique.append((x, y))
    return [StrategyProfile((x, y)) for x, y in unique]


def verify_epsilon_nash(game, profile: StrategyProfile, epsilon: float) -> bool:
    """True iff no player's best pure deviation gains more than epsilon."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon!r}")
    return raw_epsilon_gap(game, profile) <= epsilon + VERIFY_SLACK


def mixed_nash_table(game, profiles: Sequence[StrategyProfile]) -> SweepTable:
    """Render Nash profiles in the sweep CSV schema with alpha = 'inf'."""
    rows = []
    for index, profile in enumerate(profiles):
        payoffs = tuple(
            float(profile[i] @ raw_action_values(game, profile, i))
            for i in range(game.player_count)
        )
        gap = raw_epsilon_gap(game, profile)
        report = EquilibriumReport(
            profile=profile,
            converged=True,
            iterations=0,
            per_player_payoff=payoffs,
            overall=float(sum(payoffs)),
            epsilon_gap=gap,
            raw_epsilon_gap=gap,
            residual=0.0,
        )
        rows.append(SweepRow(alpha=math.inf, restart=index, report=report))
    return SweepTable(player_count=game.player_count, rows=tuple(rows))
