"""Soft-response dynamics: expected returns raised to a power, normalized, iterated.

Each player's mixed strategy is updated to be proportional to its expected
action values raised to that player's selfishness level ``alpha``: alpha=0
ignores payoffs entirely, alpha -> infinity approaches strict best response.
Fixed points of this map are the equilibria the package is about.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .games import (
    StrategyProfile,
    UtilityTransform,
    raw_action_values,
    transform_utilities,
)

RETRY_DAMPING = 0.5

_UPDATE_ORDERS = ("synchronous", "sequential")


@dataclass(frozen=True)
class DynamicsConfig:
    """Iteration parameters for the soft-response map.

    ``alpha`` may be a scalar (broadcast to all players) or a per-player
    sequence.  ``transform`` is the utility transform drivers use to build
    the view the dynamics run on.  ``damping`` blends each update with the
    previous profile: new = (1 - damping) * update + damping * old.
    """

    alpha: float | tuple[float, ...] = 1.0
    transform: UtilityTransform = UtilityTransform.identity()
    tolerance: float = 1e-9
    max_iterations: int = 10000
    damping: float = 0.0
    update_order: str = "synchronous"

    def __post_init__(self) -> None:
        alphas = (self.alpha,) if np.isscalar(self.alpha) else tuple(self.alpha)
        if any(a < 0 or math.isnan(a) for a in alphas):
            raise ValueError(f"alpha values must be nonnegative, got {self.alpha!r}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations!r}")
        if not 0 <= self.damping < 1:
            raise ValueError(f"damping must lie in [0, 1), got {self.damping!r}")
        if self.update_order not in _UPDATE_ORDERS:
            raise ValueError(
                f"update_order must be one of {_UPDATE_ORDERS}, got {self.update_order!r}"
            )

    def alpha_vector(self, player_count: int) -> tuple[float, ...]:
        if np.isscalar(self.alpha):
            return (float(self.alpha),) * player_count
        alphas = tuple(float(a) for a in self.alpha)
        if len(alphas) != player_count:
            raise ValueError(
                f"alpha has {len(alphas)} entries for {player_count} players"
            )
        return alphas

    def is_best_response_limit(self) -> bool:
        alphas = (self.alpha,) if np.isscalar(self.alpha) else tuple(self.alpha)
        return all(math.isinf(a) for a in alphas)


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    """Outcome of an equilibrium search; payoffs are on the raw scale."""

    profile: StrategyProfile
    converged: bool
    iterations: int
    per_player_payoff: tuple[float, ...]
    overall: float
    epsilon_gap: float
    raw_epsilon_gap: float
    residual: float
    used_damping_retry: bool = False


def soft_power(log_values: np.ndarray, alpha: float) -> np.ndarray:
    """Normalize exp(alpha * log_values) in log space; alpha=0 is exactly uniform."""
    k = log_values.shape[-1]
    if alpha == 0:
        return np.full(k, 1.0 / k)
    if math.isinf(alpha) or math.isnan(alpha):
        raise ValueError(f"alpha must be finite and >= 0, got {alpha!r}")
    z = alpha * log_values
    z = z - z.max()
    w = np.exp(z)
    return w / w.sum()


def soft_response_step(view, profile: StrategyProfile, config: DynamicsConfig) -> StrategyProfile:
    """One application of the soft-response map under the configured order."""
    n = view.player_count
    alphas = config.alpha_vector(n)
    d = config.damping

    def updated(i: int, current: StrategyProfile) -> np.ndarray:
        new = soft_power(view.log_action_values(current, i), alphas[i])
        if d:
            new = (1.0 - d) * new + d * current[i]
            new = new / new.sum()  # guard against drift in long damped runs
        return new

    if config.update_order == "synchronous":
        return StrategyProfile(tuple(updated(i, profile) for i in range(n)))
    dists = list(profile.distributions)
    for i in range(n):
        dists[i] = updated(i, StrategyProfile(tuple(dists)))
    return StrategyProfile(tuple(dists))


def epsilon_gap(view, profile: StrategyProfile) -> float:
    """Best unilateral improvement in expected utility, transformed scale."""
    worst = 0.0
    for i in range(view.player_count):
        values = view.action_values(profile, i)
        worst = max(worst, float(values.max() - profile[i] @ values))
    return worst


def raw_epsilon_gap(game, profile: StrategyProfile) -> float:
    """Best unilateral improvement in expected payoff on the raw scale."""
    worst = 0.0
    for i in range(game.player_count):
        values = raw_action_values(game, profile, i)
        worst = max(worst, float(values.max() - profile[i] @ values))
    return worst


def _iterate(view, config: DynamicsConfig, start: StrategyProfile):
    profile = start
    residual = math.inf
    for iteration in range(1, config.max_iterations + 1):
        new = soft_response_step(view, profile, config)
        residual = new.distance(profile)
        profile = new
        if residual <= config.tolerance:
            return profile, iteration, residual, True
    return profile, config.max_iterations, residual, False


def build_report(
    view,
    profile: StrategyProfile,
    converged: bool,
    iterations: int,
    residual: float,
    used_damping_retry: bool = False,
) -> EquilibriumReport:
    game = view.game
    payoffs = tuple(
        float(profile[i] @ raw_action_values(game, profile, i))
        for i in range(game.player_count)
    )
    return EquilibriumReport(
        profile=profile,
        converged=converged,
        iterations=iterations,
        per_player_payoff=payoffs,
        overall=float(sum(payoffs)),
        epsilon_gap=epsilon_gap(view, profile),
        raw_epsilon_gap=raw_epsilon_gap(game, profile),
        residual=residual,
        used_damping_retry=used_damping_retry,
    )


def find_equilibrium(
    view,
    config: DynamicsConfig | None = None,
    initial_profile: StrategyProfile | None = None,
    seed: int | None = None,
) -> EquilibriumReport:
    """Iterate the soft-response map to a fixed point.

    The start is ``initial_profile`` if given, else a seeded random interior
    point when ``seed`` is set, else uniform.  A run that fails to converge is
    retried once with damping 0.5 before being reported as non-convergent;
    non-convergence is an outcome, not an error.
    """
    config = config or DynamicsConfig()
    if initial_profile is not None:
        start = initial_profile
    elif seed is not None:
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        start = StrategyProfile.random_interior(view.action_counts, rng)
    else:
        start = StrategyProfile.uniform(view.action_counts)

    profile, iterations, residual, converged = _iterate(view, config, start)
    retried = False
    if not converged and config.damping != RETRY_DAMPING:
        retried = True
        damped = replace(config, damping=RETRY_DAMPING)
        profile, iterations, residual, converged = _iterate(view, damped, start)
    return build_report(view, profile, converged, iterations, residual, retried)


# ---------------------------------------------------------------------------
# alpha sweeps


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    restart: int
    report: EquilibriumReport


@dataclass(frozen=True, eq=False)
class SweepTable:
    player_count: int
    rows: tuple[SweepRow, ...]

    def header(self) -> list[str]:
        payoff_cols = [f"payoff_{i}" for i in range(self.player_count)]
        return ["alpha", "restart", "converged", "iterations", "epsilon", "overall"] + payoff_cols

    def to_csv(self) -> str:
        lines = [",".join(self.header())]
        for row in self.rows:
            rep = row.report
            cells = [
                csv_number(row.alpha),
                str(row.restart),
                "true" if rep.converged else "false",
                str(rep.iterations),
                csv_number(rep.epsilon_gap),
                csv_number(rep.overall),
            ] + [csv_number(p) for p in rep.per_player_payoff]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def csv_number(x: float) -> str:
    """Shortest round-trip decimal form; infinities render as 'inf'."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def child_seed(master_seed: int, *key: int) -> np.random.SeedSequence:
    """Deterministic per-task seed derived from a master seed and an index key."""
    return np.random.SeedSequence(master_seed, spawn_key=tuple(key))


def sweep_alpha(
    game,
    transform: UtilityTransform,
    alpha_grid: Sequence[float],
    restarts: int,
    master_seed: int,
    base_config: DynamicsConfig | None = None,
) -> SweepTable:
    """find_equilibrium from seeded random starts for every alpha in the grid."""
    if len(alpha_grid) == 0:
        raise ValueError("alpha grid must be nonempty")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts!r}")
    base = base_config or DynamicsConfig()
    view = transform_utilities(game, transform)
    rows = []
    for alpha_index, alpha in enumerate(alpha_grid):
        config = replace(base, alpha=float(alpha), transform=transform)
        for k in range(restarts):
            rng = np.random.default_rng(child_seed(master_seed, alpha_index, k))
            start = StrategyProfile.random_interior(view.action_counts, rng)
            report = find_equilibrium(view, config, initial_profile=start)
            rows.append(SweepRow(alpha=float(alpha), restart=k, report=report))
    return SweepTable(player_count=view.player_count, rows=tuple(rows))
