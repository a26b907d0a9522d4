"""Random pairwise-payoff societies and scalable equilibrium sampling.

A society is a graphical game on an Erdos-Renyi graph: every present edge
carries one pairwise payoff function, read from each endpoint's side, with
entries drawn uniformly from a fixed interval.  Under the exponential
utility transform the expected action values factorize over neighbors, so
soft dynamics cost O(degree * actions^2) per player instead of touching the
joint action space.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .dynamics import (
    DynamicsConfig,
    EquilibriumReport,
    RETRY_DAMPING,
    build_report,
    child_seed,
    find_equilibrium,
)
from .games import (
    GraphicalGame,
    StrategyProfile,
    UtilityTransform,
    build_graphical,
    raw_action_values,
    unilateral_payoffs,
)
from .nash import best_response_dynamics


@dataclass(frozen=True)
class SocietySpec:
    population: int
    actions_per_individual: int
    average_neighbors: float
    payoff_low: float = -0.6
    payoff_high: float = 0.4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population < 1:
            raise ValueError(f"population must be positive, got {self.population!r}")
        if self.actions_per_individual < 1:
            raise ValueError(
                f"actions_per_individual must be positive, got {self.actions_per_individual!r}"
            )
        if not 0 <= self.average_neighbors < self.population:
            raise ValueError(
                f"average_neighbors must lie in [0, population), got {self.average_neighbors!r}"
            )
        if not self.payoff_low < self.payoff_high:
            raise ValueError(
                f"payoff interval is empty: [{self.payoff_low!r}, {self.payoff_high!r}]"
            )


def generate_society(spec: SocietySpec) -> GraphicalGame:
    """Draw the neighbor graph and pairwise payoff tables for a society.

    Every unordered pair joins the edge set independently with probability
    average_neighbors/(population-1).  Each edge carries a single pairwise
    payoff function drawn uniformly from [payoff_low, payoff_high]; the two
    directed tables are that function read from either side (f_ji = f_ij^T),
    so neighbors value a joint action identically.  Fully deterministic in
    the seed.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    n = spec.population
    k = spec.actions_per_individual
    if n < 2:
        return build_graphical([k] * n, [], {})
    left, right = np.triu_indices(n, k=1)
    probability = spec.average_neighbors / (n - 1)
    mask = rng.random(left.size) < probability
    left, right = left[mask], right[mask]
    draws = rng.uniform(spec.payoff_low, spec.payoff_high, size=(left.size, k, k))
    tables = {}
    for e, (i, j) in enumerate(zip(left.tolist(), right.tolist())):
        tables[(i, j)] = draws[e]
        tables[(j, i)] = draws[e].T
    return build_graphical([k] * n, list(zip(left.tolist(), right.tolist())), tables)


def log_local_action_values(
    society: GraphicalGame, profile: StrategyProfile, i: int, hbar: float
) -> np.ndarray:
    """log Psi_i under exponential utilities, as a sum of per-neighbor terms."""
    out = np.zeros(society.action_counts[i])
    for j in society.neighbors[i]:
        scaled = society.tables[(i, j)] / hbar
        out += logsumexp(scaled, axis=1, b=profile[j][None, :])
    return out


def local_action_values(
    society: GraphicalGame, profile: StrategyProfile, i: int, transform: UtilityTransform
) -> np.ndarray:
    """Expected transformed utility of each of player i's actions.

    Mixed profiles require the exponential transform, where the expectation
    factorizes exactly over neighbors.  Point-mass profiles work under any
    transform (the expectation degenerates to a single joint action).
    """
    if transform.kind == "exponential":
        return np.exp(log_local_action_values(society, profile, i, transform.hbar))
    if profile.is_point_mass():
        joint = profile.to_joint_action()
        return transform.apply(unilateral_payoffs(society, joint, i))
    raise ValueError(
        f"transform {transform.describe()} does not factorize over neighbors; "
        "mixed society profiles require the exponential transform"
    )


@dataclass(frozen=True, eq=False)
class FactorizedSocietyView:
    """Duck-compatible with UtilityView, but pays only pairwise costs."""

    game: GraphicalGame
    transform: UtilityTransform

    def __post_init__(self) -> None:
        if self.transform.kind != "exponential":
            raise ValueError("factorized society evaluation requires the exponential transform")

    @property
    def player_count(self) -> int:
        return self.game.player_count

    @property
    def action_counts(self) -> tuple[int, ...]:
        return self.game.action_counts

    def action_values(self, profile: StrategyProfile, i: int) -> np.ndarray:
        return local_action_values(self.game, profile, i, self.transform)

    def log_action_values(self, profile: StrategyProfile, i: int) -> np.ndarray:
        return log_local_action_values(self.game, profile, i, self.transform.hbar)


def degree_histogram(society: GraphicalGame) -> list[tuple[int, int]]:
    """(degree, individual count) pairs, sorted by degree."""
    counts = Counter(len(nbrs) for nbrs in society.neighbors)
    return sorted(counts.items())


# ---------------------------------------------------------------------------
# equilibrium sampling


def society_equilibrium_sample(
    society: GraphicalGame,
    config: DynamicsConfig,
    restarts: int,
    master_seed: int,
) -> list[EquilibriumReport]:
    """Equilibrium reports from `restarts` seeded random starts.

    Finite alpha runs soft dynamics through the factorized view (exponential
    transform required).  alpha = inf instead walks sequential best response
    on the raw payoffs from a random pure start and wraps the outcome as a
    point-mass report.  Restart k draws its start from a child seed of
    (master_seed, k); non-convergent runs are flagged, not dropped.
    """
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts!r}")
    if config.is_best_response_limit():
        return [
            _best_response_report(society, config, master_seed, k) for k in range(restarts)
        ]
    alphas = config.alpha_vector(society.player_count)
    if any(math.isinf(a) for a in alphas):
        raise ValueError("alpha must be all-finite or all-infinite for society sampling")
    if config.transform.kind != "exponential":
        raise ValueError(
            f"finite-alpha society sampling requires the exponential transform, "
            f"got {config.transform.describe()}"
        )
    counts = set(society.action_counts)
    starts = []
    for k in range(restarts):
        rng = np.random.default_rng(child_seed(master_seed, k))
        starts.append(StrategyProfile.random_interior(society.action_counts, rng))
    view = FactorizedSocietyView(society, config.transform)
    if len(counts) == 1 and society.player_count > 1:
        return _batched_soft_sample(society, view, config, starts)
    return [find_equilibrium(view, config, initial_profile=start) for start in starts]


def _best_response_report(
    society: GraphicalGame, config: DynamicsConfig, master_seed: int, k: int
) -> EquilibriumReport:
    rng = np.random.default_rng(child_seed(master_seed, k))
    counts = np.asarray(society.action_counts)
    start = rng.integers(0, counts)
    outcome = best_response_dynamics(society, start, max_steps=config.max_iterations)
    profile = StrategyProfile.point_mass(society.action_counts, outcome.joint_action)
    converged = outcome.kind == "equilibrium"
    payoffs = tuple(
        float(profile[i] @ raw_action_values(society, profile, i))
        for i in range(society.player_count)
    )
    gap = 0.0
    if not converged:
        worst = 0.0
        for i in range(society.player_count):
            values = unilateral_payoffs(society, outcome.joint_action, i)
            worst = max(worst, float(values.max() - values[outcome.joint_action[i]]))
        gap = worst
    return EquilibriumReport(
        profile=profile,
        converged=converged,
        iterations=outcome.steps,
        per_player_payoff=payoffs,
        overall=float(sum(payoffs)),
        epsilon_gap=gap,
        raw_epsilon_gap=gap,
        residual=0.0 if converged else math.inf,
    )


class _EdgeArrays:
    """Directed edge tables flattened for vectorized sweeps (uniform actions)."""

    def __init__(self, society: GraphicalGame, hbar: float):
        n = society.player_count
        src, dst, mats = [], [], []
        for i, j in society.edges:
            src += [i, j]
            dst += [j, i]
            mats += [society.tables[(i, j)], society.tables[(j, i)]]
        if mats:
            order = np.argsort(np.asarray(src), kind="stable")
            self.src = np.asarray(src)[order]
            self.dst = np.asarray(dst)[order]
            self.log_factors = np.stack([mats[e] for e in order]) / hbar
        else:
            k = society.action_counts[0]
            self.src = np.zeros(0, dtype=int)
            self.dst = np.zeros(0, dtype=int)
            self.log_factors = np.zeros((0, k, k))
        bounds = np.searchsorted(self.src, np.arange(n + 1))
        self.segment_starts = bounds[:-1]
        self.isolated = bounds[:-1] == bounds[1:]
        self.player_slices = [slice(bounds[i], bounds[i + 1]) for i in range(n)]


def _batched_log_values(edges: _EdgeArrays, P: np.ndarray) -> np.ndarray:
    """log Psi for all restarts and players at once; (R, n, actions)."""
    R, n, k = P.shape
    if edges.src.size == 0:
        return np.zeros((R, n, k))
    peak = edges.log_factors.max(axis=2, keepdims=True)
    shifted = np.exp(edges.log_factors - peak)
    contrib = np.einsum("eab,reb->rea", shifted, P[:, edges.dst])
    logc = np.log(contrib) + peak[None, :, :, 0]
    # zero pad row keeps reduceat segment starts in bounds when trailing
    # players are isolated; their garbage rows are overwritten just after
    padded = np.concatenate([logc, np.zeros((R, 1, k))], axis=1)
    out = np.add.reduceat(padded, edges.segment_starts, axis=1)
    out[:, edges.isolated] = 0.0
    return out


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=-1, keepdims=True)


def _batched_soft_sample(
    society: GraphicalGame,
    view: FactorizedSocietyView,
    config: DynamicsConfig,
    starts: Sequence[StrategyProfile],
) -> list[EquilibriumReport]:
    """Soft dynamics for all restarts at once; per-restart math is unchanged."""
    edges = _EdgeArrays(society, config.transform.hbar)
    n = society.player_count
    alphas = np.asarray(config.alpha_vector(n))
    P0 = np.stack([np.stack(s.distributions) for s in starts])

    def run(P_init: np.ndarray, damping: float):
        P = P_init.copy()
        R = P.shape[0]
        done_iter = np.full(R, -1)
        done_res = np.full(R, math.inf)
        snapshots: dict[int, np.ndarray] = {}
        for iteration in range(1, config.max_iterations + 1):
            if config.update_order == "synchronous":
                z = alphas[None, :, None] * _batched_log_values(edges, P)
                new = _softmax_rows(z)
                uniform_rows = alphas == 0
                if uniform_rows.any():
                    new[:, uniform_rows] = 1.0 / P.shape[2]
                if damping:
                    new = (1 - damping) * new + damping * P
                    new /= new.sum(axis=2, keepdims=True)
                delta = np.abs(new - P).max(axis=(1, 2))
                P = new
            else:
                delta = np.zeros(R)
                for i in range(n):
                    sl = edges.player_slices[i]
                    if alphas[i] == 0 or sl.start == sl.stop:
                        new = np.full((R, P.shape[2]), 1.0 / P.shape[2])
                    else:
                        peak = edges.log_factors[sl].max(axis=2, keepdims=True)
                        shifted = np.exp(edges.log_factors[sl] - peak)
                        contrib = np.einsum("eab,reb->rea", shifted, P[:, edges.dst[sl]])
                        logpsi = (np.log(contrib) + peak[None, :, :, 0]).sum(axis=1)
                        new = _softmax_rows(alphas[i] * logpsi)
                    if damping:
                        new = (1 - damping) * new + damping * P[:, i]
                        new /= new.sum(axis=1, keepdims=True)
                    delta = np.maximum(delta, np.abs(new - P[:, i]).max(axis=1))
                    P[:, i] = new
            newly = (done_iter < 0) & (delta <= config.tolerance)
            for r in np.flatnonzero(newly):
                done_iter[r] = iteration
                done_res[r] = delta[r]
                snapshots[r] = P[r].copy()
            if (done_iter >= 0).all():
                break
        for r in range(P.shape[0]):
            if done_iter[r] < 0:
                done_iter[r] = config.max_iterations
                done_res[r] = delta[r]
                snapshots[r] = P[r].copy()
        return done_iter, done_res, snapshots

    iters, residuals, profiles = run(P0, config.damping)
    reports: list[EquilibriumReport] = []
    retry_candidates = [r for r in range(len(starts)) if iters[r] >= config.max_iterations
                        and residuals[r] > config.tolerance]
    retried: dict[int, tuple[int, float, np.ndarray]] = {}
    if retry_candidates and config.damping != RETRY_DAMPING:
        subset = P0[retry_candidates]
        r_iters, r_res, r_profiles = run(subset, RETRY_DAMPING)
        for pos, r in enumerate(retry_candidates):
            retried[r] = (int(r_iters[pos]), float(r_res[pos]), r_profiles[pos])
    for r in range(len(starts)):
        if r in retried:
            iteration, residual, dists = retried[r]
            used_retry = True
        else:
            iteration, residual, dists = int(iters[r]), float(residuals[r]), profiles[r]
            used_retry = False
        profile = StrategyProfile(tuple(dists))
        reports.append(
            build_report(
                view,
                profile,
                converged=residual <= config.tolerance,
                iterations=iteration,
                residual=residual,
                used_damping_retry=used_retry,
            )
        )
    return reports


def society_config(
    alpha: float,
    hbar: float = 1.0,
    update_order: str = "sequential",
    **overrides,
) -> DynamicsConfig:
    """Config preset for society sampling.

    Sequential updates are the default here: synchronous soft responses at
    large alpha flip neighbor pairs in lockstep and two-cycle instead of
    settling, while the sequential map shares the same fixed points and
    converges in a few dozen sweeps at alpha around 30.
    """
    base = DynamicsConfig(
        alpha=alpha,
        transform=UtilityTransform.exponential(hbar),
        update_order=update_order,
    )
    return replace(base, **overrides) if overrides else base
