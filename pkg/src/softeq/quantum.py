"""Imaginary-time wavefunction dynamics: the dissipative continuous-time dual.

Each player holds a real nonnegative amplitude vector over its actions,
normalized to unit L2.  The per-action energies seen by a player are the
joint objective averaged over everyone else's squared amplitudes; explicit
Euler steps followed by renormalization contract each player onto the ground
state of its (diagonal) effective Hamiltonian.  Objectives are minimization
problems; a game is converted by negating its payoffs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import csv_number
from .games import NormalFormGame, _expected_over_opponents, _frozen_array, build_normal_form

NORM_ATOL = 1e-10


class StepSizeError(ValueError):
    """Euler step would break positivity; carries a workable smaller dt."""

    def __init__(self, message: str, suggested_dt: float):
        super().__init__(message)
        self.suggested_dt = suggested_dt


@dataclass(frozen=True, eq=False)
class WavefunctionState:
    """Per-player nonnegative amplitudes with unit L2 norm, plus elapsed time."""

    amplitudes: tuple[np.ndarray, ...]
    time: float = 0.0

    def __post_init__(self) -> None:
        amps = tuple(_frozen_array(a) for a in self.amplitudes)
        for i, psi in enumerate(amps):
            if psi.ndim != 1 or psi.size == 0:
                raise ValueError(f"player {i}: amplitudes must form a nonempty vector")
            if not np.isfinite(psi).all() or (psi < 0).any():
                raise ValueError(f"player {i}: amplitudes must be finite and nonnegative")
            norm = float(np.sqrt((psi**2).sum()))
            if abs(norm - 1.0) > NORM_ATOL:
                raise ValueError(f"player {i}: L2 norm {norm!r} is not 1")
        if self.time < 0:
            raise ValueError(f"time must be nonnegative, got {self.time!r}")
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.amplitudes[i]

    @property
    def action_counts(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.amplitudes)

    def squared_masses(self) -> tuple[np.ndarray, ...]:
        return tuple(a**2 for a in self.amplitudes)

    @classmethod
    def uniform(cls, action_counts: Sequence[int]) -> "WavefunctionState":
        return cls(tuple(np.full(k, 1.0 / math.sqrt(k)) for k in action_counts))


@dataclass(frozen=True)
class QuantumConfig:
    """hbar sets the timescale; dt defaults to 0.01 * hbar and must stay below hbar."""

    hbar: float = 1.0
    dt: float | None = None
    max_time: float = 100.0
    residual_tolerance: float = 1e-8

    def __post_init__(self) -> None:
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")
        if not self.max_time > 0:
            raise ValueError(f"max_time must be positive, got {self.max_time!r}")
        if not self.residual_tolerance > 0:
            raise ValueError(
                f"residual_tolerance must be positive, got {self.residual_tolerance!r}"
            )
        if self.dt is not None and not 0 < self.dt < self.hbar:
            raise ValueError(
                f"dt must satisfy 0 < dt < hbar, got dt={self.dt!r}, hbar={self.hbar!r}"
            )

    @property
    def step_size(self) -> float:
        return self.dt if self.dt is not None else 0.01 * self.hbar


@dataclass(frozen=True)
class TrajectoryPoint:
    time: float
    player: int
    rayleigh: float
    residual: float
    entropy: float


@dataclass(frozen=True, eq=False)
class StationaryReport:
    state: WavefunctionState
    lambdas: tuple[float, ...]
    residuals: tuple[float, ...]
    converged: bool
    trajectory: tuple[TrajectoryPoint, ...] = ()


def objective_from_game(game: NormalFormGame) -> NormalFormGame:
    """Negate payoffs: a maximization game becomes a minimization objective."""
    return build_normal_form(game.action_counts, [-t for t in game.payoffs])


def effective_field(objective: NormalFormGame, state: WavefunctionState, i: int) -> np.ndarray:
    """Per-action energy of player i, averaged over others' squared amplitudes."""
    return _expected_over_opponents(objective.payoffs[i], state.squared_masses(), i)


def all_fields(objective: NormalFormGame, state: WavefunctionState) -> tuple[np.ndarray, ...]:
    return tuple(effective_field(objective, state, i) for i in range(objective.player_count))


def rayleigh_value(psi: np.ndarray, field: np.ndarray) -> float:
    return float(field @ (psi**2))


def eigen_residual(state: WavefunctionState, fields: Sequence[np.ndarray]) -> tuple[float, ...]:
    """L2 norm of (H_i - lambda_i) psi_i per player, lambda_i the Rayleigh value."""
    out = []
    for psi, field in zip(state.amplitudes, fields, strict=True):
        lam = rayleigh_value(psi, field)
        out.append(float(np.linalg.norm(field * psi - lam * psi)))
    return tuple(out)


def imaginary_time_step(
    objective: NormalFormGame, state: WavefunctionState, config: QuantumConfig
) -> WavefunctionState:
    """One synchronous Euler step psi <- psi * (1 - dt*e/(hbar*Z)), renormalized."""
    dt = config.step_size
    new_amps = []
    for i, psi in enumerate(state.amplitudes):
        field = effective_field(objective, state, i)
        z = float((psi**2).sum())
        factors = 1.0 - dt * field / (config.hbar * z)
        if ((psi > 0) & (factors <= 0)).any():
            peak = float(field.max())
            suggested = 0.5 * config.hbar * z / peak
            raise StepSizeError(
                f"player {i}: step of dt={dt!r} drives amplitudes non-positive "
                f"(max field {peak!r}); try dt <= {suggested!r}",
                suggested_dt=suggested,
            )
        scaled = psi * factors
        norm = float(np.sqrt((scaled**2).sum()))
        if not norm > 0:
            peak = float(field.max())
            suggested = 0.5 * config.hbar * z / peak
            raise StepSizeError(
                f"player {i}: step of dt={dt!r} produced a non-positive norm; "
                f"try dt <= {suggested!r}",
                suggested_dt=suggested,
            )
        new_amps.append(scaled / norm)
    return WavefunctionState(tuple(new_amps), time=state.time + dt)


def distribution_entropy(weights: np.ndarray) -> float:
    """Shannon entropy (nats) of a probability vector; 0 log 0 = 0."""
    w = weights[weights > 0]
    return float(-(w * np.log(w)).sum())


def evolve_to_stationary(
    objective: NormalFormGame,
    initial_state: WavefunctionState | None = None,
    config: QuantumConfig | None = None,
    record_every: int = 0,
) -> StationaryReport:
    """Step until every eigen-residual is within tolerance or time runs out.

    ``record_every`` > 0 samples a trajectory point per player every that many
    steps (plus the final state) for diagnostic CSV output.
    """
    config = config or QuantumConfig()
    state = initial_state or WavefunctionState.uniform(objective.action_counts)
    trajectory: list[TrajectoryPoint] = []

    def snapshot(fields) -> tuple[tuple[float, ...], tuple[float, ...]]:
        lams = tuple(rayleigh_value(psi, f) for psi, f in zip(state.amplitudes, fields))
        residuals = eigen_residual(state, fields)
        return lams, residuals

    def record(lams, residuals) -> None:
        for i, (lam, res) in enumerate(zip(lams, residuals)):
            trajectory.append(
                TrajectoryPoint(
                    time=state.time,
                    player=i,
                    rayleigh=lam,
                    residual=res,
                    entropy=distribution_entropy(state.amplitudes[i] ** 2),
                )
            )

    fields = all_fields(objective, state)
    lams, residuals = snapshot(fields)
    if record_every > 0:
        record(lams, residuals)
    steps = 0
    while max(residuals) > config.residual_tolerance and state.time < config.max_time:
        state = imaginary_time_step(objective, state, config)
        steps += 1
        fields = all_fields(objective, state)
        lams, residuals = snapshot(fields)
        if record_every > 0 and steps % record_every == 0:
            record(lams, residuals)
    converged = max(residuals) <= config.residual_tolerance
    if record_every > 0 and (steps % record_every) != 0:
        record(lams, residuals)
    return StationaryReport(
        state=state,
        lambdas=lams,
        residuals=residuals,
        converged=converged,
        trajectory=tuple(trajectory),
    )


def trajectory_csv(points: Sequence[TrajectoryPoint]) -> str:
    lines = ["time,player,lambda,residual,entropy"]
    for p in points:
        lines.append(
            ",".join(
                [
                    csv_number(p.time),
                    str(p.player),
                    csv_number(p.rayleigh),
                    csv_number(p.residual),
                    csv_number(p.entropy),
                ]
            )
        )
    return "\n".join(lines) + "\n"
