"""Reproducible experiment runs: spec in, deterministic artifact files out.

Every experiment kind writes the same trio into its output directory:
results.csv with one row per run, summary.json with aggregate statistics,
and manifest.json embedding the full spec so the run can be reproduced
from the manifest alone.  Sweep and society runs add plot.svg.  Reruns of
the same spec produce byte-identical CSV and JSON.
"""

from __future__ import annotations

import dataclasses
import json
import math
import platform
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from .dynamics import (
    DynamicsConfig,
    SweepRow,
    SweepTable,
    csv_number,
    sweep_alpha,
)
from .games import (
    GraphicalGame,
    NormalFormGame,
    UtilityTransform,
    induce_normal_form,
    load_game,
    parse_transform,
)
from .nash import mixed_nash_table, support_enumeration_mixed_nash, enumerate_pure_nash
from .quantum import QuantumConfig, evolve_to_stationary, objective_from_game, trajectory_csv
from .society import SocietySpec, degree_histogram, generate_society, society_equilibrium_sample

EXPERIMENT_KINDS = ("sweep", "society", "quantum", "nash")
MANIFEST_FORMAT = 1


@dataclass(frozen=True)
class SummaryStats:
    """Population statistics (variance divides by count, not count - 1)."""

    count: int
    mean: float
    variance: float
    minimum: float
    maximum: float

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "min": self.minimum,
            "max": self.maximum,
        }


def summarize(values: Sequence[float]) -> SummaryStats:
    data = np.asarray(list(values), dtype=float)
    if data.size == 0:
        raise ValueError("cannot summarize an empty sequence")
    if not np.isfinite(data).all():
        raise ValueError("cannot summarize non-finite values")
    return SummaryStats(
        count=int(data.size),
        mean=float(data.mean()),
        variance=float(data.var()),
        minimum=float(data.min()),
        maximum=float(data.max()),
    )


# ---------------------------------------------------------------------------
# spec serialization


def _alpha_to_json(alpha):
    if isinstance(alpha, tuple):
        return [_alpha_to_json(a) for a in alpha]
    value = float(alpha)
    return "inf" if math.isinf(value) else value


def _alpha_from_json(raw):
    if isinstance(raw, list):
        return tuple(_alpha_from_json(a) for a in raw)
    return float(raw)


def dynamics_to_json(config: DynamicsConfig) -> dict:
    return {
        "alpha": _alpha_to_json(config.alpha),
        "transform": config.transform.describe(),
        "tolerance": config.tolerance,
        "max_iterations": config.max_iterations,
        "damping": config.damping,
        "update_order": config.update_order,
    }


def dynamics_from_json(data: dict) -> DynamicsConfig:
    return DynamicsConfig(
        alpha=_alpha_from_json(data["alpha"]),
        transform=parse_transform(data["transform"]),
        tolerance=float(data["tolerance"]),
        max_iterations=int(data["max_iterations"]),
        damping=float(data["damping"]),
        update_order=str(data["update_order"]),
    )


def quantum_to_json(config: QuantumConfig) -> dict:
    return {
        "hbar": config.hbar,
        "dt": config.dt,
        "max_time": config.max_time,
        "residual_tolerance": config.residual_tolerance,
    }


def quantum_from_json(data: dict) -> QuantumConfig:
    return QuantumConfig(
        hbar=float(data["hbar"]),
        dt=None if data["dt"] is None else float(data["dt"]),
        max_time=float(data["max_time"]),
        residual_tolerance=float(data["residual_tolerance"]),
    )


@dataclass(frozen=True)
class ExperimentSpec:
    """Complete description of one experiment run.

    The round trip through to_json/from_json is exact, which is what lets a
    manifest reproduce its run.
    """

    kind: str
    game_path: str | None = None
    society: SocietySpec | None = None
    alpha_grid: tuple[float, ...] = ()
    restarts: int = 1
    master_seed: int = 0
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    quantum: QuantumConfig | None = None
    maximize_objective: bool = False
    record_every: int = 10

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.kind in ("sweep", "quantum", "nash") and not self.game_path:
            raise ValueError(f"{self.kind} experiments require game_path")
        if self.kind == "society" and self.society is None:
            raise ValueError("society experiments require a society spec")
        if self.kind in ("sweep", "society") and not self.alpha_grid:
            raise ValueError(f"{self.kind} experiments require a non-empty alpha_grid")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts!r}")
        if self.record_every < 0:
            raise ValueError(f"record_every must be >= 0, got {self.record_every!r}")
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "game_path": self.game_path,
            "society": None if self.society is None else dataclasses.asdict(self.society),
            "alpha_grid": [_alpha_to_json(a) for a in self.alpha_grid],
            "restarts": self.restarts,
            "master_seed": self.master_seed,
            "dynamics": dynamics_to_json(self.dynamics),
            "quantum": None if self.quantum is None else quantum_to_json(self.quantum),
            "maximize_objective": self.maximize_objective,
            "record_every": self.record_every,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentSpec":
        return cls(
            kind=data["kind"],
            game_path=data["game_path"],
            society=None if data["society"] is None else SocietySpec(**data["society"]),
            alpha_grid=tuple(_alpha_from_json(a) for a in data["alpha_grid"]),
            restarts=int(data["restarts"]),
            master_seed=int(data["master_seed"]),
            dynamics=dynamics_from_json(data["dynamics"]),
            quantum=None if data["quantum"] is None else quantum_from_json(data["quantum"]),
            maximize_objective=bool(data["maximize_objective"]),
            record_every=int(data["record_every"]),
        )


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_experiment_spec(path) -> ExperimentSpec:
    data = json.loads(Path(path).read_text())
    if "spec" in data and isinstance(data["spec"], dict):
        data = data["spec"]
    return ExperimentSpec.from_json(data)


# ---------------------------------------------------------------------------
# runners


def _alpha_summaries(table: SweepTable) -> dict:
    groups: dict[str, list] = {}
    for row in table.rows:
        groups.setdefault(csv_number(row.alpha), []).append(row.report)
    out = {}
    for key, reports in groups.items():
        stats = summarize([r.overall for r in reports])
        per_player = np.mean([r.per_player_payoff for r in reports], axis=0)
        out[key] = {
            "restarts": len(reports),
            "converged": sum(1 for r in reports if r.converged),
            "overall": stats.to_json(),
            "per_player_mean": [float(v) for v in per_player],
        }
    return out


def _run_sweep(spec: ExperimentSpec):
    game = load_game(spec.game_path)
    table = sweep_alpha(
        game,
        spec.dynamics.transform,
        spec.alpha_grid,
        spec.restarts,
        spec.master_seed,
        base_config=spec.dynamics,
    )
    summary = {"kind": "sweep", "alphas": _alpha_summaries(table)}
    return table, summary


def _run_society(spec: ExperimentSpec):
    society = generate_society(spec.society)
    rows = []
    for alpha in spec.alpha_grid:
        config = replace(spec.dynamics, alpha=alpha)
        reports = society_equilibrium_sample(society, config, spec.restarts, spec.master_seed)
        rows.extend(SweepRow(alpha, k, report) for k, report in enumerate(reports))
    table = SweepTable(society.player_count, rows)
    summary = {
        "kind": "society",
        "population": spec.society.population,
        "edge_count": len(society.edges),
        "degree_histogram": [[deg, count] for deg, count in degree_histogram(society)],
        "alphas": _alpha_summaries(table),
    }
    return table, summary


def _dense_objective(spec: ExperimentSpec) -> NormalFormGame:
    game = load_game(spec.game_path)
    if isinstance(game, GraphicalGame):
        game = induce_normal_form(game)
    if spec.maximize_objective:
        return objective_from_game(game)
    return game


def _run_quantum(spec: ExperimentSpec):
    objective = _dense_objective(spec)
    config = spec.quantum if spec.quantum is not None else QuantumConfig()
    report = evolve_to_stationary(objective, config=config, record_every=spec.record_every)
    summary = {
        "kind": "quantum",
        "converged": report.converged,
        "final_time": report.state.time,
        "lambda": list(report.lambdas),
        "residual": list(report.residuals),
        "squared_masses": [[float(v) for v in m] for m in report.state.squared_masses()],
    }
    return report, summary


def _run_nash(spec: ExperimentSpec):
    game = load_game(spec.game_path)
    if isinstance(game, GraphicalGame):
        game = induce_normal_form(game)
    profiles = support_enumeration_mixed_nash(game)
    table = mixed_nash_table(game, profiles)
    pure = enumerate_pure_nash(game)
    summary = {
        "kind": "nash",
        "equilibrium_count": len(profiles),
        "pure_joint_actions": [[int(v) for v in joint] for joint in pure],
        "per_player_payoffs": [list(row.report.per_player_payoff) for row in table.rows],
    }
    if table.rows:
        summary["overall"] = summarize([row.report.overall for row in table.rows]).to_json()
    return table, summary


def _manifest(spec: ExperimentSpec, artifacts: Sequence[str]) -> dict:
    return {
        "format": MANIFEST_FORMAT,
        "spec": spec.to_json(),
        "artifacts": sorted(artifacts),
        "seed_derivation": "SeedSequence(master_seed, spawn_key=...) per alpha index and restart",
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "softeq": __version__,
        },
    }


def run_experiment(spec: ExperimentSpec, out_dir) -> dict[str, str]:
    """Run one experiment and write its artifacts; returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "results": out / "results.csv",
        "summary": out / "summary.json",
        "manifest": out / "manifest.json",
    }
    if spec.kind == "sweep":
        table, summary = _run_sweep(spec)
        paths["results"].write_text(table.to_csv())
    elif spec.kind == "society":
        table, summary = _run_society(spec)
        paths["results"].write_text(table.to_csv())
    elif spec.kind == "quantum":
        report, summary = _run_quantum(spec)
        paths["results"].write_text(trajectory_csv(report.trajectory))
        table = None
    else:
        table, summary = _run_nash(spec)
        paths["results"].write_text(table.to_csv())
    if spec.kind in ("sweep", "society"):
        from .plotting import emit_plot

        paths["plot"] = out / "plot.svg"
        emit_plot(table, spec.kind, paths["plot"])
    write_json(paths["summary"], summary)
    write_json(paths["manifest"], _manifest(spec, [p.name for p in paths.values()]))
    return {name: str(path) for name, path in paths.items()}
