"""Soft best-response equilibria for games, societies and quantum duals."""

from pathlib import Path as _Path

__version__ = "0.1.0"


def data_path(name: str) -> _Path:
    """Absolute path of a bundled example game file."""
    return _Path(__file__).resolve().parent / "data" / name

from .games import (
    GraphicalGame,
    NormalFormGame,
    StrategyProfile,
    UtilityTransform,
    UtilityView,
    build_graphical,
    build_normal_form,
    from_bimatrix,
    game_from_json,
    game_to_json,
    induce_normal_form,
    load_game,
    overall_payoff,
    parse_transform,
    per_player_expected_payoff,
    raw_action_values,
    save_game,
    transform_utilities,
    unilateral_payoffs,
)
from .dynamics import (
    DynamicsConfig,
    EquilibriumReport,
    SweepRow,
    SweepTable,
    child_seed,
    epsilon_gap,
    find_equilibrium,
    raw_epsilon_gap,
    soft_power,
    soft_response_step,
    sweep_alpha,
)
from .nash import (
    PureOutcome,
    best_response_dynamics,
    enumerate_pure_nash,
    mixed_nash_table,
    support_enumeration_mixed_nash,
    verify_epsilon_nash,
)
from .quantum import (
    QuantumConfig,
    StationaryReport,
    StepSizeError,
    WavefunctionState,
    distribution_entropy,
    evolve_to_stationary,
    imaginary_time_step,
    objective_from_game,
    trajectory_csv,
)
from .society import (
    FactorizedSocietyView,
    SocietySpec,
    degree_histogram,
    generate_society,
    local_action_values,
    society_config,
    society_equilibrium_sample,
)
from .experiments import (
    ExperimentSpec,
    SummaryStats,
    load_experiment_spec,
    run_experiment,
    summarize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
