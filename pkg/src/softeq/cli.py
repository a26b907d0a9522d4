"""Command line interface.

Five subcommands: ``solve`` prints one equilibrium report as JSON, while
``sweep``, ``society``, ``quantum`` and ``nash`` run a full experiment and
write results.csv, summary.json and manifest.json (plus plot.svg for the
first two) into the output directory.  All failures exit with status 2 and
a diagnostic on stderr; JSON parse errors include file, line and column.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .dynamics import DynamicsConfig, find_equilibrium
from .experiments import ExperimentSpec, run_experiment
from .games import (
    GraphicalGame,
    induce_normal_form,
    load_game,
    parse_transform,
    transform_utilities,
)
from .quantum import QuantumConfig
from .society import FactorizedSocietyView, SocietySpec, degree_histogram, generate_society


class CliError(Exception):
    pass


def parse_alpha_list(text: str) -> tuple[float, ...]:
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            values.append(math.inf if part == "inf" else float(part))
        except ValueError:
            raise CliError(f"bad alpha value {part!r}") from None
    if not values:
        raise CliError(f"no alpha values in {text!r}")
    return tuple(values)


def _load_game_cli(path):
    try:
        return load_game(path)
    except json.JSONDecodeError as exc:
        exc.source_name = str(path)
        raise
    except FileNotFoundError:
        raise CliError(f"game file not found: {path}") from None


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value


def _dynamics_config(args, alpha, transform) -> DynamicsConfig:
    return DynamicsConfig(
        alpha=alpha,
        transform=transform,
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
        damping=args.damping,
        update_order=args.update_order,
    )


def _print_artifacts(paths: dict[str, str]) -> None:
    for name in sorted(paths):
        print(f"{name}: {paths[name]}")


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_solve(args) -> int:
    if math.isinf(args.alpha):
        raise CliError("alpha=inf is exact best response; use the nash subcommand")
    transform = parse_transform(args.transform)
    game = _load_game_cli(args.game)
    if isinstance(game, GraphicalGame):
        if transform.kind == "exponential":
            view = FactorizedSocietyView(game, transform)
        else:
            view = transform_utilities(induce_normal_form(game), transform)
    else:
        view = transform_utilities(game, transform)
    config = _dynamics_config(args, args.alpha, transform)
    report = find_equilibrium(view, config, seed=args.seed)
    payload = {
        "converged": report.converged,
        "iterations": report.iterations,
        "per_player_payoff": list(report.per_player_payoff),
        "overall": report.overall,
        "epsilon_gap": _json_safe(report.epsilon_gap),
        "raw_epsilon_gap": _json_safe(report.raw_epsilon_gap),
        "residual": _json_safe(report.residual),
        "used_damping_retry": report.used_damping_retry,
        "profile": [[float(v) for v in dist] for dist in report.profile.distributions],
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def _cmd_sweep(args) -> int:
    transform = parse_transform(args.transform)
    spec = ExperimentSpec(
        kind="sweep",
        game_path=args.game,
        alpha_grid=parse_alpha_list(args.alpha),
        restarts=args.restarts,
        master_seed=args.seed,
        dynamics=_dynamics_config(args, 1.0, transform),
    )
    _print_artifacts(run_experiment(spec, args.out))
    return 0


def _cmd_society(args) -> int:
    society_spec = SocietySpec(
        population=args.population,
        actions_per_individual=args.actions,
        average_neighbors=args.avg_neighbors,
        payoff_low=args.payoff_low,
        payoff_high=args.payoff_high,
        seed=args.society_seed,
    )
    transform = parse_transform(f"exp:{args.hbar}")
    spec = ExperimentSpec(
        kind="society",
        society=society_spec,
        alpha_grid=parse_alpha_list(args.alpha),
        restarts=args.restarts,
        master_seed=args.seed,
        dynamics=_dynamics_config(args, 1.0, transform),
    )
    _print_artifacts(run_experiment(spec, args.out))
    if args.degree_histogram:
        print("degree,count")
        for degree, count in degree_histogram(generate_society(society_spec)):
            print(f"{degree},{count}")
    return 0


def _cmd_quantum(args) -> int:
    spec = ExperimentSpec(
        kind="quantum",
        game_path=args.game,
        quantum=QuantumConfig(
            hbar=args.hbar,
            dt=args.dt,
            max_time=args.max_time,
            residual_tolerance=args.residual_tolerance,
        ),
        maximize_objective=args.maximize,
        record_every=args.record_every,
    )
    _print_artifacts(run_experiment(spec, args.out))
    return 0


def _cmd_nash(args) -> int:
    spec = ExperimentSpec(kind="nash", game_path=args.game)
    _print_artifacts(run_experiment(spec, args.out))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softeq",
        description="soft best-response equilibria, societies and stationary states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    dyn = argparse.ArgumentParser(add_help=False)
    dyn.add_argument("--transform", default="identity",
                     help="identity, shift:<offset> or exp:<hbar>")
    dyn.add_argument("--tolerance", type=float, default=1e-9)
    dyn.add_argument("--max-iterations", type=int, default=10000)
    dyn.add_argument("--damping", type=float, default=0.0)
    dyn.add_argument("--update-order", choices=("synchronous", "sequential"),
                     default="synchronous")

    p = sub.add_parser("solve", parents=[dyn],
                       help="find one soft equilibrium and print the report")
    p.add_argument("--game", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None,
                   help="random interior start; omit for the uniform start")
    p.add_argument("--out", default=None, help="also write the report JSON here")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", parents=[dyn],
                       help="restarted runs across an alpha grid")
    p.add_argument("--game", required=True)
    p.add_argument("--alpha", required=True, help="comma separated, e.g. 0,0.5,1,2")
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("society", parents=[dyn],
                       help="sample equilibria of a random pairwise society")
    p.add_argument("--population", type=int, default=101)
    p.add_argument("--actions", type=int, default=10)
    p.add_argument("--avg-neighbors", type=float, default=10.0)
    p.add_argument("--payoff-low", type=float, default=-0.6)
    p.add_argument("--payoff-high", type=float, default=0.4)
    p.add_argument("--society-seed", type=int, default=0)
    p.add_argument("--alpha", default="30,inf", help="comma separated; inf allowed")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--degree-histogram", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_society, update_order="sequential")

    p = sub.add_parser("quantum", parents=[],
                       help="imaginary-time relaxation to a stationary state")
    p.add_argument("--game", required=True)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--max-time", type=float, default=100.0)
    p.add_argument("--residual-tolerance", type=float, default=1e-8)
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--maximize", action="store_true",
                   help="treat the file as payoffs to maximize, not energies")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_quantum)

    p = sub.add_parser("nash", parents=[],
                       help="enumerate exact equilibria of a two-player game")
    p.add_argument("--game", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_nash)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        name = getattr(exc, "source_name", "<json>")
        print(f"{name}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
        return 2
    except (CliError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
