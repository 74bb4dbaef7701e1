"""
Benchmark command line.

Commands:
- run <config>: R replications of one experiment
- sweep <config>: the experiment over a log-spaced gamma grid
- fit <config> --horizons ...: log-log regret growth slope

Exit codes: 0 success, 1 feasibility violations recorded, 2 invalid input.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError
from rich.console import Console
from rich.table import Table
from rich import box

from oio_bench.core.config import settings
from oio_bench.core.exceptions import ConfigurationError, IngestionError
from oio_bench.models.experiment import ExperimentConfig
from oio_bench.services import orchestrator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INVALID = 2


def load_config(path: str, seed: Optional[int] = None) -> ExperimentConfig:
    """
    Read and validate a JSON experiment config.

    Raises:
        ConfigurationError: unreadable file or invalid field (the message names it)
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Cannot read config {path}: {e}") from e
    if seed is not None:
        data["seed"] = seed
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        messages = [
            f"{'.'.join(str(part) for part in error['loc']) or '<root>'}: {error['msg']}"
            for error in e.errors()
        ]
        raise ConfigurationError("Invalid config field " + "; ".join(messages)) from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--jobs',
        type=int,
        default=1,
        help='Worker processes for replications (-1 = all available, default: 1)'
    )
    common.add_argument(
        '--seed',
        type=int,
        default=None,
        help='Base seed overriding the config'
    )
    common.add_argument(
        '--output',
        type=str,
        default=None,
        help=f'Output directory (default: config output_dir, then {settings.OUTPUT_DIR})'
    )
    common.add_argument(
        '--no-resume',
        action='store_true',
        help='Recompute replications even when their records exist'
    )
    common.add_argument(
        '--json',
        action='store_true',
        help='Print the result as JSON instead of a table'
    )
    parser = argparse.ArgumentParser(
        prog="oio_bench",
        description="Online inventory optimization benchmark (MaxCOSD, COSD, OSD)"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", parents=[common], help="Run R replications of an experiment")
    run_parser.add_argument("config", help="Path to a JSON experiment config")

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="Sweep gamma over a log-spaced grid")
    sweep_parser.add_argument("config", help="Path to a JSON experiment config")
    sweep_parser.add_argument('--gamma-min', type=float, default=settings.GAMMA_MIN)
    sweep_parser.add_argument('--gamma-max', type=float, default=settings.GAMMA_MAX)
    sweep_parser.add_argument('--points', type=int, default=settings.DEFAULT_GAMMA_POINTS)

    fit_parser = subparsers.add_parser("fit", parents=[common], help="Fit the log-log growth of mean regret in T")
    fit_parser.add_argument("config", help="Path to a JSON experiment config")
    fit_parser.add_argument(
        '--horizons',
        type=int,
        nargs='+',
        required=True,
        help='Horizons T (at least 4 spanning 2 decades recommended)'
    )
    return parser


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.6g}"


def _print_run(console: Console, result: orchestrator.ExperimentResult) -> None:
    summary = result.summary
    table = Table(title=f"Experiment {summary['config_hash'][:12]}", box=box.SIMPLE_HEAVY)
    table.add_column("Replication", justify="right")
    table.add_column("Seed", justify="right")
    table.add_column("R_T", justify="right")
    table.add_column("Bounds", justify="left")
    for entry in summary["per_replication"]:
        if entry["violation"] is not None:
            status = f"[red]infeasible at t={entry['violation']['period']}[/red]"
        else:
            status = ", ".join(
                f"{check['name']} {'ok' if check['satisfied'] else '[red]FAIL[/red]'}"
                for check in entry["bound_checks"]
            )
        table.add_row(str(entry["replication"]), str(entry["seed"]), _fmt(entry["R_T"]), status)
    console.print(table)

    aggregate = summary["aggregate"]
    console.print(
        f"mean R_T = {_fmt(aggregate['mean'])}  stderr = {_fmt(aggregate['stderr'])}  "
        f"violations = {aggregate['violations']}"
    )
    for check in summary["aggregate_checks"]:
        verdict = "[green]ok[/green]" if check["satisfied"] else "[red]FAIL[/red]"
        console.print(f"{check['name']}: observed {_fmt(check['observed'])} vs {_fmt(check['value'])} {verdict}")
    console.print(f"Results written to {result.run_dir}")


def _print_sweep(console: Console, sweep: orchestrator.SweepResult) -> None:
    table = Table(title="Gamma sweep", box=box.SIMPLE_HEAVY)
    table.add_column("gamma", justify="right")
    table.add_column("mean R_T", justify="right")
    table.add_column("stderr", justify="right")
    table.add_column("violations", justify="right")
    for row in sweep.rows:
        table.add_row(f"{row['gamma']:.3e}", _fmt(row["mean"]), _fmt(row["stderr"]), str(row["violations"]))
    console.print(table)
    console.print(f"Plot written to {sweep.plot_path}")


def _print_fit(console: Console, growth: orchestrator.GrowthFitResult) -> None:
    table = Table(title="Regret growth", box=box.SIMPLE_HEAVY)
    table.add_column("T", justify="right")
    table.add_column("mean R_T", justify="right")
    table.add_column("stderr", justify="right")
    for row in growth.rows:
        table.add_row(str(row["T"]), _fmt(row["mean"]), _fmt(row["stderr"]))
    console.print(table)
    console.print(f"slope = {growth.slope:.4f}  residual = {growth.residual:.4f}")


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL),
        format=settings.LOG_FORMAT
    )
    args = build_parser().parse_args(argv)
    console = Console()
    resume = not args.no_resume

    try:
        config = load_config(args.config, seed=args.seed)
        if args.command == "run":
            result = orchestrator.run_experiment(config, jobs=args.jobs, output_dir=args.output, resume=resume)
            if args.json:
                print(json.dumps(result.summary["aggregate"], sort_keys=True))
            else:
                _print_run(console, result)
            return EXIT_VIOLATIONS if result.summary["aggregate"]["violations"] else EXIT_OK

        if args.command == "sweep":
            gammas = orchestrator.gamma_grid(args.gamma_min, args.gamma_max, args.points)
            sweep = orchestrator.sweep_gamma(config, gammas, jobs=args.jobs, output_dir=args.output, resume=resume)
            if args.json:
                print(json.dumps(sweep.rows, sort_keys=True))
            else:
                _print_sweep(console, sweep)
            return EXIT_VIOLATIONS if any(row["violations"] for row in sweep.rows) else EXIT_OK

        growth = orchestrator.growth_fit(
            config, args.horizons, jobs=args.jobs, output_dir=args.output, resume=resume
        )
        if args.json:
            print(json.dumps({"rows": growth.rows, "fit": growth.fit.to_dict()}, sort_keys=True))
        else:
            _print_fit(console, growth)
        return EXIT_OK
    except (ConfigurationError, IngestionError) as e:
        logger.error(str(e))
        console.print(f"[red]error:[/red] {e}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
