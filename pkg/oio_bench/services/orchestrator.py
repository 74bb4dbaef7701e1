"""
Experiment orchestration: replications, gamma sweeps and growth fits.

Features:
- R replications with stream seeds base_seed + r on a bounded worker pool
- Single collector writing trajectories, per-replication records and the
  audit log in replication order (outputs independent of worker count)
- Resumable runs: finished replications are skipped when their record exists
- Deterministic summary.json; wall-clock data goes to timing.json
- Aggregate bound checks over replications and pooled cycle statistics
"""
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import logging

from oio_bench.core.config import settings
from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.experiment import ExperimentConfig
from oio_bench.services import regret as regret_service
from oio_bench.services import reporting
from oio_bench.services.cycles import length_stats
from oio_bench.services.settings_catalog import build_problem, derived_quantities, resolve_setting
from oio_bench.worker.pool import ReplicationPool
from oio_bench.worker.tasks import ReplicationResult, run_replication

logger = logging.getLogger(__name__)

AGGREGATION = "mean_stderr"


@dataclass
class ExperimentResult:
    """Files and in-memory results of one experiment run."""
    run_dir: Path
    manifest: Dict[str, Any]
    summary: Dict[str, Any]
    results: List[ReplicationResult] = field(default_factory=list)

    @property
    def mean_regret(self) -> Optional[float]:
        return self.summary["aggregate"]["mean"]

    @property
    def stderr(self) -> Optional[float]:
        return self.summary["aggregate"]["stderr"]


@dataclass
class SweepResult:
    """Per-gamma table of a sweep."""
    sweep_dir: Path
    rows: List[Dict[str, Any]]
    plot_path: Optional[Path] = None

    def table(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=["gamma", "mean", "stderr", "violations", "run_dir"])


@dataclass
class GrowthFitResult:
    """Mean regret per horizon and the log-log slope fitted through it."""
    fit_dir: Path
    rows: List[Dict[str, Any]]
    fit: regret_service.SlopeFit

    @property
    def slope(self) -> float:
        return self.fit.slope

    @property
    def residual(self) -> float:
        return self.fit.residual


def gamma_grid(gamma_min: float, gamma_max: float, points: int) -> List[float]:
    """
    Log-spaced gamma values.

    Raises:
        ConfigurationError: empty grid, nonpositive or reversed bounds
    """
    if points < 1:
        raise ConfigurationError(f"A gamma grid needs at least one point, got {points}")
    if not 0 < gamma_min <= gamma_max:
        raise ConfigurationError(f"Need 0 < gamma_min <= gamma_max, got [{gamma_min}, {gamma_max}]")
    if points == 1:
        return [float(gamma_min)]
    return [float(g) for g in np.logspace(math.log10(gamma_min), math.log10(gamma_max), points)]


def build_manifest(config: ExperimentConfig) -> Dict[str, Any]:
    """
    Resolved configuration plus every number a bound checker uses.

    Raises:
        ConfigurationError / IngestionError: invalid setting or unreadable dataset
    """
    spec = resolve_setting(config)
    problem = build_problem(spec, horizon=config.horizon)
    derived = derived_quantities(problem, config.uppd)
    gamma = config.policy.gamma

    bounds: Dict[str, float] = {}
    if gamma is not None and derived["D"] > 0:
        bounds = dict(
            regret_service.theoretical_bounds(
                config.horizon, derived["G"], derived["D"], gamma, mu=derived["mu"], delta=config.delta
            )
        )
    in_range = None
    if gamma is not None and derived["rho"] is not None and derived["D"] > 0:
        in_range = gamma <= derived["rho"] / derived["D"]
        if not in_range:
            logger.warning(
                f"gamma={gamma:g} exceeds rho/D={derived['rho'] / derived['D']:.6g}; "
                f"regret bounds do not apply (feasibility is unaffected for MaxCOSD)"
            )

    return {
        "config": config.model_dump(mode="json"),
        "config_hash": config.config_hash,
        "problem": spec.model_dump(mode="json"),
        "derived": derived,
        "gamma": gamma,
        "gamma_in_theoretical_range": in_range,
        "delta": config.delta,
        "horizon": config.horizon,
        "replications": config.replications,
        "seeds": [config.seed + r for r in range(config.replications)],
        "theoretical_bounds": bounds,
        "aggregation": AGGREGATION,
        "rng_algorithm": settings.RNG_ALGORITHM,
        "version": settings.VERSION,
    }


def _mean_stderr(values: Sequence[float]) -> Dict[str, Optional[float]]:
    if not values:
        return {"mean": None, "stderr": None}
    arr = np.asarray(values, dtype=float)
    stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return {"mean": float(arr.mean()), "stderr": stderr}


def aggregate_checks(
    regrets: Sequence[float],
    manifest: Dict[str, Any],
) -> List[Dict[str, Any]]:
    """
    Bound checks over replications for MaxCOSD runs inside the theoretical range.

    - mean R_T <= expected-regret bound
    - fraction of runs above the high-probability bound <= delta + 3 sqrt(delta (1 - delta) / R)
    """
    policy = manifest["config"]["policy"]["name"]
    bounds = manifest["theoretical_bounds"]
    if policy != "maxcosd" or not manifest["gamma_in_theoretical_range"] or not regrets:
        return []
    if regret_service.MAXCOSD_EXPECTED not in bounds:
        return []

    checks = []
    mean = float(np.mean(regrets))
    expected = bounds[regret_service.MAXCOSD_EXPECTED]
    checks.append({
        "name": regret_service.MAXCOSD_EXPECTED,
        "value": expected,
        "observed": mean,
        "satisfied": regret_service.within_bound(mean, expected),
    })

    delta = manifest["delta"]
    R = len(regrets)
    high = bounds[regret_service.MAXCOSD_HIGH_PROBABILITY]
    fraction = float(np.mean([not regret_service.within_bound(r, high) for r in regrets]))
    limit = delta + settings.STAT_SLACK_SIGMAS * math.sqrt(delta * (1.0 - delta) / R)
    checks.append({
        "name": regret_service.MAXCOSD_HIGH_PROBABILITY,
        "value": high,
        "observed": fraction,
        "limit": limit,
        "satisfied": fraction <= limit,
    })
    return checks


def summarize(results: Sequence[ReplicationResult], manifest: Dict[str, Any]) -> Dict[str, Any]:
    """
    Deterministic summary of an experiment.

    Keys: config_hash, per_replication, aggregate {mean, stderr, ...},
    aggregate_checks, cycle_stats (pooled over replications), manifest.
    """
    ordered = sorted(results, key=lambda r: r.replication)
    regrets = [r.regret for r in ordered if not r.failed and r.regret is not None]
    violations = [r.replication for r in ordered if r.failed]

    aggregate = _mean_stderr(regrets)
    aggregate.update({
        "aggregation": AGGREGATION,
        "replications": len(ordered),
        "completed": len(regrets),
        "violations": len(violations),
        "violating_replications": violations,
    })

    pooled = None
    mu = manifest["derived"]["mu"]
    lengths = [length for r in ordered for length in r.cycle_lengths]
    if mu is not None and any(r.cycle_stats is not None for r in ordered):
        residual = sum(r.residual for r in ordered if not r.failed)
        pooled = length_stats(np.asarray(lengths, dtype=np.int64), residual, mu, delta=manifest["delta"]).to_dict()

    return {
        "config_hash": manifest["config_hash"],
        "per_replication": [r.to_dict() for r in ordered],
        "aggregate": aggregate,
        "aggregate_checks": aggregate_checks(regrets, manifest),
        "cycle_stats": pooled,
        "manifest": manifest,
    }


def _record_path(run_dir: Path, replication: int) -> Path:
    return run_dir / "replications" / f"replication_{replication:03d}.json"


def _trajectory_path(run_dir: Path, replication: int) -> Path:
    return run_dir / "trajectories" / f"replication_{replication:03d}.csv"


def _check_run_dir(run_dir: Path, manifest: Dict[str, Any]) -> None:
    existing = run_dir / "manifest.json"
    if existing.exists():
        previous = reporting.read_json(existing)
        if previous.get("config_hash") != manifest["config_hash"]:
            raise ConfigurationError(
                f"{run_dir} holds a different experiment (config_hash {previous.get('config_hash')})"
            )


def run_experiment(
    config: ExperimentConfig,
    jobs: int = 1,
    output_dir: Optional[str] = None,
    resume: bool = True,
) -> ExperimentResult:
    """
    Execute R replications and write the run directory.

    Args:
        config: experiment configuration
        jobs: worker processes (-1 for all available)
        output_dir: run directory (default config.output_dir, then settings.OUTPUT_DIR)
        resume: skip replications whose record already exists

    Returns:
        ExperimentResult with manifest, summary and per-replication results

    Raises:
        ConfigurationError: invalid config or a run directory of another experiment
        IngestionError: unreadable dataset
    """
    started = datetime.now(timezone.utc)
    run_dir = Path(output_dir or config.output_dir or settings.OUTPUT_DIR)
    manifest = build_manifest(config)
    run_dir.mkdir(parents=True, exist_ok=True)
    _check_run_dir(run_dir, manifest)
    reporting.write_json(manifest, run_dir / "manifest.json")

    logger.info(
        f"Running experiment {manifest['config_hash'][:12]}: policy={config.policy.name} "
        f"T={config.horizon} R={config.replications} -> {run_dir}"
    )

    finished: Dict[int, ReplicationResult] = {}
    if resume:
        for r in range(config.replications):
            record = _record_path(run_dir, r)
            if record.exists():
                finished[r] = ReplicationResult.from_dict(reporting.read_json(record))
        if finished:
            logger.info(f"Resuming: {len(finished)} of {config.replications} replications already done")

    pending = [r for r in range(config.replications) if r not in finished]
    config_json = config.model_dump_json()
    pool = ReplicationPool(jobs)
    streamed = config.save_trajectories and config.stream_trajectories
    arguments = [
        (config_json, r, str(_trajectory_path(run_dir, r)) if streamed else None) for r in pending
    ]
    fresh = pool.map(run_replication, arguments)

    audit_log = run_dir / settings.AUDIT_LOG_FILE
    for result in fresh:
        if result.failed:
            reporting.append_violation(
                audit_log, result.seed, result.violation, replication=result.replication, gamma=config.policy.gamma
            )
        elif result.trajectory is not None:
            reporting.write_trajectory_csv(result.trajectory, _trajectory_path(run_dir, result.replication))
        reporting.write_json(result.to_dict(), _record_path(run_dir, result.replication))
        finished[result.replication] = result

    results = [finished[r] for r in range(config.replications)]
    summary = summarize(results, manifest)
    reporting.write_json(summary, run_dir / "summary.json")

    completed = datetime.now(timezone.utc)
    reporting.write_json(
        {
            "started": started.isoformat(),
            "finished": completed.isoformat(),
            "wall_clock_seconds": (completed - started).total_seconds(),
            "jobs": pool.workers,
            "replication_seconds": {str(r.replication): r.elapsed for r in fresh},
            "resumed": sorted(set(finished) - {r.replication for r in fresh}),
        },
        run_dir / "timing.json",
    )

    aggregate = summary["aggregate"]
    if aggregate["violations"]:
        logger.error(f"{aggregate['violations']} replications violated feasibility (see {audit_log})")
    logger.info(f"Experiment done: mean R_T={aggregate['mean']} stderr={aggregate['stderr']}")
    return ExperimentResult(run_dir=run_dir, manifest=manifest, summary=summary, results=results)


def _with_gamma(config: ExperimentConfig, gamma: float) -> ExperimentConfig:
    policy = config.policy.model_copy(update={"gamma": float(gamma)})
    return ExperimentConfig.model_validate({**config.model_dump(), "policy": policy.model_dump()})


def _with_horizon(config: ExperimentConfig, horizon: int) -> ExperimentConfig:
    return ExperimentConfig.model_validate({**config.model_dump(), "horizon": int(horizon)})


def sweep_gamma(
    config: ExperimentConfig,
    gammas: Sequence[float],
    jobs: int = 1,
    output_dir: Optional[str] = None,
    resume: bool = True,
) -> SweepResult:
    """
    Run the experiment once per gamma and tabulate mean regret.

    Each cell gets its own run directory gamma_XXX under the sweep directory,
    so an interrupted sweep resumes cell by cell and replication by replication.

    Returns:
        SweepResult; sweep.csv, sweep.json and sweep.svg are written alongside
    """
    if not gammas:
        raise ConfigurationError("Gamma grid is empty")
    if any(not g > 0 for g in gammas):
        raise ConfigurationError(f"All gamma values must be > 0, got {list(gammas)}")

    sweep_dir = Path(output_dir or config.output_dir or settings.OUTPUT_DIR)
    logger.info(f"Sweeping {len(gammas)} gamma values in [{min(gammas):g}, {max(gammas):g}] -> {sweep_dir}")

    rows = []
    for i, gamma in enumerate(gammas):
        cell = _with_gamma(config, gamma)
        result = run_experiment(cell, jobs=jobs, output_dir=str(sweep_dir / f"gamma_{i:03d}"), resume=resume)
        rows.append({
            "gamma": float(gamma),
            "mean": result.mean_regret,
            "stderr": result.stderr,
            "violations": result.summary["aggregate"]["violations"],
            "run_dir": result.run_dir.name,
        })

    sweep = SweepResult(sweep_dir=sweep_dir, rows=rows)
    sweep.table().to_csv(sweep_dir / "sweep.csv", index=False, float_format="%.17g")
    reporting.write_json({"config_hash": config.config_hash, "rows": rows}, sweep_dir / "sweep.json")

    plotted = [row for row in rows if row["mean"] is not None]
    sweep.plot_path = reporting.plot_renderer.write_sweep(
        sweep_dir / "sweep.svg",
        [row["gamma"] for row in plotted],
        [row["mean"] for row in plotted],
        [row["stderr"] for row in plotted],
        title=f"Mean regret vs gamma ({config.policy.name}, T={config.horizon})",
    )
    return sweep


def growth_fit(
    config: ExperimentConfig,
    horizons: Sequence[int],
    jobs: int = 1,
    output_dir: Optional[str] = None,
    resume: bool = True,
) -> GrowthFitResult:
    """
    Least-squares slope of log(mean R_T) against log(T).

    Horizons with nonpositive mean regret are excluded with a warning.

    Raises:
        ConfigurationError: fewer than two horizons or a nonpositive horizon
    """
    horizons = sorted(int(T) for T in horizons)
    if len(horizons) < 2 or horizons[0] < 1:
        raise ConfigurationError(f"growth_fit needs at least two positive horizons, got {horizons}")
    if len(horizons) < 4 or horizons[-1] < 100 * horizons[0]:
        logger.warning(f"Horizons {horizons} cover fewer than 4 points or 2 decades; the slope is unreliable")
    if config.replications < 10:
        logger.warning(f"Only {config.replications} replications per horizon; the slope is noisy")

    fit_dir = Path(output_dir or config.output_dir or settings.OUTPUT_DIR)
    rows = []
    for T in horizons:
        result = run_experiment(_with_horizon(config, T), jobs=jobs, output_dir=str(fit_dir / f"T_{T}"), resume=resume)
        rows.append({"T": T, "mean": result.mean_regret, "stderr": result.stderr})

    means = [row["mean"] if row["mean"] is not None else float("nan") for row in rows]
    fit = regret_service.fit_loglog_slope(horizons, np.nan_to_num(means, nan=0.0))
    reporting.write_json({"config_hash": config.config_hash, "rows": rows, "fit": fit.to_dict()}, fit_dir / "growth.json")
    logger.info(f"Growth fit: slope={fit.slope:.4f} residual={fit.residual:.4f} over {fit.points} horizons")
    return GrowthFitResult(fit_dir=fit_dir, rows=rows, fit=fit)
