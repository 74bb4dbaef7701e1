"""
Replication task executed in worker processes.

A task receives the canonical config JSON and a replication index, rebuilds
the problem (cached per process), runs the protocol and measures regret,
bound compliance and cycle statistics. Feasibility violations are caught
here and returned as data so one failing replication never stops the rest.
"""
import functools
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import logging

from oio_bench.core.exceptions import FeasibilityViolation
from oio_bench.models.experiment import ExperimentConfig
from oio_bench.models.records import Trajectory
from oio_bench.services import regret as regret_service
from oio_bench.services.cycles import cycle_lengths, cycle_stats
from oio_bench.services.policies import (
    COSDPolicy,
    FeasibilityGuard,
    MaxCOSDPolicy,
    OSDPolicy,
    PerProductPolicy,
    initial_level,
    make_policy,
)
from oio_bench.services.policies.rates import SqrtDecayRate
from oio_bench.services.reporting import StreamingCsvSink
from oio_bench.services.settings_catalog import Problem, build_problem, derived_quantities, resolve_setting
from oio_bench.services.simulator import run

logger = logging.getLogger(__name__)


@dataclass
class ReplicationResult:
    """Outcome of one replication."""
    replication: int
    seed: int
    regret: Optional[float] = None
    report: Dict[str, Any] = field(default_factory=dict)
    data_bounds: Dict[str, Any] = field(default_factory=dict)
    cycle_stats: Optional[Dict[str, Any]] = None
    cycle_lengths: List[int] = field(default_factory=list)
    residual: int = 0
    clamped_periods: Optional[int] = None
    violation: Optional[Dict[str, Any]] = None
    trajectory: Optional[Trajectory] = None
    elapsed: float = 0.0

    @property
    def failed(self) -> bool:
        return self.violation is not None

    def to_dict(self) -> Dict[str, Any]:
        """Deterministic summary (no trajectory, no timing)."""
        data: Dict[str, Any] = {
            "replication": self.replication,
            "seed": self.seed,
            "R_T": self.regret,
            "bound_checks": self.report.get("bound_checks", []),
            "hindsight_y": self.report.get("hindsight_y"),
            "hindsight_value": self.report.get("hindsight_value"),
            "cumulative_loss": self.report.get("cumulative_loss"),
            "data_bounds": self.data_bounds,
            "cycle_stats": self.cycle_stats,
            "cycle_lengths": self.cycle_lengths,
            "residual": self.residual,
            "violation": self.violation,
        }
        if self.clamped_periods is not None:
            data["clamped_periods"] = self.clamped_periods
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReplicationResult":
        """Rebuild a finished replication from its stored summary."""
        report = {
            "bound_checks": data.get("bound_checks", []),
            "hindsight_y": data.get("hindsight_y"),
            "hindsight_value": data.get("hindsight_value"),
            "cumulative_loss": data.get("cumulative_loss"),
        }
        return cls(
            replication=data["replication"],
            seed=data["seed"],
            regret=data.get("R_T"),
            report=report,
            data_bounds=data.get("data_bounds", {}),
            cycle_stats=data.get("cycle_stats"),
            cycle_lengths=list(data.get("cycle_lengths", [])),
            residual=data.get("residual", 0),
            clamped_periods=data.get("clamped_periods"),
            violation=data.get("violation"),
        )


@functools.lru_cache(maxsize=4)
def _problem(config_json: str) -> Problem:
    config = ExperimentConfig.model_validate_json(config_json)
    return build_problem(resolve_setting(config), horizon=config.horizon)


def _innermost(policy):
    return policy.inner if isinstance(policy, FeasibilityGuard) else policy


def applicable_bounds(config: ExperimentConfig, derived: Dict[str, Any], policy) -> List:
    """
    Worst-case bounds whose assumptions hold for this run.

    MaxCOSD bounds need known (rho, mu) and gamma <= rho / D; the OSD
    sqrt-decay bound needs the sqrt-decay schedule; the positive-demand OSD
    bound additionally needs deterministic positive demand (mu = 1).
    """
    gamma = config.policy.gamma
    if gamma is None:
        return []
    rho, mu, D, G = derived["rho"], derived["mu"], derived["D"], derived["G"]
    in_range = rho is not None and D > 0 and gamma <= rho / D
    table = dict(regret_service.theoretical_bounds(config.horizon, G, D, gamma, mu=mu, delta=config.delta))
    chosen = []
    if isinstance(policy, MaxCOSDPolicy) and in_range and mu is not None:
        chosen.append((regret_service.MAXCOSD_HIGH_PROBABILITY, table[regret_service.MAXCOSD_HIGH_PROBABILITY]))
    if isinstance(policy, OSDPolicy) and isinstance(policy.rate, SqrtDecayRate):
        chosen.append((regret_service.OSD_SQRT_DECAY, table[regret_service.OSD_SQRT_DECAY]))
        if in_range and mu == 1.0:
            chosen.append((regret_service.OSD_POSITIVE_DEMAND, table[regret_service.OSD_POSITIVE_DEMAND]))
    return chosen


def run_replication(
    config_json: str, replication: int, trajectory_path: Optional[str] = None
) -> ReplicationResult:
    """
    Run and measure one replication of an experiment.

    Args:
        config_json: canonical ExperimentConfig JSON
        replication: replication index r (stream seed = seed + r)
        trajectory_path: CSV file the trajectory is streamed to while the
            replication runs; the trajectory is then not returned

    Returns:
        ReplicationResult (violation populated instead of regret on a breach)
    """
    started = time.perf_counter()
    config = ExperimentConfig.model_validate_json(config_json)
    problem = _problem(config_json)
    derived = derived_quantities(problem, config.uppd)
    policy = make_policy(config.policy, problem.feasible_set, problem.loss)
    seed = config.seed + replication
    result = ReplicationResult(replication=replication, seed=seed)
    sink = StreamingCsvSink(trajectory_path) if trajectory_path else None

    try:
        traj = run(
            dynamic=problem.dynamic,
            demand=problem.demand,
            loss=problem.loss,
            feasible_set=problem.feasible_set,
            policy=policy,
            feedback=problem.feedback,
            T=config.horizon,
            seed=config.seed,
            replication=replication,
            y1=initial_level(config.policy, problem.n),
            sink=sink,
        )
    except FeasibilityViolation as e:
        logger.error(f"Replication {replication} (seed {seed}) violated feasibility at t={e.period}")
        result.violation = e.to_dict()
        if sink is not None:
            # Partial rows are dropped, as in the buffered path
            sink.path.unlink(missing_ok=True)
        result.elapsed = time.perf_counter() - started
        return result

    traj.config_hash = config.config_hash
    report = regret_service.regret(
        traj, problem.feasible_set, problem.loss, bounds=applicable_bounds(config, derived, policy)
    )
    result.regret = report.regret
    result.report = report.to_dict()

    inner = _innermost(policy)
    D = derived["D"]
    if isinstance(policy, OSDPolicy):
        result.data_bounds = {"osd": {"bound": regret_service.osd_data_bound(traj, D), "horizon": traj.T}}
        result.data_bounds["osd"]["satisfied"] = regret_service.within_bound(
            report.regret, result.data_bounds["osd"]["bound"]
        )
    elif isinstance(policy, COSDPolicy):
        bound, horizon = regret_service.cosd_cycle_bound(traj, D)
        entry: Dict[str, Any] = {"bound": bound, "horizon": horizon}
        if horizon > 0 and np.isfinite(bound):
            prefix = float(regret_service.regret_curve(traj, problem.feasible_set, problem.loss, [horizon])[0])
            entry["regret"] = prefix
            entry["satisfied"] = regret_service.within_bound(prefix, bound)
        result.data_bounds = {"cosd": entry}

    if isinstance(inner, (COSDPolicy, PerProductPolicy)):
        lengths = cycle_lengths(traj)
        result.cycle_lengths = lengths.tolist()
        result.residual = traj.T - int(lengths.sum())
        if derived["mu"] is not None:
            result.cycle_stats = cycle_stats(traj, derived["mu"], delta=config.delta).to_dict()

    if isinstance(policy, FeasibilityGuard):
        result.clamped_periods = policy.clamped_periods

    if sink is not None:
        sink.close()
    elif config.save_trajectories:
        result.trajectory = traj
    result.elapsed = time.perf_counter() - started
    return result
