"""
Protocol loop for online inventory optimization.

Each period t:
1. observe the inventory state x_t (x_1 = 0)
2. the policy proposes y_t, which must dominate x_t
3. demand d_t is revealed, the loss l_t(y_t) is incurred and the
   subgradient g_t is computed from sales (censored) or demand (full info)
4. the dynamic produces x_{t+1} and the policy observes (g_t, x_{t+1})
"""
from typing import Callable, Optional, Union

import numpy as np
import logging

from oio_bench.core.exceptions import (
    ConfigurationError,
    DemandExhausted,
    FeasibilityViolation,
    TruncationError,
)
from oio_bench.models.feasible_sets import FeasibleSet
from oio_bench.models.losses import Loss
from oio_bench.models.records import AuditResult, FeedbackMode, Trajectory
from oio_bench.models.vectors import VectorLike
from oio_bench.services.demand import DemandProcess, DemandSource
from oio_bench.services.dynamics import Dynamic
from oio_bench.services.policies.base import BasePolicy

logger = logging.getLogger(__name__)

TrajectorySink = Callable[[int, Trajectory], None]


def run(
    dynamic: Dynamic,
    demand: Union[DemandSource, DemandProcess],
    loss: Loss,
    feasible_set: FeasibleSet,
    policy: BasePolicy,
    feedback: FeedbackMode = FeedbackMode.CENSORED,
    T: int = 1,
    seed: int = 0,
    replication: int = 0,
    y1: Optional[VectorLike] = None,
    sink: Optional[TrajectorySink] = None,
) -> Trajectory:
    """
    Execute the inventory protocol for T periods.

    Args:
        dynamic: inventory dynamic
        demand: demand source (opened with seed and replication) or an open process
        loss: loss plug-in
        feasible_set: set the policy plays in (checked against the loss dimension)
        policy: policy, (re)initialized with ``y1`` or its previous y1
        feedback: censored (sales) or full-information (demand) subgradients
        T: horizon
        seed: base seed of the demand streams
        replication: replication index (stream seed = seed + replication)
        y1: initial level override
        sink: called as sink(t, trajectory) after period t is recorded

    Returns:
        Trajectory of the run

    Raises:
        FeasibilityViolation: when y_t does not dominate x_t (carries the partial trajectory)
        TruncationError: when the demand source ends before T
    """
    if T < 1:
        raise ConfigurationError(f"Horizon T must be >= 1, got {T}")
    n = feasible_set.n
    if loss.n != n or policy.n != n:
        raise ConfigurationError(
            f"Dimension mismatch: set n={n}, loss n={loss.n}, policy n={policy.n}"
        )
    feedback = FeedbackMode(feedback)
    process = demand.open(seed, replication) if isinstance(demand, DemandSource) else demand
    if process.n != n:
        raise ConfigurationError(f"Demand has n={process.n} products, problem has n={n}")

    policy.initialize(y1 if y1 is not None else policy.y1)
    x, state = dynamic.initial_state(n)
    traj = Trajectory.allocate(T, n, seed=seed + replication)

    for t in range(1, T + 1):
        row = t - 1
        y = policy.propose()
        traj.x[row] = x
        traj.y[row] = y
        traj.cycle[row] = policy.cycle_index
        traj.updated[row] = policy.updated

        if not np.all(y >= x):
            logger.error(f"Feasibility violated at t={t} by policy '{policy.name}'")
            partial = traj.head(row) if row > 0 else None
            raise FeasibilityViolation(period=t, y=y, x=x, trajectory=partial)

        try:
            d = process.next_demand(t)
        except DemandExhausted as e:
            raise TruncationError(f"Demand ended before horizon T={T}: {e}") from e

        s = np.minimum(y, d)
        if feedback == FeedbackMode.CENSORED:
            g = loss.censored_subgradient(y, s)
        else:
            g = loss.subgradient(y, d)

        traj.d[row] = d
        traj.s[row] = s
        traj.g[row] = g
        traj.loss[row] = loss.evaluate(y, d)

        x, state = dynamic.step(state, y, d)
        policy.observe(g, x)
        traj.eta[row] = policy.last_eta

        if sink is not None:
            sink(t, traj)

    traj.x_final = np.array(x, dtype=float, copy=True)
    traj.metadata["policy"] = policy.to_dict()
    traj.metadata["dynamic"] = dynamic.to_dict()
    traj.metadata["feedback"] = feedback.value
    logger.debug(
        f"Run finished: policy={policy.name} T={T} seed={seed + replication} "
        f"cumulative_loss={traj.cumulative_loss:.6g}"
    )
    return traj


def feasibility_audit(traj: Trajectory) -> AuditResult:
    """
    Scan y_t >= x_t for every period (exact comparison).

    Returns:
        AuditResult passing, or carrying the first violating period (1-based)
    """
    ok = np.all(traj.y >= traj.x, axis=1)
    if bool(np.all(ok)):
        return AuditResult(passed=True)
    row = int(np.argmin(ok))
    return AuditResult(passed=False, period=row + 1, y=traj.y[row].copy(), x=traj.x[row].copy())
