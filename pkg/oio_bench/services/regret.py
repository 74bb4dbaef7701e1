"""
Regret measurement and theoretical bound checks.

Implements:
- Exact regret R_T = sum_t l_t(y_t) - min_y sum_t l_t(y)
- Closed-form worst-case bounds (MaxCOSD expectation and high probability,
  OSD with sqrt-decay rates, OSD under uniformly positive demand, naive DGT)
- Data-dependent bounds evaluated on a recorded trajectory
- Prefix regret curves and log-log growth fits
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import logging

from oio_bench.core.config import settings
from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.feasible_sets import FeasibleSet
from oio_bench.models.losses import Loss
from oio_bench.models.records import BoundCheck, RegretReport, Trajectory
from oio_bench.services.hindsight import hindsight_best

logger = logging.getLogger(__name__)

NAIVE = "naive"
MAXCOSD_EXPECTED = "maxcosd_expected"
MAXCOSD_HIGH_PROBABILITY = "maxcosd_high_probability"
OSD_SQRT_DECAY = "osd_sqrt_decay"
OSD_POSITIVE_DEMAND = "osd_positive_demand"


def within_bound(value: float, bound: float, tol: Optional[float] = None) -> bool:
    """value <= bound up to a relative tolerance."""
    tol = settings.COMPARISON_TOLERANCE if tol is None else tol
    return bool(value <= bound + tol * max(1.0, abs(bound)))


def theoretical_bounds(
    T: int,
    G: float,
    D: float,
    gamma: float,
    mu: Optional[float] = None,
    delta: Optional[float] = None,
) -> List[Tuple[str, float]]:
    """
    Evaluate the closed-form regret bounds.

    Args:
        T: horizon
        G: subgradient norm bound
        D: feasible set diameter
        gamma: learning-rate parameter
        mu: non-degeneracy probability (MaxCOSD bounds omitted when None)
        delta: confidence level of the high-probability bound

    Returns:
        List of (name, value): MaxCOSD expected and high-probability bounds,
        OSD sqrt-decay bound, OSD bound under uniformly positive demand,
        naive bound DGT
    """
    if T < 1 or gamma <= 0:
        raise ConfigurationError(f"Bounds need T >= 1 and gamma > 0, got T={T}, gamma={gamma}")
    if mu is not None and not 0 < mu <= 1:
        raise ConfigurationError(f"mu must lie in (0, 1], got {mu}")
    delta = settings.DEFAULT_DELTA if delta is None else delta
    if not 0 < delta < 1:
        raise ConfigurationError(f"delta must lie in (0, 1), got {delta}")

    root_T = np.sqrt(T)
    coefficient = 1.0 / (2.0 * gamma) + gamma
    bounds: List[Tuple[str, float]] = []
    if mu is not None:
        bounds.append((MAXCOSD_EXPECTED, float(np.sqrt(2.0) * G * D / mu * (coefficient + 1.0) * root_T)))
        bounds.append((
            MAXCOSD_HIGH_PROBABILITY,
            float(G * D * (coefficient + 1.0) * (1.0 + np.log(T / delta) / mu) * root_T),
        ))
    bounds.append((OSD_SQRT_DECAY, float(coefficient * G * D * root_T)))
    bounds.append((OSD_POSITIVE_DEMAND, float((1.0 + 2.0 * gamma) / (2.0 * gamma) * G * D * root_T)))
    bounds.append((NAIVE, float(D * G * T)))
    return bounds


def regret(
    traj: Trajectory,
    feasible_set: FeasibleSet,
    loss: Loss,
    bounds: Optional[Sequence[Tuple[str, float]]] = None,
) -> RegretReport:
    """
    Exact regret of a trajectory against the best constant level in hindsight.

    The naive bound R_T <= DGT is always attached; any extra (name, value)
    bounds are checked as well.
    """
    y_star, value = hindsight_best(traj.d, loss, feasible_set)
    cumulative = traj.cumulative_loss
    r_T = cumulative - value

    naive = feasible_set.diameter() * loss.gradient_bound * traj.T
    checks = [BoundCheck(NAIVE, naive, within_bound(r_T, naive))]
    for name, bound in bounds or []:
        if name == NAIVE:
            continue
        checks.append(BoundCheck(name, bound, within_bound(r_T, bound)))

    failed = [check.name for check in checks if not check.satisfied]
    if failed:
        logger.warning(f"Regret {r_T:.6g} exceeds bounds: {', '.join(failed)}")
    return RegretReport(
        regret=r_T,
        hindsight_y=y_star,
        hindsight_value=value,
        cumulative_loss=cumulative,
        bound_checks=checks,
    )


def regret_curve(
    traj: Trajectory,
    feasible_set: FeasibleSet,
    loss: Loss,
    horizons: Sequence[int],
) -> np.ndarray:
    """Prefix regret R_t at each horizon (hindsight recomputed per prefix)."""
    cumulative = np.cumsum(traj.loss)
    values = []
    for t in horizons:
        if not 1 <= t <= traj.T:
            raise ConfigurationError(f"Horizon {t} outside [1, {traj.T}]")
        _, best = hindsight_best(traj.d[:t], loss, feasible_set)
        values.append(float(cumulative[t - 1] - best))
    return np.array(values)


def osd_data_bound(traj: Trajectory, D: float) -> float:
    """
    D^2 / (2 eta_T) + 1/2 sum_t eta_t ||g_t||^2 for nonincreasing OSD rates.

    Infinite when eta_T = 0.
    """
    eta_T = float(traj.eta[-1])
    if eta_T <= 0:
        return float("inf")
    norms_sq = np.einsum("ij,ij->i", traj.g, traj.g)
    return float(D ** 2 / (2.0 * eta_T) + 0.5 * np.sum(traj.eta * norms_sq))


def completed_cycles(traj: Trajectory) -> List[Tuple[int, int]]:
    """(first, last) 1-based periods of the cycles closed before T + 1."""
    starts = np.flatnonzero(traj.updated) + 1
    return [(int(starts[k]), int(starts[k + 1] - 1)) for k in range(len(starts) - 1)]


def cosd_cycle_bound(traj: Trajectory, D: float) -> Tuple[float, int]:
    """
    Data-dependent cyclic bound at the end t_K of the last completed cycle:

        D^2 / (2 eta_{t_K}) + 1/2 sum_k eta_{t_k} ||sum_{t in cycle k} g_t||^2

    where eta is taken at each cycle's last period.

    Returns:
        (bound, t_K); (inf, 0) when no cycle has completed or eta_{t_K} = 0
    """
    cycles = completed_cycles(traj)
    if not cycles:
        return float("inf"), 0
    total = 0.0
    for first, last in cycles:
        cycle_sum = traj.g[first - 1:last].sum(axis=0)
        total += float(traj.eta[last - 1]) * float(np.dot(cycle_sum, cycle_sum))
    last_end = cycles[-1][1]
    eta_end = float(traj.eta[last_end - 1])
    if eta_end <= 0:
        return float("inf"), last_end
    return float(D ** 2 / (2.0 * eta_end) + 0.5 * total), last_end


@dataclass
class SlopeFit:
    """Least-squares fit of log(y) = slope * log(x) + intercept."""
    slope: float
    intercept: float
    residual: float
    points: int
    excluded: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, float]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "points": self.points,
            "excluded": list(self.excluded),
        }


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> SlopeFit:
    """
    Fit log(ys) against log(xs); nonpositive points are dropped with a warning.

    Raises:
        ConfigurationError: fewer than two usable points
    """
    xs_arr = np.asarray(xs, dtype=float)
    ys_arr = np.asarray(ys, dtype=float)
    keep = (xs_arr > 0) & (ys_arr > 0)
    excluded = xs_arr[~keep].tolist()
    if excluded:
        logger.warning(f"Excluding nonpositive points from the log-log fit at x={excluded}")
    if int(keep.sum()) < 2:
        raise ConfigurationError("A log-log fit needs at least two positive points")
    log_x = np.log(xs_arr[keep])
    log_y = np.log(ys_arr[keep])
    slope, intercept = np.polyfit(log_x, log_y, 1)
    residual = float(np.sqrt(np.mean((log_y - (slope * log_x + intercept)) ** 2)))
    return SlopeFit(
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
        points=int(keep.sum()),
        excluded=excluded,
    )
