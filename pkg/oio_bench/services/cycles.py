"""
Empirical cycle-length statistics and geometric-cycle compliance flags.

A run has mu-geometric cycles with constant C when
P(t_{k+1} - t_k > m) <= C (1 - mu)^m. The flags compare the empirical
mean, second moment, tail and root-sum-of-squares of the completed cycle
lengths with the values this implies, plus a 3-sigma statistical slack.
"""
from typing import Optional

import numpy as np
import logging

from oio_bench.core.config import settings
from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.records import CycleStats, StatsStatus, Trajectory
from oio_bench.services.regret import completed_cycles

logger = logging.getLogger(__name__)


def cycle_lengths(traj: Trajectory) -> np.ndarray:
    """t_{k+1} - t_k for every completed cycle."""
    return np.array([last - first + 1 for first, last in completed_cycles(traj)], dtype=np.int64)


def cycle_stats(
    traj: Trajectory,
    mu: float,
    c_mu: float = 1.0,
    m_max: int = 8,
    delta: Optional[float] = None,
) -> CycleStats:
    """Cycle-length statistics of one trajectory (see ``length_stats``)."""
    lengths = cycle_lengths(traj)
    return length_stats(lengths, traj.T - int(lengths.sum()), mu, c_mu=c_mu, m_max=m_max, delta=delta)


def length_stats(
    lengths: np.ndarray,
    residual: int,
    mu: float,
    c_mu: float = 1.0,
    m_max: int = 8,
    delta: Optional[float] = None,
) -> CycleStats:
    """
    Statistics and compliance flags of completed cycle lengths.

    Args:
        lengths: completed cycle lengths (possibly pooled over replications)
        residual: periods of the unfinished last cycle(s)
        mu: geometric parameter in (0, 1]
        c_mu: geometric constant
        m_max: largest tail index checked
        delta: confidence level of the root-sum-of-squares check

    Returns:
        CycleStats; flags are empty with status INSUFFICIENT_DATA when fewer
        than settings.MIN_CYCLES_FOR_STATS cycles completed
    """
    if not 0 < mu <= 1:
        raise ConfigurationError(f"mu must lie in (0, 1], got {mu}")
    delta = settings.DEFAULT_DELTA if delta is None else delta
    sigmas = settings.STAT_SLACK_SIGMAS

    lengths = np.asarray(lengths, dtype=np.int64)
    K = int(lengths.size)
    if K == 0:
        logger.warning("No completed cycles; cycle statistics unavailable")
        return CycleStats(
            lengths=lengths,
            residual=residual,
            mean=float("nan"),
            second_moment=float("nan"),
            tail={},
            status=StatsStatus.INSUFFICIENT_DATA,
        )

    values = lengths.astype(float)
    mean = float(values.mean())
    second = float(np.mean(values ** 2))
    tail = {m: float(np.mean(values > m)) for m in range(1, m_max + 1)}

    if K < settings.MIN_CYCLES_FOR_STATS:
        logger.warning(f"Only {K} completed cycles (< {settings.MIN_CYCLES_FOR_STATS}); flags skipped")
        return CycleStats(
            lengths=lengths,
            residual=residual,
            mean=mean,
            second_moment=second,
            tail=tail,
            status=StatsStatus.INSUFFICIENT_DATA,
        )

    stderr = float(values.std(ddof=1) / np.sqrt(K))
    stderr_sq = float((values ** 2).std(ddof=1) / np.sqrt(K))
    mean_limit = c_mu / mu + sigmas * stderr
    second_limit = c_mu * (2.0 - mu) / mu ** 2 + sigmas * stderr_sq
    root_limit = (1.0 + np.log(K * c_mu / delta) / mu) * np.sqrt(K)

    thresholds = {"mean": mean_limit, "second_moment": second_limit, "root_sum_squares": float(root_limit)}
    tail_ok = True
    for m, observed in tail.items():
        p = min(1.0, c_mu * (1.0 - mu) ** m)
        limit = p + sigmas * np.sqrt(p * (1.0 - p) / K)
        thresholds[f"tail_{m}"] = float(limit)
        tail_ok = tail_ok and observed <= limit

    flags = {
        "mean": bool(mean <= mean_limit),
        "second_moment": bool(second <= second_limit),
        "tail": bool(tail_ok),
        "root_sum_squares": bool(np.sqrt(np.sum(values ** 2)) <= root_limit),
    }
    return CycleStats(
        lengths=lengths,
        residual=residual,
        mean=mean,
        second_moment=second,
        tail=tail,
        status=StatsStatus.OK,
        flags=flags,
        thresholds=thresholds,
    )
