"""
Best constant order-up-to level in hindsight.

Solves min_{y in set} F(y) = sum_t l(y, d_t) over the recorded demands:
- newsvendor on a box: per-product critical-ratio quantile, clamped
- newsvendor on a capacity set: exact greedy allocation over the
  negative-slope segments of the separable piecewise-linear objective
- linear loss: closed form
- anything else: projected subgradient descent with iterate averaging
"""
from typing import Optional, Tuple

import numpy as np
import logging

from oio_bench.core.config import settings
from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.feasible_sets import Box, Capacity, FeasibleSet
from oio_bench.models.losses import LinearLoss, Loss, NewsvendorLoss

logger = logging.getLogger(__name__)


def _as_matrix(demands: np.ndarray, n: int) -> np.ndarray:
    matrix = np.asarray(demands, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    if matrix.ndim != 2 or matrix.shape[0] == 0 or matrix.shape[1] != n:
        raise ConfigurationError(f"Expected a T x {n} demand matrix with T >= 1, got shape {matrix.shape}")
    return matrix


def newsvendor_quantiles(demands: np.ndarray, loss: NewsvendorLoss) -> np.ndarray:
    """
    Smallest unconstrained minimizer per product: the smallest empirical
    p/(h+p)-quantile of the recorded demands (0 when the ratio is 0).
    """
    T = demands.shape[0]
    ordered = np.sort(demands, axis=0)
    ratio = loss.critical_ratio
    k = np.ceil(ratio * T - 1e-12).astype(np.int64)
    k = np.clip(k, 1, T)
    levels = ordered[k - 1, np.arange(demands.shape[1])]
    return np.where(ratio > 0, levels, 0.0)


def _box_newsvendor(demands: np.ndarray, loss: NewsvendorLoss, box: Box) -> np.ndarray:
    levels = newsvendor_quantiles(demands, loss)
    levels = np.where(loss.critical_ratio > 0, levels, box.lower)
    return np.minimum(np.maximum(levels, box.lower), box.upper)


def greedy_capacity_newsvendor(demands: np.ndarray, loss: NewsvendorLoss, cap: float) -> np.ndarray:
    """
    Exact minimizer over {y >= 0, sum(y) <= cap}.

    Each product's objective is convex piecewise linear with breakpoints at
    its demand values; capacity is poured into the segments with the most
    negative slope first until it runs out or no descending segment remains.
    """
    T, n = demands.shape
    slopes = []
    lengths = []
    owners = []
    for i in range(n):
        ordered = np.sort(demands[:, i])
        starts = np.concatenate(([0.0], np.unique(ordered[ordered > 0])))
        below = np.searchsorted(ordered, starts, side="right")
        slope = loss.h[i] * below - loss.p[i] * (T - below)
        seg_len = np.diff(np.append(starts, np.inf))
        descending = slope < 0
        slopes.append(slope[descending])
        lengths.append(seg_len[descending])
        owners.append(np.full(int(descending.sum()), i))

    y = np.zeros(n)
    if not slopes:
        return y
    slope_all = np.concatenate(slopes)
    length_all = np.concatenate(lengths)
    owner_all = np.concatenate(owners)
    order = np.argsort(slope_all, kind="stable")

    remaining = cap
    for idx in order:
        if remaining <= 0:
            break
        take = min(length_all[idx], remaining)
        y[owner_all[idx]] += take
        remaining -= take
    return y


def _linear(loss: LinearLoss, feasible_set: FeasibleSet) -> np.ndarray:
    w = loss.weights
    if isinstance(feasible_set, Box):
        return np.where(w < 0, feasible_set.upper, feasible_set.lower)
    y = np.zeros(feasible_set.n)
    if w.min() < 0 and isinstance(feasible_set, Capacity):
        y[int(np.argmin(w))] = feasible_set.cap
    return y


def subgradient_hindsight(
    demands: np.ndarray,
    loss: Loss,
    feasible_set: FeasibleSet,
    max_iterations: Optional[int] = None,
    stop_ratio: Optional[float] = None,
) -> np.ndarray:
    """
    Offline projected subgradient with iterate averaging.

    Step D / (G sqrt(j)) on the average loss; stops when the averaged
    iterate moves less than stop_ratio * D or after max_iterations.
    """
    max_iterations = max_iterations or settings.HINDSIGHT_MAX_ITERATIONS
    stop_ratio = stop_ratio or settings.HINDSIGHT_STOP_RATIO
    T = demands.shape[0]
    D = feasible_set.diameter()
    G = loss.gradient_bound
    y = feasible_set.project(np.zeros(feasible_set.n))
    if D == 0 or G == 0:
        return y

    avg = y.copy()
    for j in range(1, max_iterations + 1):
        g = loss.sum_subgradient(y, demands) / T
        y = feasible_set.project(y - D / (G * np.sqrt(j)) * g)
        step = (y - avg) / (j + 1)
        avg = avg + step
        if np.linalg.norm(step) < stop_ratio * D:
            logger.debug(f"Hindsight subgradient solver converged after {j} iterations")
            break
    else:
        logger.debug(f"Hindsight subgradient solver hit the {max_iterations}-iteration cap")

    candidates = [avg, y]
    values = [float(np.sum(loss.evaluate_many(c, demands))) for c in candidates]
    return candidates[int(np.argmin(values))]


def hindsight_best(
    demands: np.ndarray,
    loss: Loss,
    feasible_set: FeasibleSet,
    method: str = "auto",
) -> Tuple[np.ndarray, float]:
    """
    Best feasible constant level for the recorded demands.

    Args:
        demands: T x n demand matrix
        loss: loss plug-in
        feasible_set: competitor set
        method: "auto", "subgradient" (force the generic solver)

    Returns:
        (y*, F(y*)) with F re-evaluated exactly at y*
    """
    matrix = _as_matrix(demands, feasible_set.n)
    if method not in ("auto", "subgradient"):
        raise ConfigurationError(f"Unknown hindsight method: {method}")

    if method == "subgradient":
        y_star = subgradient_hindsight(matrix, loss, feasible_set)
    elif isinstance(loss, NewsvendorLoss) and isinstance(feasible_set, Box):
        y_star = _box_newsvendor(matrix, loss, feasible_set)
    elif isinstance(loss, NewsvendorLoss) and isinstance(feasible_set, Capacity):
        y_star = greedy_capacity_newsvendor(matrix, loss, feasible_set.cap)
    elif isinstance(loss, LinearLoss):
        y_star = _linear(loss, feasible_set)
    else:
        y_star = subgradient_hindsight(matrix, loss, feasible_set)

    value = float(np.sum(loss.evaluate_many(y_star, matrix)))
    return y_star, value
