"""
Cyclic online subgradient descent (COSD).

The level is held constant within a cycle while subgradients accumulate;
at an update period the accumulated step is taken from the cycle's anchor:

    y_{t+1} = Proj(y_{t_k} - eta_t * sum_{s=t_k}^{t} g_s)

Update strategies decide, from information observable at the start of
period t+1, whether t+1 opens a new cycle.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np
import logging

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.feasible_sets import FeasibleSet
from oio_bench.services.policies.base import BasePolicy
from oio_bench.services.policies.rates import AdaptiveRate, LearningRate

logger = logging.getLogger(__name__)


class UpdateStrategy(str, Enum):
    """When a cyclic policy commits its candidate level."""
    EVERY_PERIOD = "every_period"
    MINIBATCH = "minibatch"
    CUP = "cup"
    MAXCOSD = "maxcosd"


@dataclass
class CycleState:
    """
    Bookkeeping of the current update cycle.

    Attributes:
        k: cycle index (1-based)
        t_k: first period of the cycle
        anchor: level y_{t_k} committed at the cycle start
        within_cycle_gradient_sum: sum of g_s for s in the cycle so far
        past_cycle_norms_sq: sum over completed cycles of ||cycle gradient sum||^2
        completed: number of completed cycles
        completed_periods: total length of the completed cycles
    """
    k: int
    t_k: int
    anchor: np.ndarray
    within_cycle_gradient_sum: np.ndarray
    past_cycle_norms_sq: float = 0.0
    completed: int = 0
    completed_periods: int = 0

    @classmethod
    def start(cls, y1: np.ndarray) -> "CycleState":
        return cls(k=1, t_k=1, anchor=y1.copy(), within_cycle_gradient_sum=np.zeros_like(y1))

    @property
    def within_norm_sq(self) -> float:
        return float(np.dot(self.within_cycle_gradient_sum, self.within_cycle_gradient_sum))

    def close(self, next_anchor: np.ndarray, next_start: int) -> None:
        """Finish cycle k at period next_start - 1 and open cycle k + 1."""
        self.past_cycle_norms_sq += self.within_norm_sq
        self.completed += 1
        self.completed_periods += next_start - self.t_k
        self.k += 1
        self.t_k = next_start
        self.anchor = next_anchor.copy()
        self.within_cycle_gradient_sum = np.zeros_like(next_anchor)


def adaptive_eta(cs: CycleState, gamma: float, D: float) -> float:
    """
    Adaptive rate gamma D / sqrt(||within sum||^2 + past norms), 0 on a zero denominator.

    The within-cycle sum must already include the current period's gradient.
    """
    return AdaptiveRate(gamma, D).eta(cs.k, cs.within_norm_sq, cs.past_cycle_norms_sq)


def held_level_rule(previous: np.ndarray) -> np.ndarray:
    """Keep y_{t+1} = y_t (feasible under x_{t+1} <= [y_t - d_t]^+)."""
    return np.array(previous, dtype=float, copy=True)


class COSDPolicy(BasePolicy):
    """
    Generic cyclic subgradient descent.

    Features:
    - Accumulated-gradient step from the cycle anchor
    - Pluggable update strategy (every period, minibatch, CUP, MaxCOSD trigger)
    - Pluggable learning-rate schedule (constant, sqrt decay, adaptive)
    - Exposes the candidate level and running counts of completed cycles
    """

    name = "cosd"

    def __init__(
        self,
        feasible_set: FeasibleSet,
        rate: LearningRate,
        strategy: UpdateStrategy = UpdateStrategy.EVERY_PERIOD,
        tau: Optional[int] = None,
    ):
        super().__init__(feasible_set)
        self.rate = rate
        self.strategy = UpdateStrategy(strategy)
        if self.strategy == UpdateStrategy.MINIBATCH:
            if tau is None or tau < 1:
                raise ConfigurationError(f"Minibatch strategy requires tau >= 1, got {tau}")
        self.tau = tau
        self.cycle: Optional[CycleState] = None
        self.candidate: Optional[np.ndarray] = None

    def _reset(self, y1: np.ndarray) -> None:
        self.cycle = CycleState.start(y1)
        self.candidate = y1.copy()

    def _triggers(self, t: int, candidate: np.ndarray, x_next: Optional[np.ndarray]) -> bool:
        if self.strategy == UpdateStrategy.EVERY_PERIOD:
            return True
        if self.strategy == UpdateStrategy.MINIBATCH:
            return t % self.tau == 0
        if x_next is None:
            raise ConfigurationError(
                f"Update strategy '{self.strategy.value}' needs the inventory state x_(t+1)"
            )
        if self.strategy == UpdateStrategy.CUP:
            return bool(np.all(x_next <= 0.0))
        return bool(np.all(x_next <= candidate))

    def _next_level(self, g: np.ndarray, x_next: Optional[np.ndarray]) -> np.ndarray:
        cs = self.cycle
        cs.within_cycle_gradient_sum = cs.within_cycle_gradient_sum + g
        eta = self.rate.eta(self.t, cs.within_norm_sq, cs.past_cycle_norms_sq)
        self.last_eta = eta
        candidate = self.feasible_set.project(cs.anchor - eta * cs.within_cycle_gradient_sum)
        self.candidate = candidate

        if self._triggers(self.t, candidate, x_next):
            cs.close(candidate, self.t + 1)
            self.cycle_index = cs.k
            self.updated = True
            logger.debug(f"{self.name}: cycle {cs.k} opens at t={self.t + 1}")
            return candidate

        self.updated = False
        return held_level_rule(self._y)

    @property
    def completed_cycles(self) -> int:
        """Number of cycles closed so far."""
        return self.cycle.completed if self.cycle else 0

    @property
    def completed_periods(self) -> int:
        """Periods covered by the closed cycles."""
        return self.cycle.completed_periods if self.cycle else 0

    def to_dict(self) -> Dict[str, Any]:
        data = {"name": self.name, "strategy": self.strategy.value, "rate": self.rate.to_dict()}
        if self.tau is not None:
            data["tau"] = self.tau
        return data


def cosd_policy(
    feasible_set: FeasibleSet,
    y1: Optional[np.ndarray],
    strategy: UpdateStrategy,
    rate: LearningRate,
    tau: Optional[int] = None,
) -> COSDPolicy:
    """Build and initialize a COSD policy."""
    policy = COSDPolicy(feasible_set, rate, strategy=strategy, tau=tau)
    policy.initialize(y1)
    return policy
