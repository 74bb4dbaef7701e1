"""
Online subgradient descent: y_{t+1} = Proj(y_t - eta_t g_t).
"""
from typing import Any, Dict, Optional

import numpy as np
import logging

from oio_bench.models.feasible_sets import FeasibleSet
from oio_bench.services.policies.base import BasePolicy
from oio_bench.services.policies.rates import LearningRate

logger = logging.getLogger(__name__)


class OSDPolicy(BasePolicy):
    """
    Projected online subgradient descent.

    Updates every period and never inspects the inventory state, so it can
    order below x_t; the simulator's feasibility check catches that. Each
    period is its own cycle.
    """

    name = "osd"

    def __init__(self, feasible_set: FeasibleSet, rate: LearningRate):
        super().__init__(feasible_set)
        self.rate = rate
        self.past_norms_sq = 0.0

    def _reset(self, y1: np.ndarray) -> None:
        self.past_norms_sq = 0.0

    def _next_level(self, g: np.ndarray, x_next: Optional[np.ndarray]) -> np.ndarray:
        norm_sq = float(np.dot(g, g))
        eta = self.rate.eta(self.t, norm_sq, self.past_norms_sq)
        self.last_eta = eta
        self.past_norms_sq += norm_sq
        self.cycle_index += 1
        self.updated = True
        return self.feasible_set.project(self._y - eta * g)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "rate": self.rate.to_dict()}


def osd_policy(feasible_set: FeasibleSet, y1: Optional[np.ndarray], rate: LearningRate) -> OSDPolicy:
    """Build and initialize an OSD policy."""
    policy = OSDPolicy(feasible_set, rate)
    policy.initialize(y1)
    return policy
