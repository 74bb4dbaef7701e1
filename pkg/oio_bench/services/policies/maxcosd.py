"""
MaxCOSD: cyclic descent that commits a candidate level only when it is feasible.

Features:
- Adaptive rates over cycle gradient sums
- Commits y_{t+1} = candidate iff x_{t+1} <= candidate (exact comparison)
- Feasible for every gamma > 0 under any dynamic obeying x_{t+1} <= [y_t - d_t]^+
"""
from typing import Any, Dict, Optional

import numpy as np
import logging

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.feasible_sets import FeasibleSet
from oio_bench.services.policies.cosd import COSDPolicy, UpdateStrategy
from oio_bench.services.policies.rates import AdaptiveRate

logger = logging.getLogger(__name__)


class MaxCOSDPolicy(COSDPolicy):
    """COSD with adaptive rates and the feasibility-triggered update strategy."""

    name = "maxcosd"

    def __init__(self, feasible_set: FeasibleSet, gamma: float):
        if not gamma > 0:
            raise ConfigurationError(f"gamma must be > 0, got {gamma}")
        self.gamma = float(gamma)
        self.D = feasible_set.diameter()
        super().__init__(
            feasible_set,
            AdaptiveRate(self.gamma, self.D),
            strategy=UpdateStrategy.MAXCOSD,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "gamma": self.gamma, "D": self.D}


def maxcosd_policy(feasible_set: FeasibleSet, y1: Optional[np.ndarray], gamma: float) -> MaxCOSDPolicy:
    """Build and initialize a MaxCOSD policy."""
    policy = MaxCOSDPolicy(feasible_set, gamma)
    policy.initialize(y1)
    return policy
