"""
Policy wrappers: feasibility guard and per-product decomposition.
"""
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import logging

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.feasible_sets import Box
from oio_bench.models.vectors import VectorLike, as_vector
from oio_bench.services.policies.base import BasePolicy

logger = logging.getLogger(__name__)


class FeasibilityGuard(BasePolicy):
    """
    Plays max(proposal, x_t): orders nothing when the state is above target.

    Lets policies without a feasibility guarantee run on any dynamic. Only
    box sets are accepted, since the componentwise max of two points of a
    box stays in the box.
    """

    def __init__(self, inner: BasePolicy):
        if not isinstance(inner.feasible_set, Box):
            raise ConfigurationError("FeasibilityGuard requires a box feasible set")
        super().__init__(inner.feasible_set)
        self.inner = inner
        self.name = f"guarded_{inner.name}"
        self.deterministic = inner.deterministic
        self.clamped_periods = 0

    def initialize(self, y1: Optional[VectorLike] = None) -> np.ndarray:
        level = self.inner.initialize(y1)
        super().initialize(level)
        self.clamped_periods = 0
        return level

    def _next_level(self, g: np.ndarray, x_next: Optional[np.ndarray]) -> np.ndarray:
        self.inner.observe(g, x_next)
        proposal = self.inner.propose()
        self.last_eta = self.inner.last_eta
        self.cycle_index = self.inner.cycle_index
        self.updated = self.inner.updated
        if x_next is None or np.all(proposal >= x_next):
            return proposal
        self.clamped_periods += 1
        return np.maximum(proposal, x_next)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "inner": self.inner.to_dict(), "clamped_periods": self.clamped_periods}


class PerProductPolicy(BasePolicy):
    """
    One independent single-product policy per coordinate of a box.

    ``updated`` is true when any product commits a new level and
    ``cycle_index`` counts those periods; ``last_eta`` reports the largest
    per-product rate.
    """

    def __init__(self, feasible_set: Box, factory: Callable[[Box], BasePolicy], name: Optional[str] = None):
        if not isinstance(feasible_set, Box):
            raise ConfigurationError("PerProductPolicy requires a box feasible set")
        super().__init__(feasible_set)
        self.policies: List[BasePolicy] = [factory(feasible_set.sub_box(i)) for i in range(self.n)]
        self.name = name or f"per_product_{self.policies[0].name}"
        self.deterministic = all(p.deterministic for p in self.policies)

    def initialize(self, y1: Optional[VectorLike] = None) -> np.ndarray:
        level = np.zeros(self.n) if y1 is None else as_vector(y1, n=self.n, name="initial level y1")
        for i, policy in enumerate(self.policies):
            policy.initialize(level[i:i + 1])
        return super().initialize(level)

    def _next_level(self, g: np.ndarray, x_next: Optional[np.ndarray]) -> np.ndarray:
        levels = np.empty(self.n)
        etas = np.empty(self.n)
        any_update = False
        for i, policy in enumerate(self.policies):
            policy.observe(g[i:i + 1], None if x_next is None else x_next[i:i + 1])
            levels[i] = policy.propose()[0]
            etas[i] = policy.last_eta
            any_update = any_update or policy.updated
        self.last_eta = float(etas.max())
        self.updated = any_update
        if any_update:
            self.cycle_index += 1
        return levels

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "products": self.n, "inner": self.policies[0].to_dict()}
