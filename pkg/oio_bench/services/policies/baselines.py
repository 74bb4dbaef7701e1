"""
Base-stock baselines.
"""
from typing import Any, Dict, Optional

import numpy as np

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.feasible_sets import FeasibleSet
from oio_bench.models.vectors import VectorLike, as_vector
from oio_bench.services.policies.base import BasePolicy


class ConstantLevelPolicy(BasePolicy):
    """
    Constant order-up-to level (y1 defaults to the level itself).

    ``level=0`` gives the "always order nothing" control; a level at the top
    of the set gives "order up to D immediately" when y1 is also that level.
    """

    name = "constant"

    def __init__(self, feasible_set: FeasibleSet, level: VectorLike):
        super().__init__(feasible_set)
        self.level = as_vector(level, n=self.n, name="constant level")
        if not feasible_set.contains(self.level):
            raise ConfigurationError(f"Constant level {self.level.tolist()} lies outside the feasible set")

    def initialize(self, y1: Optional[VectorLike] = None) -> np.ndarray:
        return super().initialize(self.level if y1 is None else y1)

    def _next_level(self, g: np.ndarray, x_next: Optional[np.ndarray]) -> np.ndarray:
        self.updated = False
        return self.level.copy()

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "level": self.level.tolist()}
