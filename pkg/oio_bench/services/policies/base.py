"""
Base class for inventory policies.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np
import logging

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.feasible_sets import FeasibleSet
from oio_bench.models.vectors import VectorLike, as_vector

logger = logging.getLogger(__name__)


class BasePolicy(ABC):
    """
    Abstract base class for order-up-to policies.

    Implements:
    - Initial level validation (y1 must lie in the feasible set, default 0)
    - Cycle bookkeeping shared by cyclic policies
    - Learning-rate recording for data-dependent bounds

    Protocol per period t: ``propose()`` returns y_t, then
    ``observe(g_t, x_{t+1})`` prepares y_{t+1}.
    """

    name: str = "policy"
    deterministic: bool = True

    def __init__(self, feasible_set: FeasibleSet):
        self.feasible_set = feasible_set
        self.n = feasible_set.n
        self.t = 0
        self.cycle_index = 1
        self.updated = True
        self.last_eta = 0.0
        self.y1: Optional[np.ndarray] = None
        self._y: Optional[np.ndarray] = None

    def initialize(self, y1: Optional[VectorLike] = None) -> np.ndarray:
        """
        Reset the policy and set the first level.

        Args:
            y1: initial order-up-to level (defaults to 0)

        Returns:
            y_1

        Raises:
            ConfigurationError: if y1 lies outside the feasible set
        """
        level = np.zeros(self.n) if y1 is None else as_vector(y1, n=self.n, name="initial level y1")
        if not self.feasible_set.contains(level):
            raise ConfigurationError(
                f"Initial level {level.tolist()} lies outside the feasible set {self.feasible_set!r}"
            )
        self.t = 0
        self.cycle_index = 1
        self.updated = True
        self.last_eta = 0.0
        self.y1 = level.copy()
        self._y = level
        self._reset(level)
        return level.copy()

    def _reset(self, y1: np.ndarray) -> None:
        """Hook for subclasses holding extra state."""

    def propose(self) -> np.ndarray:
        """Current order-up-to level y_t."""
        if self._y is None:
            raise ConfigurationError(f"Policy '{self.name}' used before initialize()")
        return self._y.copy()

    def observe(self, g: np.ndarray, x_next: Optional[np.ndarray] = None) -> None:
        """
        Receive the period's subgradient and next state, then choose y_{t+1}.

        Args:
            g: subgradient g_t at y_t
            x_next: inventory state x_{t+1}
        """
        if self._y is None:
            raise ConfigurationError(f"Policy '{self.name}' used before initialize()")
        self.t += 1
        self._y = self._next_level(np.asarray(g, dtype=float), x_next)

    @abstractmethod
    def _next_level(self, g: np.ndarray, x_next: Optional[np.ndarray]) -> np.ndarray:
        """Compute y_{t+1}; ``self.t`` is the period whose feedback was just observed."""

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name}
