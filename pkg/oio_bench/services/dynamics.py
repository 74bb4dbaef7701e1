"""
Inventory dynamics: state transitions x_{t+1} from (y_t, d_t).

Implements:
- Stateless (x_t = 0)
- Backlogging (x_{t+1} = y_t - d_t)
- Lost sales (x_{t+1} = [y_t - d_t]^+)
- Perishable FIFO with fixed lifetime m
- User-defined transitions checked against the dynamical constraint

Transitions are pure functions of (state, y, d); the caller owns the state.
"""
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
import logging

from oio_bench.core.exceptions import ConfigurationError, FeasibilityViolation, ProtocolViolation

logger = logging.getLogger(__name__)


class DynamicKind(str, Enum):
    """Supported inventory dynamics."""
    STATELESS = "stateless"
    BACKLOGGING = "backlogging"
    LOST_SALES = "lost_sales"
    PERISHABLE = "perishable"
    CUSTOM = "custom"


class Dynamic(ABC):
    """Abstract inventory dynamic."""

    kind: DynamicKind

    @abstractmethod
    def initial_state(self, n: int) -> Tuple[np.ndarray, Any]:
        """Return (x_1, state) with x_1 = 0."""

    @abstractmethod
    def _transition(self, state: Any, y: np.ndarray, d: np.ndarray) -> Tuple[np.ndarray, Any]:
        """Raw transition without feasibility checks."""

    @abstractmethod
    def on_hand(self, state: Any) -> np.ndarray:
        """Inventory state x encoded by the dynamic-specific state."""

    def step(self, state: Any, y: np.ndarray, d: np.ndarray) -> Tuple[np.ndarray, Any]:
        """
        Apply one period of the dynamic.

        Args:
            state: dynamic-specific state at the beginning of the period
            y: order-up-to level (must dominate the current on-hand total)
            d: demand (nonnegative)

        Returns:
            (x_next, state_next)

        Raises:
            FeasibilityViolation: if y does not dominate the current state
        """
        x = self.on_hand(state)
        if not np.all(y >= x):
            raise FeasibilityViolation(period=-1, y=y, x=x)
        return self._transition(state, y, d)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value}


class Stateless(Dynamic):
    """Inventory is emptied every period."""

    kind = DynamicKind.STATELESS

    def initial_state(self, n: int) -> Tuple[np.ndarray, Any]:
        _check_n(n)
        x = np.zeros(n)
        return x, x.copy()

    def on_hand(self, state: np.ndarray) -> np.ndarray:
        return state

    def _transition(self, state, y, d):
        x_next = np.zeros_like(y)
        return x_next, x_next.copy()


class Backlogging(Dynamic):
    """Unmet demand persists as negative stock."""

    kind = DynamicKind.BACKLOGGING

    def initial_state(self, n: int) -> Tuple[np.ndarray, Any]:
        _check_n(n)
        x = np.zeros(n)
        return x, x.copy()

    def on_hand(self, state: np.ndarray) -> np.ndarray:
        return state

    def _transition(self, state, y, d):
        x_next = y - d
        return x_next, x_next.copy()


class LostSales(Dynamic):
    """Unmet demand is lost."""

    kind = DynamicKind.LOST_SALES

    def initial_state(self, n: int) -> Tuple[np.ndarray, Any]:
        _check_n(n)
        x = np.zeros(n)
        return x, x.copy()

    def on_hand(self, state: np.ndarray) -> np.ndarray:
        return state

    def _transition(self, state, y, d):
        x_next = np.maximum(y - d, 0.0)
        return x_next, x_next.copy()


class PerishableFIFO(Dynamic):
    """
    Fixed-lifetime perishable stock issued oldest-first, lost sales.

    The state is an (m, n) array of age buckets: row j holds the units of age j.
    Each period fresh units y - x enter age 0, demand consumes the oldest units
    first, survivors age by one and units reaching age m are discarded.
    Products are handled independently.
    """

    kind = DynamicKind.PERISHABLE

    def __init__(self, lifetime: int):
        if lifetime < 1:
            raise ConfigurationError(f"Perishable lifetime must be >= 1, got {lifetime}")
        self.lifetime = int(lifetime)

    def initial_state(self, n: int) -> Tuple[np.ndarray, Any]:
        _check_n(n)
        buckets = np.zeros((self.lifetime, n))
        return np.zeros(n), buckets

    def on_hand(self, state: np.ndarray) -> np.ndarray:
        return state.sum(axis=0)

    def _transition(self, state, y, d):
        buckets = state.copy()
        buckets[0] += y - buckets.sum(axis=0)

        remaining = np.array(d, dtype=float, copy=True)
        for age in range(self.lifetime - 1, -1, -1):
            issued = np.minimum(buckets[age], remaining)
            buckets[age] -= issued
            remaining -= issued

        aged = np.zeros_like(buckets)
        aged[1:] = buckets[:-1]
        x_next = aged.sum(axis=0)
        return x_next, aged

    def perished(self, state: np.ndarray, y: np.ndarray, d: np.ndarray) -> np.ndarray:
        """Units discarded at the end of a period (for conservation checks)."""
        buckets = state.copy()
        buckets[0] += y - buckets.sum(axis=0)
        remaining = np.array(d, dtype=float, copy=True)
        for age in range(self.lifetime - 1, -1, -1):
            issued = np.minimum(buckets[age], remaining)
            buckets[age] -= issued
            remaining -= issued
        return buckets[-1].copy()

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "lifetime": self.lifetime}


class CustomDynamic(Dynamic):
    """
    User-defined deterministic transition x_{t+1} = fn(x_t, y_t, d_t).

    Only the dynamical constraint x_{t+1} ⪯ [y - d]^+ is enforced.
    """

    kind = DynamicKind.CUSTOM

    def __init__(self, fn: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray], name: str = "custom"):
        self.fn = fn
        self.name = name

    def initial_state(self, n: int) -> Tuple[np.ndarray, Any]:
        _check_n(n)
        x = np.zeros(n)
        return x, x.copy()

    def on_hand(self, state: np.ndarray) -> np.ndarray:
        return state

    def _transition(self, state, y, d):
        x_next = np.asarray(self.fn(state.copy(), y.copy(), d.copy()), dtype=float)
        if x_next.shape != y.shape:
            raise ProtocolViolation(
                f"Dynamic '{self.name}' returned shape {x_next.shape}, expected {y.shape}"
            )
        if not np.all(x_next <= np.maximum(y - d, 0.0)):
            logger.error(f"Dynamic '{self.name}' breached x_next <= [y - d]^+")
            raise ProtocolViolation(
                f"Dynamic '{self.name}' breached the dynamical constraint: "
                f"x_next={x_next.tolist()} y={y.tolist()} d={d.tolist()}"
            )
        return x_next, x_next.copy()

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "name": self.name}


def _check_n(n: int) -> None:
    if n < 1:
        raise ConfigurationError(f"Product count must be >= 1, got {n}")


def initial_state(dynamic: Dynamic, n: int) -> Tuple[np.ndarray, Any]:
    """(x_1, state) with x_1 = 0."""
    return dynamic.initial_state(n)


def step(dynamic: Dynamic, state: Any, y: np.ndarray, d: np.ndarray) -> Tuple[np.ndarray, Any]:
    """One transition of the given dynamic."""
    return dynamic.step(state, np.asarray(y, dtype=float), np.asarray(d, dtype=float))


def make_dynamic(kind: str, lifetime: Optional[int] = None) -> Dynamic:
    """Build a dynamic from its configuration name."""
    kind = DynamicKind(kind)
    if kind == DynamicKind.STATELESS:
        return Stateless()
    if kind == DynamicKind.BACKLOGGING:
        return Backlogging()
    if kind == DynamicKind.LOST_SALES:
        return LostSales()
    if kind == DynamicKind.PERISHABLE:
        if lifetime is None:
            raise ConfigurationError("Perishable dynamic requires 'lifetime'")
        return PerishableFIFO(lifetime)
    raise ConfigurationError("Custom dynamics cannot be built from configuration")
