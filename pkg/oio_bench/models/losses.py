"""
Loss plug-ins: the newsvendor cost and a linear loss.

Each loss exposes evaluation, a deterministic full-information subgradient,
the subgradient computable from censored sales, and its gradient bound G.
"""
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from oio_bench.core.exceptions import ConfigurationError, ProtocolViolation
from oio_bench.models.vectors import VectorLike, as_vector


class LossKind(str, Enum):
    """Supported loss families."""
    NEWSVENDOR = "newsvendor"
    LINEAR = "linear"


class Loss(ABC):
    """Convex loss l_t(y) = c(y, d_t) with deterministic subgradient selections."""

    kind: LossKind
    n: int

    @property
    @abstractmethod
    def gradient_bound(self) -> float:
        """G such that every selected subgradient has norm <= G."""

    @abstractmethod
    def evaluate(self, y: np.ndarray, d: np.ndarray) -> float:
        """Loss value at level y under demand d."""

    @abstractmethod
    def evaluate_many(self, y: np.ndarray, demands: np.ndarray) -> np.ndarray:
        """Per-period losses of a constant level y against a T x n demand matrix."""

    @abstractmethod
    def subgradient(self, y: np.ndarray, d: np.ndarray) -> np.ndarray:
        """Full-information subgradient selection."""

    @abstractmethod
    def censored_subgradient(self, y: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Subgradient computed from sales s = min(y, d)."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Serializable description."""

    def sum_subgradient(self, y: np.ndarray, demands: np.ndarray) -> np.ndarray:
        """Subgradient of sum_t l_t at y (used by the offline solver)."""
        return np.sum([self.subgradient(y, d) for d in demands], axis=0)


class NewsvendorLoss(Loss):
    """
    Newsvendor cost c(y, d) = sum_i h_i [y_i - d_i]^+ + p_i [d_i - y_i]^+.

    h is the unit holding (overage) cost and p the unit lost-sales penalty
    (underage) cost.
    """

    kind = LossKind.NEWSVENDOR

    def __init__(self, h: VectorLike, p: VectorLike, n: Optional[int] = None):
        self.h = as_vector(h, n=n, name="holding cost h", nonnegative=True)
        self.n = self.h.size
        self.p = as_vector(p, n=self.n, name="penalty cost p", nonnegative=True)
        self._neg_p = -self.p
        self._bound = float(np.sqrt(self.n) * max(self.h.max(), self.p.max()))

    @classmethod
    def from_ratio(cls, n: int, h: float = 1.0, ratio: float = 200.0) -> "NewsvendorLoss":
        """Uniform costs with p_i = ratio * h_i."""
        return cls(np.full(n, h), np.full(n, ratio * h))

    @property
    def gradient_bound(self) -> float:
        return self._bound

    @property
    def critical_ratio(self) -> np.ndarray:
        """Per-product p / (h + p); 0 where both costs vanish."""
        total = self.h + self.p
        return np.divide(self.p, total, out=np.zeros_like(total), where=total > 0)

    def evaluate(self, y: np.ndarray, d: np.ndarray) -> float:
        diff = y - d
        return float(
            np.dot(self.h, np.maximum(diff, 0.0)) + np.dot(self.p, np.maximum(-diff, 0.0))
        )

    def evaluate_many(self, y: np.ndarray, demands: np.ndarray) -> np.ndarray:
        diff = y[np.newaxis, :] - demands
        return np.maximum(diff, 0.0) @ self.h + np.maximum(-diff, 0.0) @ self.p

    def subgradient(self, y: np.ndarray, d: np.ndarray) -> np.ndarray:
        return self.censored_subgradient(y, np.minimum(y, d))

    def censored_subgradient(self, y: np.ndarray, s: np.ndarray) -> np.ndarray:
        if np.any(s > y):
            raise ProtocolViolation(
                f"Sales exceed the order-up-to level: s={s.tolist()} y={y.tolist()}"
            )
        return np.where(y > s, self.h, self._neg_p)

    def sum_subgradient(self, y: np.ndarray, demands: np.ndarray) -> np.ndarray:
        over = np.count_nonzero(y[np.newaxis, :] > demands, axis=0)
        return self.h * over - self.p * (demands.shape[0] - over)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "h": self.h.tolist(), "p": self.p.tolist()}


class LinearLoss(Loss):
    """Linear loss l(y) = <w, y>, independent of demand."""

    kind = LossKind.LINEAR

    def __init__(self, n: int = 1, weights: Optional[VectorLike] = None):
        if weights is None:
            weights = np.ones(n)
        self.weights = as_vector(weights, n=n, name="linear weights")
        self.n = self.weights.size
        self._bound = float(np.linalg.norm(self.weights))

    @property
    def gradient_bound(self) -> float:
        return self._bound

    def evaluate(self, y: np.ndarray, d: np.ndarray) -> float:
        return float(np.dot(self.weights, y))

    def evaluate_many(self, y: np.ndarray, demands: np.ndarray) -> np.ndarray:
        return np.full(demands.shape[0], float(np.dot(self.weights, y)))

    def subgradient(self, y: np.ndarray, d: np.ndarray) -> np.ndarray:
        return self.weights.copy()

    def censored_subgradient(self, y: np.ndarray, s: np.ndarray) -> np.ndarray:
        if np.any(s > y):
            raise ProtocolViolation(
                f"Sales exceed the order-up-to level: s={s.tolist()} y={y.tolist()}"
            )
        return self.weights.copy()

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "weights": self.weights.tolist()}


def _check_inputs(loss: Loss, *vectors: np.ndarray) -> None:
    for v in vectors:
        if np.shape(v) != (loss.n,):
            raise ConfigurationError(
                f"Dimension mismatch: loss has n={loss.n}, got vector of shape {np.shape(v)}"
            )


def newsvendor_cost(y: VectorLike, d: VectorLike, loss: NewsvendorLoss) -> float:
    """
    Evaluate c(y, d) for the newsvendor loss.

    Raises:
        ConfigurationError: dimension mismatch
        ProtocolViolation: negative demand
    """
    y_arr = np.asarray(y, dtype=float)
    d_arr = np.asarray(d, dtype=float)
    _check_inputs(loss, y_arr, d_arr)
    if np.any(d_arr < 0):
        raise ProtocolViolation(f"Demand must be nonnegative, got d={d_arr.tolist()}")
    return loss.evaluate(y_arr, d_arr)


def censored_subgradient(y: VectorLike, s: VectorLike, loss: Loss) -> np.ndarray:
    """g_i = h_i 1{y_i > s_i} - p_i 1{y_i = s_i} from sales s = min(y, d)."""
    y_arr = np.asarray(y, dtype=float)
    s_arr = np.asarray(s, dtype=float)
    _check_inputs(loss, y_arr, s_arr)
    return loss.censored_subgradient(y_arr, s_arr)


def full_info_subgradient(y: VectorLike, d: VectorLike, loss: Loss) -> np.ndarray:
    """Deterministic selection: the censored formula applied to min(y, d)."""
    y_arr = np.asarray(y, dtype=float)
    d_arr = np.asarray(d, dtype=float)
    _check_inputs(loss, y_arr, d_arr)
    return loss.subgradient(y_arr, d_arr)


def is_feasible_step(y_prev: VectorLike, y_next: VectorLike, d: VectorLike) -> bool:
    """
    Sufficient feasibility condition for a level change.

    If ||y' - y||_2 <= min_i d_i then y' ⪰ [y - d]^+, so any dynamic
    satisfying the dynamical constraint keeps y' feasible.
    """
    y_prev = np.asarray(y_prev, dtype=float)
    y_next = np.asarray(y_next, dtype=float)
    d = np.asarray(d, dtype=float)
    return float(np.linalg.norm(y_next - y_prev)) <= float(np.min(d))


def loss_from_dict(data: Dict[str, Any]) -> Loss:
    kind = LossKind(data["kind"])
    if kind == LossKind.NEWSVENDOR:
        return NewsvendorLoss(data["h"], data["p"])
    weights = data["weights"]
    return LinearLoss(len(weights), weights)
