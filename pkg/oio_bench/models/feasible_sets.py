"""
Feasible sets for order-up-to levels.

Both variants are closed, convex, bounded subsets of the nonnegative orthant:
- Box: prod_i [lower_i, upper_i]
- Capacity: {y >= 0, sum_i y_i <= cap}
"""
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.vectors import VectorLike, as_vector


class SetKind(str, Enum):
    """Supported feasible set variants."""
    BOX = "box"
    CAPACITY = "capacity"


class FeasibleSet(ABC):
    """Abstract feasible set with Euclidean projection and exact diameter."""

    kind: SetKind
    n: int

    @abstractmethod
    def project(self, v: np.ndarray) -> np.ndarray:
        """Euclidean projection of v onto the set."""

    @abstractmethod
    def diameter(self) -> float:
        """Exact Euclidean diameter."""

    @abstractmethod
    def box_envelope(self) -> Tuple[np.ndarray, np.ndarray]:
        """Smallest box containing the set."""

    @abstractmethod
    def contains(self, v: np.ndarray, tol: float = 0.0) -> bool:
        """Membership test with absolute tolerance."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Serializable description."""

    def _check_dim(self, v: np.ndarray) -> np.ndarray:
        if v.shape != (self.n,):
            raise ConfigurationError(f"Expected a vector of length {self.n}, got shape {v.shape}")
        return v


class Box(FeasibleSet):
    """Box constraints prod_i [lower_i, upper_i] with 0 <= lower <= upper."""

    kind = SetKind.BOX

    def __init__(self, lower: VectorLike, upper: VectorLike, n: Optional[int] = None):
        upper_arr = as_vector(upper, n=n, name="box upper")
        self.n = upper_arr.size
        self.lower = as_vector(lower, n=self.n, name="box lower")
        self.upper = upper_arr
        if np.any(self.lower < 0):
            raise ConfigurationError(f"Box lower bounds must be >= 0, got {self.lower.tolist()}")
        if np.any(self.lower > self.upper):
            raise ConfigurationError("Box lower bounds must not exceed upper bounds")

    def project(self, v: np.ndarray) -> np.ndarray:
        v = self._check_dim(v)
        return np.minimum(np.maximum(v, self.lower), self.upper)

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def box_envelope(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.lower.copy(), self.upper.copy()

    def contains(self, v: np.ndarray, tol: float = 0.0) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= self.lower - tol) and np.all(v <= self.upper + tol))

    def sub_box(self, i: int) -> "Box":
        """Single-product box of coordinate i."""
        return Box([self.lower[i]], [self.upper[i]])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }

    def __repr__(self) -> str:
        return f"Box(n={self.n}, lower={self.lower.tolist()}, upper={self.upper.tolist()})"


class Capacity(FeasibleSet):
    """Capacity constraint {y >= 0, sum_i y_i <= cap}."""

    kind = SetKind.CAPACITY

    def __init__(self, n: int, cap: float):
        if n < 1:
            raise ConfigurationError(f"Capacity set needs n >= 1, got {n}")
        if not np.isfinite(cap) or cap < 0:
            raise ConfigurationError(f"Capacity must be finite and >= 0, got {cap}")
        self.n = int(n)
        self.cap = float(cap)

    def project(self, v: np.ndarray) -> np.ndarray:
        """
        Project onto the capped simplex.

        If the positive part already fits the capacity it is the projection;
        otherwise the projection lies on the face sum(y) = cap and is found
        with the sorted-threshold rule.
        """
        v = self._check_dim(v)
        clipped = np.maximum(v, 0.0)
        if clipped.sum() <= self.cap:
            return clipped
        return _project_simplex(v, self.cap)

    def diameter(self) -> float:
        if self.n == 1:
            return self.cap
        return self.cap * float(np.sqrt(2.0))

    def box_envelope(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.zeros(self.n), np.full(self.n, self.cap)

    def contains(self, v: np.ndarray, tol: float = 0.0) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= -tol) and v.sum() <= self.cap + tol)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "n": self.n, "cap": self.cap}

    def __repr__(self) -> str:
        return f"Capacity(n={self.n}, cap={self.cap})"


def _project_simplex(v: np.ndarray, z: float) -> np.ndarray:
    """Projection onto {y >= 0, sum(y) = z} (sort-based threshold)."""
    if z == 0.0:
        return np.zeros_like(v)
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - z
    ind = np.arange(1, v.size + 1)
    cond = u - cssv / ind > 0
    rho = int(np.count_nonzero(cond))
    theta = cssv[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def project(feasible_set: FeasibleSet, v: VectorLike) -> np.ndarray:
    """Euclidean projection of v onto the feasible set."""
    return feasible_set.project(np.asarray(v, dtype=float))


def diameter(feasible_set: FeasibleSet) -> float:
    """Exact Euclidean diameter of the feasible set."""
    return feasible_set.diameter()


def feasible_set_from_dict(data: Dict[str, Any]) -> FeasibleSet:
    """Rebuild a set from ``to_dict`` output."""
    kind = SetKind(data["kind"])
    if kind == SetKind.BOX:
        return Box(data["lower"], data["upper"])
    return Capacity(data["n"], data["cap"])
