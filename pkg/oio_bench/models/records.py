"""
Run records: trajectories, regret reports, cycle statistics and audits.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from oio_bench.core.exceptions import ConfigurationError


class FeedbackMode(str, Enum):
    """What the manager observes after each period."""
    CENSORED = "censored"
    FULL_INFO = "full_info"


@dataclass
class NonDegeneracyParams:
    """Uniformly probably positive demand: P(all i: d_{t,i} >= rho | past) >= mu."""
    rho: float
    mu: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigurationError(f"rho must be > 0, got {self.rho}")
        if not 0 < self.mu <= 1:
            raise ConfigurationError(f"mu must lie in (0, 1], got {self.mu}")

    def to_dict(self) -> Dict[str, float]:
        return {"rho": self.rho, "mu": self.mu}


@dataclass
class Trajectory:
    """
    Per-period record of one protocol run.

    Arrays are indexed by period t-1 (row 0 is period 1):
    x, y, d, s, g have shape (T, n); loss, eta have shape (T,);
    cycle holds the cycle index k(t); updated marks update periods t_k.
    x_final is the state x_{T+1} left after the last period.
    """
    x: np.ndarray
    y: np.ndarray
    d: np.ndarray
    s: np.ndarray
    g: np.ndarray
    loss: np.ndarray
    cycle: np.ndarray
    updated: np.ndarray
    eta: np.ndarray
    x_final: np.ndarray
    seed: Optional[int] = None
    config_hash: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def T(self) -> int:
        return int(self.y.shape[0])

    @property
    def n(self) -> int:
        return int(self.y.shape[1])

    @property
    def cumulative_loss(self) -> float:
        return float(np.sum(self.loss))

    def next_state(self, t: int) -> np.ndarray:
        """x_{t+1} for a 1-based period t."""
        if t < self.T:
            return self.x[t]
        return self.x_final

    def head(self, horizon: int) -> "Trajectory":
        """Prefix trajectory of the first `horizon` periods."""
        if not 1 <= horizon <= self.T:
            raise ConfigurationError(f"Horizon {horizon} outside [1, {self.T}]")
        return Trajectory(
            x=self.x[:horizon],
            y=self.y[:horizon],
            d=self.d[:horizon],
            s=self.s[:horizon],
            g=self.g[:horizon],
            loss=self.loss[:horizon],
            cycle=self.cycle[:horizon],
            updated=self.updated[:horizon],
            eta=self.eta[:horizon],
            x_final=self.next_state(horizon).copy(),
            seed=self.seed,
            config_hash=self.config_hash,
            metadata=dict(self.metadata),
        )

    @classmethod
    def allocate(cls, T: int, n: int, seed: Optional[int] = None) -> "Trajectory":
        """Preallocated empty trajectory for a horizon T."""
        return cls(
            x=np.zeros((T, n)),
            y=np.zeros((T, n)),
            d=np.zeros((T, n)),
            s=np.zeros((T, n)),
            g=np.zeros((T, n)),
            loss=np.zeros(T),
            cycle=np.zeros(T, dtype=np.int64),
            updated=np.zeros(T, dtype=bool),
            eta=np.zeros(T),
            x_final=np.zeros(n),
            seed=seed,
        )


@dataclass
class BoundCheck:
    """One theoretical bound compared with a measured value."""
    name: str
    value: float
    satisfied: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "value": self.value, "satisfied": self.satisfied}


@dataclass
class RegretReport:
    """Regret R_T = cumulative_loss - hindsight_value and the bounds checked against it."""
    regret: float
    hindsight_y: np.ndarray
    hindsight_value: float
    cumulative_loss: float
    bound_checks: List[BoundCheck] = field(default_factory=list)

    @property
    def all_bounds_satisfied(self) -> bool:
        return all(check.satisfied for check in self.bound_checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "R_T": self.regret,
            "hindsight_y": self.hindsight_y.tolist(),
            "hindsight_value": self.hindsight_value,
            "cumulative_loss": self.cumulative_loss,
            "bound_checks": [check.to_dict() for check in self.bound_checks],
        }


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if np.isfinite(value) else None


class StatsStatus(str, Enum):
    OK = "ok"
    INSUFFICIENT_DATA = "insufficient_data"


@dataclass
class CycleStats:
    """Empirical cycle-length statistics of a cyclic policy run."""
    lengths: np.ndarray
    residual: int
    mean: float
    second_moment: float
    tail: Dict[int, float]
    status: StatsStatus
    flags: Dict[str, bool] = field(default_factory=dict)
    thresholds: Dict[str, float] = field(default_factory=dict)

    @property
    def completed_cycles(self) -> int:
        return int(self.lengths.size)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "completed_cycles": self.completed_cycles,
            "residual": self.residual,
            "mean": _finite_or_none(self.mean),
            "second_moment": _finite_or_none(self.second_moment),
            "tail": {str(m): p for m, p in self.tail.items()},
            "status": self.status.value,
            "flags": dict(self.flags),
            "thresholds": dict(self.thresholds),
        }


@dataclass
class AuditResult:
    """Outcome of a feasibility audit: pass, or the first violating period."""
    passed: bool
    period: Optional[int] = None
    y: Optional[np.ndarray] = None
    x: Optional[np.ndarray] = None

    def to_dict(self) -> Dict[str, Any]:
        if self.passed:
            return {"passed": True}
        return {
            "passed": False,
            "period": self.period,
            "y": self.y.tolist(),
            "x": self.x.tolist(),
        }
