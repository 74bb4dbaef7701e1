"""
Exception hierarchy for the inventory benchmark.

Every error raised by the library derives from ``OIOError`` so callers can
isolate failures per replication without catching unrelated exceptions.
"""
from typing import Any, Optional

import numpy as np


class OIOError(Exception):
    """Base class for all library errors."""


class ConfigurationError(OIOError, ValueError):
    """Invalid parameters, dimension mismatches or inconsistent sets."""


class ProtocolViolation(OIOError):
    """An interaction broke the inventory protocol."""


class FeasibilityViolation(ProtocolViolation):
    """
    A policy proposed an order-up-to level below the inventory state.

    Attributes:
        period: 1-based period at which y_t ⪰ x_t failed
        y: proposed order-up-to level
        x: inventory state at the beginning of the period
        trajectory: partial trajectory up to (excluding) the failing period
    """

    def __init__(
        self,
        period: int,
        y: np.ndarray,
        x: np.ndarray,
        trajectory: Optional[Any] = None,
    ):
        self.period = period
        self.y = np.array(y, dtype=float, copy=True)
        self.x = np.array(x, dtype=float, copy=True)
        self.trajectory = trajectory
        super().__init__(
            f"Feasibility violated at t={period}: y={self.y.tolist()} x={self.x.tolist()}"
        )

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "y": self.y.tolist(),
            "x": self.x.tolist(),
        }


class IngestionError(OIOError, ValueError):
    """A demand file could not be parsed or validated."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class DemandExhausted(OIOError):
    """A finite demand source has no more periods."""


class TruncationError(DemandExhausted):
    """The demand source ended before the requested horizon."""
