"""
Learning-rate schedules.

Every schedule answers eta(t, within_norm_sq, past_norms_sq) where
within_norm_sq is ||sum of the current cycle's gradients||^2 (including
g_t) and past_norms_sq the same quantity summed over completed cycles.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict

import numpy as np

from oio_bench.core.exceptions import ConfigurationError


class LearningRate(ABC):
    """Abstract learning-rate schedule."""

    name: str

    @abstractmethod
    def eta(self, t: int, within_norm_sq: float, past_norms_sq: float) -> float:
        """Learning rate used to form y_{t+1}."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Serializable description."""


class ConstantRate(LearningRate):
    name = "constant"

    def __init__(self, eta: float):
        if eta < 0:
            raise ConfigurationError(f"Learning rate must be >= 0, got {eta}")
        self.value = float(eta)

    def eta(self, t: int, within_norm_sq: float, past_norms_sq: float) -> float:
        return self.value

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "eta": self.value}


class SqrtDecayRate(LearningRate):
    """eta_t = gamma D / (G sqrt(t)); 0 when G = 0."""

    name = "sqrt_decay"

    def __init__(self, gamma: float, D: float, G: float):
        if gamma <= 0:
            raise ConfigurationError(f"gamma must be > 0, got {gamma}")
        if D < 0 or G < 0:
            raise ConfigurationError(f"D and G must be >= 0, got D={D}, G={G}")
        self.gamma = float(gamma)
        self.D = float(D)
        self.G = float(G)

    def eta(self, t: int, within_norm_sq: float, past_norms_sq: float) -> float:
        if self.G == 0:
            return 0.0
        return self.gamma * self.D / (self.G * np.sqrt(t))

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "gamma": self.gamma, "D": self.D, "G": self.G}


class AdaptiveRate(LearningRate):
    """eta_t = gamma D / sqrt(within_norm_sq + past_norms_sq); 0 on a zero denominator."""

    name = "adaptive"

    def __init__(self, gamma: float, D: float):
        if gamma <= 0:
            raise ConfigurationError(f"gamma must be > 0, got {gamma}")
        if D < 0:
            raise ConfigurationError(f"D must be >= 0, got {D}")
        self.gamma = float(gamma)
        self.D = float(D)

    def eta(self, t: int, within_norm_sq: float, past_norms_sq: float) -> float:
        denominator = np.sqrt(within_norm_sq + past_norms_sq)
        if denominator == 0:
            return 0.0
        return float(self.gamma * self.D / denominator)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "gamma": self.gamma, "D": self.D}
