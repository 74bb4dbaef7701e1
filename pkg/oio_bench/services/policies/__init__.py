"""
Inventory policies: OSD, COSD and MaxCOSD, baselines and wrappers.
"""
from typing import Optional

import numpy as np

from oio_bench.models.experiment import PolicySpec
from oio_bench.models.feasible_sets import FeasibleSet
from oio_bench.models.losses import Loss
from .base import BasePolicy
from .rates import LearningRate, ConstantRate, SqrtDecayRate, AdaptiveRate
from .osd import OSDPolicy, osd_policy
from .cosd import COSDPolicy, CycleState, UpdateStrategy, adaptive_eta, cosd_policy, held_level_rule
from .maxcosd import MaxCOSDPolicy, maxcosd_policy
from .baselines import ConstantLevelPolicy
from .wrappers import FeasibilityGuard, PerProductPolicy


def make_rate(spec: PolicySpec, D: float, G: float) -> LearningRate:
    """Learning-rate schedule named by the spec."""
    if spec.rate == "constant":
        return ConstantRate(spec.eta)
    if spec.rate == "sqrt_decay":
        return SqrtDecayRate(spec.gamma, D, G)
    return AdaptiveRate(spec.gamma, D)


def make_policy(spec: PolicySpec, feasible_set: FeasibleSet, loss: Loss) -> BasePolicy:
    """
    Build an uninitialized policy from its configuration.

    Args:
        spec: policy configuration
        feasible_set: set of admissible levels (D is its diameter)
        loss: loss plug-in (G is its gradient bound)

    Returns:
        Policy instance; call ``initialize(spec.y1)`` before use
    """
    D = feasible_set.diameter()
    G = loss.gradient_bound
    policy: BasePolicy
    if spec.name == "maxcosd":
        policy = MaxCOSDPolicy(feasible_set, spec.gamma)
    elif spec.name == "per_product_maxcosd":
        gamma = spec.gamma
        policy = PerProductPolicy(feasible_set, lambda box: MaxCOSDPolicy(box, gamma))
    elif spec.name == "osd":
        policy = OSDPolicy(feasible_set, make_rate(spec, D, G))
    elif spec.name == "cosd":
        policy = COSDPolicy(
            feasible_set,
            make_rate(spec, D, G),
            strategy=UpdateStrategy(spec.strategy),
            tau=spec.tau,
        )
    else:
        policy = ConstantLevelPolicy(feasible_set, spec.level)

    if spec.guard:
        policy = FeasibilityGuard(policy)
    return policy


def initial_level(spec: PolicySpec, n: int) -> Optional[np.ndarray]:
    """y1 from the policy config (None means the policy default, 0)."""
    if spec.y1 is None:
        return None
    return np.broadcast_to(np.asarray(spec.y1, dtype=float), (n,)).copy()


__all__ = [
    "BasePolicy",
    "LearningRate",
    "ConstantRate",
    "SqrtDecayRate",
    "AdaptiveRate",
    "OSDPolicy",
    "osd_policy",
    "COSDPolicy",
    "CycleState",
    "UpdateStrategy",
    "adaptive_eta",
    "cosd_policy",
    "held_level_rule",
    "MaxCOSDPolicy",
    "maxcosd_policy",
    "ConstantLevelPolicy",
    "FeasibilityGuard",
    "PerProductPolicy",
    "make_rate",
    "make_policy",
    "initial_level",
]
