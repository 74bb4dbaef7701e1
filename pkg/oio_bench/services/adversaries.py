"""
Adversarial demand constructions forcing linear regret.

- Bait construction: against any deterministic single-product lost-sales
  policy, replay it under a constant bait demand and cut demand to zero
  from the first period it holds positive stock.
- Summable-demand construction: with positive demands summing below the
  initial level and a linear loss, every feasible policy keeps paying for
  stock it can never shed.
"""
from typing import Callable, Optional, Tuple

import numpy as np
import logging

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.feasible_sets import Box
from oio_bench.models.losses import LinearLoss, Loss, NewsvendorLoss
from oio_bench.models.records import FeedbackMode
from oio_bench.services.demand import AdversaryProp1, AdversaryProp2, Deterministic
from oio_bench.services.dynamics import LostSales
from oio_bench.services.policies.base import BasePolicy
from oio_bench.services.simulator import run

logger = logging.getLogger(__name__)

PolicyFactory = Callable[[], BasePolicy]


def adversary_prop1(
    policy_factory: PolicyFactory,
    bait: float,
    horizon: int,
    D: float,
    loss: Optional[Loss] = None,
    feedback: FeedbackMode = FeedbackMode.CENSORED,
) -> AdversaryProp1:
    """
    Build the bait-and-cut demand sequence for a deterministic policy.

    Args:
        policy_factory: returns a fresh single-product policy on Box [0, D]
        bait: constant bait demand in (0, D]
        horizon: T
        D: top of the box
        loss: loss seen by the policy during the replay (default h=1, p=200)
        feedback: feedback mode of the replay

    Returns:
        AdversaryProp1 source: bait demand before the first period T0 with
        a positive level under the bait, zeros from T0 on (constant bait
        demand when no such period exists)

    Raises:
        ConfigurationError: randomized policy, bait outside (0, D], bad sizes
    """
    if not 0 < bait <= D:
        raise ConfigurationError(f"Bait demand must lie in (0, D={D}], got {bait}")
    if horizon < 1:
        raise ConfigurationError(f"Horizon must be >= 1, got {horizon}")
    policy = policy_factory()
    if not policy.deterministic:
        raise ConfigurationError(
            f"Policy '{policy.name}' is randomized; the bait construction needs a deterministic policy"
        )
    if policy.n != 1:
        raise ConfigurationError(f"Bait construction is single-product, policy has n={policy.n}")

    loss = loss or NewsvendorLoss.from_ratio(1)
    replay = run(
        dynamic=LostSales(),
        demand=Deterministic.constant(bait, n=1),
        loss=loss,
        feasible_set=Box([0.0], [D]),
        policy=policy,
        feedback=feedback,
        T=horizon,
    )
    positive = np.flatnonzero(replay.y[:, 0] > 0)
    sequence = np.full((horizon, 1), float(bait))
    switch_period: Optional[int] = None
    if positive.size:
        switch_period = int(positive[0]) + 1
        sequence[switch_period - 1:] = 0.0
    logger.info(
        f"Bait construction for '{policy.name}': T={horizon}, bait={bait}, "
        f"switch_period={switch_period}"
    )
    return AdversaryProp1(bait, sequence, switch_period)


def adversary_prop2(y1: float, budget_ratio: float, horizon: int) -> Tuple[AdversaryProp2, LinearLoss]:
    """
    Summable demands d_t = ratio * y1 * 2^-t with the loss l_t(y) = y.

    Every feasible policy started at y1 has R_T >= y1 (1 - ratio) T.

    Raises:
        ConfigurationError: y1 <= 0 or ratio outside (0, 1)
    """
    source = AdversaryProp2(y1, budget_ratio, horizon)
    return source, LinearLoss(1)
