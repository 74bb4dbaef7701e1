"""Policies: learning rates, OSD, COSD strategies, MaxCOSD, wrappers."""
import numpy as np
import pytest

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.experiment import PolicySpec
from oio_bench.models.feasible_sets import Box, Capacity
from oio_bench.models.losses import NewsvendorLoss
from oio_bench.services.demand import Deterministic, IIDPoisson
from oio_bench.services.dynamics import LostSales, Stateless
from oio_bench.services.policies import (
    AdaptiveRate,
    COSDPolicy,
    ConstantLevelPolicy,
    ConstantRate,
    FeasibilityGuard,
    MaxCOSDPolicy,
    OSDPolicy,
    PerProductPolicy,
    SqrtDecayRate,
    UpdateStrategy,
    initial_level,
    make_policy,
    maxcosd_policy,
    osd_policy,
)
from oio_bench.services.simulator import run


class TestRates:
    def test_constant(self):
        assert ConstantRate(0.3).eta(7, 1.0, 2.0) == 0.3

    def test_sqrt_decay(self):
        assert SqrtDecayRate(0.5, 1.0, 1.0).eta(4, 0.0, 0.0) == 0.25
        assert SqrtDecayRate(0.5, 1.0, 0.0).eta(4, 0.0, 0.0) == 0.0

    def test_adaptive(self):
        assert AdaptiveRate(1.0, 2.0).eta(1, 3.0, 1.0) == pytest.approx(1.0)

    def test_adaptive_zero_denominator(self):
        assert AdaptiveRate(1.0, 2.0).eta(1, 0.0, 0.0) == 0.0

    def test_invalid_gamma(self):
        with pytest.raises(ConfigurationError):
            AdaptiveRate(0.0, 1.0)


class TestOSD:
    def test_projected_step(self, unit_box):
        policy = osd_policy(unit_box, np.array([5.0]), ConstantRate(1.0))
        policy.observe(np.array([2.0]), np.array([0.0]))
        assert policy.propose().tolist() == [3.0]
        policy.observe(np.array([-20.0]), np.array([0.0]))
        assert policy.propose().tolist() == [10.0]
        assert policy.cycle_index == 3

    def test_initial_level_outside_set(self, unit_box):
        with pytest.raises(ConfigurationError):
            OSDPolicy(unit_box, ConstantRate(1.0)).initialize([11.0])

    def test_propose_before_initialize(self, unit_box):
        with pytest.raises(ConfigurationError):
            OSDPolicy(unit_box, ConstantRate(1.0)).propose()


class TestCyclicStrategies:
    def test_minibatch_holds_then_steps(self, unit_box):
        policy = COSDPolicy(unit_box, ConstantRate(0.1), UpdateStrategy.MINIBATCH, tau=3)
        policy.initialize([5.0])
        for _ in range(2):
            policy.observe(np.array([1.0]), np.array([0.0]))
            assert policy.propose().tolist() == [5.0]
            assert not policy.updated
        policy.observe(np.array([1.0]), np.array([0.0]))
        assert policy.propose()[0] == pytest.approx(4.7)
        assert policy.updated
        assert (policy.completed_cycles, policy.completed_periods) == (1, 3)

    def test_minibatch_requires_tau(self, unit_box):
        with pytest.raises(ConfigurationError):
            COSDPolicy(unit_box, ConstantRate(0.1), UpdateStrategy.MINIBATCH)

    def test_cup_waits_for_empty_stock(self, unit_box):
        policy = COSDPolicy(unit_box, ConstantRate(1.0), UpdateStrategy.CUP)
        policy.initialize([5.0])
        policy.observe(np.array([1.0]), np.array([2.0]))
        assert policy.propose().tolist() == [5.0]
        policy.observe(np.array([1.0]), np.array([0.0]))
        assert policy.propose().tolist() == [3.0]
        assert (policy.completed_cycles, policy.completed_periods) == (1, 2)

    def test_state_dependent_strategy_needs_state(self, unit_box):
        policy = MaxCOSDPolicy(unit_box, gamma=1.0)
        policy.initialize([5.0])
        with pytest.raises(ConfigurationError):
            policy.observe(np.array([1.0]), None)


class TestMaxCOSD:
    def test_holds_until_candidate_is_feasible(self, unit_box):
        policy = maxcosd_policy(unit_box, np.array([10.0]), gamma=1.0)
        policy.observe(np.array([1.0]), np.array([9.0]))
        assert policy.candidate.tolist() == [0.0]
        assert policy.propose().tolist() == [10.0]
        assert not policy.updated

        policy.observe(np.array([1.0]), np.array([8.0]))
        assert policy.propose().tolist() == [10.0]

        policy.observe(np.array([1.0]), np.array([0.0]))
        assert policy.updated
        assert policy.propose()[0] == pytest.approx(0.0, abs=1e-12)
        assert (policy.completed_cycles, policy.completed_periods) == (1, 3)
        assert policy.cycle_index == 2

    def test_invalid_gamma(self, unit_box):
        with pytest.raises(ConfigurationError):
            MaxCOSDPolicy(unit_box, gamma=0.0)

    def test_never_infeasible_on_lost_sales(self, maxcosd_run):
        assert np.all(maxcosd_run.y >= maxcosd_run.x)

    def test_feasible_for_large_gamma(self, unit_box, setting1_loss, poisson_one):
        traj = run(LostSales(), poisson_one, setting1_loss, unit_box, MaxCOSDPolicy(unit_box, gamma=10.0), T=300, seed=1)
        assert np.all(traj.y >= traj.x)


class TestEquivalences:
    def test_every_period_cosd_matches_osd(self, unit_box, setting1_loss, poisson_one):
        common = dict(dynamic=Stateless(), demand=poisson_one, loss=setting1_loss, feasible_set=unit_box, T=300, seed=4)
        osd = run(policy=OSDPolicy(unit_box, AdaptiveRate(0.1, 10.0)), **common)
        cosd = run(policy=COSDPolicy(unit_box, AdaptiveRate(0.1, 10.0)), **common)
        np.testing.assert_array_equal(osd.y, cosd.y)

    def test_maxcosd_on_stateless_matches_adaptive_osd(self, unit_box, setting1_loss, poisson_one):
        common = dict(dynamic=Stateless(), demand=poisson_one, loss=setting1_loss, feasible_set=unit_box, T=300, seed=4)
        osd = run(policy=OSDPolicy(unit_box, AdaptiveRate(0.1, 10.0)), **common)
        maxcosd = run(policy=MaxCOSDPolicy(unit_box, gamma=0.1), **common)
        np.testing.assert_array_equal(osd.y, maxcosd.y)
        assert bool(np.all(maxcosd.updated))

    def test_per_product_matches_independent_runs(self):
        rng = np.random.default_rng(9)
        demands = rng.integers(0, 4, size=(200, 2)).astype(float)
        box = Box([0.0, 0.0], [10.0, 6.0])
        loss = NewsvendorLoss([1.0, 2.0], [10.0, 5.0])
        joint = run(
            LostSales(), Deterministic(demands), loss, box,
            PerProductPolicy(box, lambda b: MaxCOSDPolicy(b, 0.2)), T=200,
        )
        for i in range(2):
            sub = box.sub_box(i)
            single = run(
                LostSales(), Deterministic(demands[:, i:i + 1]), NewsvendorLoss([loss.h[i]], [loss.p[i]]), sub,
                MaxCOSDPolicy(sub, 0.2), T=200,
            )
            np.testing.assert_array_equal(joint.y[:, i], single.y[:, 0])


class TestGuard:
    def test_clamps_to_state(self, unit_box):
        guard = FeasibilityGuard(OSDPolicy(unit_box, ConstantRate(5.0)))
        guard.initialize([10.0])
        guard.observe(np.array([1.0]), np.array([9.0]))
        assert guard.propose().tolist() == [9.0]
        assert guard.inner.propose().tolist() == [5.0]
        assert guard.clamped_periods == 1

    def test_box_only(self):
        with pytest.raises(ConfigurationError):
            FeasibilityGuard(OSDPolicy(Capacity(2, 3.0), ConstantRate(1.0)))


class TestConstantLevel:
    def test_holds_level(self, unit_box):
        policy = ConstantLevelPolicy(unit_box, 4.0)
        assert policy.initialize().tolist() == [4.0]
        policy.observe(np.array([-200.0]), np.array([3.0]))
        assert policy.propose().tolist() == [4.0]

    def test_level_outside_set(self, unit_box):
        with pytest.raises(ConfigurationError):
            ConstantLevelPolicy(unit_box, 20.0)


class TestFactory:
    def test_maxcosd(self, unit_box, setting1_loss):
        policy = make_policy(PolicySpec(gamma=0.5), unit_box, setting1_loss)
        assert isinstance(policy, MaxCOSDPolicy)
        assert policy.D == 10.0

    def test_guarded_osd_sqrt_decay(self, unit_box, setting1_loss):
        spec = PolicySpec(name="osd", rate="sqrt_decay", gamma=0.5, guard=True)
        policy = make_policy(spec, unit_box, setting1_loss)
        assert isinstance(policy, FeasibilityGuard)
        assert isinstance(policy.inner.rate, SqrtDecayRate)
        assert policy.inner.rate.G == 200.0

    def test_minibatch_cosd(self, unit_box, setting1_loss):
        spec = PolicySpec(name="cosd", rate="constant", eta=0.1, strategy="minibatch", tau=5)
        policy = make_policy(spec, unit_box, setting1_loss)
        assert policy.strategy == UpdateStrategy.MINIBATCH
        assert policy.tau == 5

    def test_per_product(self):
        box = Box([0.0, 0.0], [1.0, 2.0])
        policy = make_policy(PolicySpec(name="per_product_maxcosd", gamma=0.1), box, NewsvendorLoss([1.0, 1.0], [2.0, 2.0]))
        assert [p.D for p in policy.policies] == [1.0, 2.0]

    def test_initial_level_broadcast(self):
        assert initial_level(PolicySpec(gamma=0.1, y1=2.0), 3).tolist() == [2.0, 2.0, 2.0]
        assert initial_level(PolicySpec(gamma=0.1), 3) is None
