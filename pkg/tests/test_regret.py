"""Regret, closed-form bounds and data-dependent bounds."""
import numpy as np
import pytest

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.services.dynamics import LostSales, Stateless
from oio_bench.services.policies import OSDPolicy, SqrtDecayRate
from oio_bench.services.regret import (
    MAXCOSD_EXPECTED,
    MAXCOSD_HIGH_PROBABILITY,
    NAIVE,
    OSD_POSITIVE_DEMAND,
    OSD_SQRT_DECAY,
    completed_cycles,
    cosd_cycle_bound,
    fit_loglog_slope,
    osd_data_bound,
    regret,
    regret_curve,
    theoretical_bounds,
    within_bound,
)
from oio_bench.services.simulator import run


class TestTheoreticalBounds:
    def test_setting_one_values(self):
        bounds = dict(theoretical_bounds(T=100, G=200.0, D=10.0, gamma=0.1, mu=1.0 - np.exp(-1.0), delta=0.1))
        assert bounds[MAXCOSD_EXPECTED] == pytest.approx(272946.1, rel=1e-3)
        assert bounds[OSD_SQRT_DECAY] == pytest.approx(5.1 * 2000.0 * 10.0)
        assert bounds[OSD_POSITIVE_DEMAND] == pytest.approx(1.2 / 0.2 * 2000.0 * 10.0)
        assert bounds[NAIVE] == 200000.0
        assert bounds[MAXCOSD_HIGH_PROBABILITY] > bounds[NAIVE]

    def test_unknown_mu_drops_maxcosd_bounds(self):
        names = [name for name, _ in theoretical_bounds(T=10, G=1.0, D=1.0, gamma=0.5)]
        assert MAXCOSD_EXPECTED not in names
        assert NAIVE in names

    def test_sqrt_growth(self):
        small = dict(theoretical_bounds(T=100, G=1.0, D=1.0, gamma=0.5, mu=0.5))
        large = dict(theoretical_bounds(T=400, G=1.0, D=1.0, gamma=0.5, mu=0.5))
        assert large[MAXCOSD_EXPECTED] == pytest.approx(2.0 * small[MAXCOSD_EXPECTED])

    @pytest.mark.parametrize("kwargs", [
        dict(T=0, G=1.0, D=1.0, gamma=0.5),
        dict(T=10, G=1.0, D=1.0, gamma=0.0),
        dict(T=10, G=1.0, D=1.0, gamma=0.5, mu=1.5),
        dict(T=10, G=1.0, D=1.0, gamma=0.5, delta=1.0),
    ])
    def test_invalid_arguments(self, kwargs):
        with pytest.raises(ConfigurationError):
            theoretical_bounds(**kwargs)

    def test_within_bound_tolerance(self):
        assert within_bound(1.0 + 1e-12, 1.0)
        assert not within_bound(1.01, 1.0)


class TestRegret:
    def test_report(self, maxcosd_run, unit_box, setting1_loss):
        report = regret(maxcosd_run, unit_box, setting1_loss)
        assert report.regret == pytest.approx(report.cumulative_loss - report.hindsight_value)
        assert report.bound_checks[0].name == NAIVE
        assert report.all_bounds_satisfied
        assert set(report.to_dict()) >= {"R_T", "hindsight_y", "hindsight_value", "cumulative_loss", "bound_checks"}

    def test_extra_bound_failure_is_reported(self, maxcosd_run, unit_box, setting1_loss):
        report = regret(maxcosd_run, unit_box, setting1_loss, bounds=[("tiny", -1.0)])
        assert not report.bound_checks[-1].satisfied
        assert not report.all_bounds_satisfied

    def test_curve_ends_at_regret(self, maxcosd_run, unit_box, setting1_loss):
        curve = regret_curve(maxcosd_run, unit_box, setting1_loss, [100, 500])
        assert curve[-1] == pytest.approx(regret(maxcosd_run, unit_box, setting1_loss).regret)

    def test_curve_horizon_out_of_range(self, maxcosd_run, unit_box, setting1_loss):
        with pytest.raises(ConfigurationError):
            regret_curve(maxcosd_run, unit_box, setting1_loss, [501])


class TestDataBounds:
    def test_osd_regret_below_data_bound(self, unit_box, setting1_loss, poisson_one):
        traj = run(
            Stateless(), poisson_one, setting1_loss, unit_box,
            OSDPolicy(unit_box, SqrtDecayRate(0.5, 10.0, 200.0)), T=400, seed=6,
        )
        bound = osd_data_bound(traj, unit_box.diameter())
        assert regret(traj, unit_box, setting1_loss).regret <= bound

    def test_cycle_bound_holds_at_last_completed_cycle(self, maxcosd_run, unit_box, setting1_loss):
        bound, t_K = cosd_cycle_bound(maxcosd_run, unit_box.diameter())
        assert 1 <= t_K < maxcosd_run.T
        r = regret_curve(maxcosd_run, unit_box, setting1_loss, [t_K])[0]
        assert r <= bound

    def test_completed_cycles_partition_prefix(self, maxcosd_run):
        cycles = completed_cycles(maxcosd_run)
        assert cycles[0][0] == 1
        for (_, last), (first, _) in zip(cycles, cycles[1:]):
            assert first == last + 1

    def test_no_completed_cycle(self, maxcosd_run):
        traj = maxcosd_run.head(1)
        assert cosd_cycle_bound(traj, 10.0) == (float("inf"), 0)


class TestSlopeFit:
    def test_exact_power_law(self):
        xs = np.array([100.0, 1000.0, 10000.0, 100000.0])
        fit = fit_loglog_slope(xs, 3.0 * xs ** 0.5)
        assert fit.slope == pytest.approx(0.5)
        assert fit.residual == pytest.approx(0.0, abs=1e-9)
        assert fit.points == 4

    def test_nonpositive_points_excluded(self):
        fit = fit_loglog_slope([10.0, 100.0, 1000.0], [-1.0, 100.0, 1000.0])
        assert fit.excluded == [10.0]
        assert fit.slope == pytest.approx(1.0)

    def test_needs_two_points(self):
        with pytest.raises(ConfigurationError):
            fit_loglog_slope([10.0, 100.0], [0.0, 5.0])
