"""Worst-case guarantees checked on long or numerous runs (slow)."""
import numpy as np
import pytest

from oio_bench.models.experiment import ExperimentConfig
from oio_bench.models.feasible_sets import Box, Capacity
from oio_bench.models.losses import NewsvendorLoss, censored_subgradient, full_info_subgradient
from oio_bench.models.records import StatsStatus
from oio_bench.services import orchestrator
from oio_bench.services.adversaries import adversary_prop1
from oio_bench.services.cycles import cycle_stats
from oio_bench.services.demand import Deterministic, IIDPoisson
from oio_bench.services.dynamics import Backlogging, LostSales, PerishableFIFO, Stateless
from oio_bench.services.policies import (
    ConstantLevelPolicy,
    FeasibilityGuard,
    MaxCOSDPolicy,
    OSDPolicy,
    SqrtDecayRate,
)
from oio_bench.services.regret import (
    OSD_POSITIVE_DEMAND,
    OSD_SQRT_DECAY,
    fit_loglog_slope,
    regret,
    theoretical_bounds,
)
from oio_bench.services.simulator import feasibility_audit, run

pytestmark = pytest.mark.slow

DYNAMICS = [
    Stateless,
    Backlogging,
    LostSales,
    lambda: PerishableFIFO(1),
    lambda: PerishableFIFO(2),
    lambda: PerishableFIFO(3),
]


def _random_problem(index):
    rng = np.random.default_rng(1000 + index)
    n = int(rng.integers(1, 4))
    h = rng.uniform(0.5, 2.0, n)
    loss = NewsvendorLoss(h, h * rng.uniform(1.0, 200.0))
    if rng.random() < 0.5:
        feasible_set = Box(np.zeros(n), rng.uniform(2.0, 20.0, n))
    else:
        feasible_set = Capacity(n, float(rng.uniform(2.0, 30.0)))
    demand = IIDPoisson(rng.uniform(0.2, 5.0, n))
    gamma = float(10.0 ** rng.uniform(-3.0, 1.0))
    return DYNAMICS[index % len(DYNAMICS)](), demand, loss, feasible_set, gamma


@pytest.mark.parametrize("index", range(50))
def test_maxcosd_feasible_on_random_problems(index):
    dynamic, demand, loss, feasible_set, gamma = _random_problem(index)
    for seed in range(10):
        traj = run(dynamic, demand, loss, feasible_set, MaxCOSDPolicy(feasible_set, gamma), T=2000, seed=seed)
        assert feasibility_audit(traj).passed


def test_osd_under_positive_demand():
    box = Box([0.0], [10.0])
    loss = NewsvendorLoss.from_ratio(1)
    G, D, gamma, T = loss.gradient_bound, box.diameter(), 0.1, 10_000
    policy = OSDPolicy(box, SqrtDecayRate(gamma, D, G))
    traj = run(LostSales(), Deterministic.constant(1.0, n=1), loss, box, policy, T=T)
    bound = dict(theoretical_bounds(T, G, D, gamma))[OSD_POSITIVE_DEMAND]
    assert bound == pytest.approx(1.2e6)
    assert 0.0 <= regret(traj, box, loss).regret <= bound


@pytest.mark.parametrize("gamma", [0.1, 1.0 / np.sqrt(2.0), 2.0])
def test_stateless_osd_sqrt_decay(gamma):
    box = Box([0.0], [10.0])
    loss = NewsvendorLoss([1.0], [1.0])
    G, D, T = loss.gradient_bound, box.diameter(), 1000
    demand = Deterministic([[3.0], [8.0], [1.0], [6.0], [9.5], [0.0], [4.0]])
    traj = run(Stateless(), demand, loss, box, OSDPolicy(box, SqrtDecayRate(gamma, D, G)), T=T)
    bound = dict(theoretical_bounds(T, G, D, gamma))[OSD_SQRT_DECAY]
    assert G * D == 10.0
    assert regret(traj, box, loss).regret <= bound


def test_setting_one_aggregate_bounds(tmp_path):
    config = ExperimentConfig.model_validate({
        "setting": 1,
        "policy": {"name": "maxcosd", "gamma": 0.05},
        "horizon": 1969,
        "replications": 200,
        "save_trajectories": False,
    })
    summary = orchestrator.run_experiment(config, jobs=4, output_dir=str(tmp_path)).summary
    assert summary["aggregate"]["violations"] == 0
    checks = {check["name"]: check for check in summary["aggregate_checks"]}
    assert set(checks) == {"maxcosd_expected", "maxcosd_high_probability"}
    assert all(check["satisfied"] for check in checks.values())


D = 10.0
HORIZONS = [625, 1250, 2500, 5000]


@pytest.mark.parametrize(
    "factory",
    [
        lambda: FeasibilityGuard(OSDPolicy(Box([0.0], [D]), SqrtDecayRate(0.01, D, 200.0))),
        lambda: MaxCOSDPolicy(Box([0.0], [D]), gamma=0.01),
        lambda: ConstantLevelPolicy(Box([0.0], [D]), 0.0),
    ],
    ids=["guarded_osd", "maxcosd", "always_zero"],
)
def test_bait_construction_forces_linear_regret(factory):
    box = Box([0.0], [D])
    loss = NewsvendorLoss.from_ratio(1)
    regrets = []
    for T in HORIZONS:
        source = adversary_prop1(factory, bait=1.0, horizon=T, D=D)
        traj = run(LostSales(), source, loss, box, factory(), T=T)
        regrets.append(regret(traj, box, loss).regret)
    assert fit_loglog_slope(HORIZONS, regrets).slope >= 0.95


def test_setting_one_cycles_have_geometric_tails():
    box = Box([0.0], [10.0])
    traj = run(
        LostSales(), IIDPoisson([1.0]), NewsvendorLoss.from_ratio(1), box, MaxCOSDPolicy(box, 0.05),
        T=100_000, seed=7,
    )
    stats = cycle_stats(traj, mu=1.0 - np.exp(-1.0))
    assert stats.status == StatsStatus.OK
    assert stats.flags["tail"]
    assert stats.flags["mean"]
    assert stats.completed_cycles > 50_000


@pytest.mark.parametrize("feedback", ["censored", "full_info"])
def test_subgradient_inequality_on_many_triples(feedback):
    rng = np.random.default_rng(5)
    count, n = 100_000, 3
    # half-integers make ties between level and demand common
    y, z, d = (np.round(rng.uniform(0.0, 20.0, (count, n)) * 2.0) / 2.0 for _ in range(3))
    h, p = rng.uniform(0.0, 300.0, (count, n)), rng.uniform(0.0, 300.0, (count, n))
    worst = 0.0
    for i in range(count):
        loss = NewsvendorLoss(h[i], p[i])
        if feedback == "censored":
            g = censored_subgradient(y[i], np.minimum(y[i], d[i]), loss)
        else:
            g = full_info_subgradient(y[i], d[i], loss)
        at_z = loss.evaluate(z[i], d[i])
        gap = at_z - loss.evaluate(y[i], d[i]) - float(np.dot(g, z[i] - y[i]))
        worst = min(worst, gap / max(1.0, abs(at_z)))
    assert worst >= -1e-9
