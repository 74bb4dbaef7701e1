"""Shared fixtures and helpers for the test suite."""
import json

import pytest

from oio_bench.models.feasible_sets import Box, Capacity
from oio_bench.models.losses import NewsvendorLoss
from oio_bench.services.demand import IIDPoisson
from oio_bench.services.dynamics import LostSales
from oio_bench.services.policies import MaxCOSDPolicy
from oio_bench.services.simulator import run


@pytest.fixture
def unit_box():
    """Single-product box [0, 10] used by settings 1 and 2."""
    return Box([0.0], [10.0])


@pytest.fixture
def setting1_loss():
    """h = 1, p = 200."""
    return NewsvendorLoss.from_ratio(1)


@pytest.fixture
def capacity_set():
    return Capacity(3, 6.0)


@pytest.fixture
def poisson_one():
    return IIDPoisson([1.0])


@pytest.fixture
def maxcosd_run(unit_box, setting1_loss, poisson_one):
    """Short setting-1 MaxCOSD trajectory."""
    return run(
        dynamic=LostSales(),
        demand=poisson_one,
        loss=setting1_loss,
        feasible_set=unit_box,
        policy=MaxCOSDPolicy(unit_box, gamma=0.05),
        T=500,
        seed=3,
    )


@pytest.fixture
def make_config():
    """Builds a small experiment config dict; keyword overrides replace top-level keys."""

    def _make(**overrides):
        data = {
            "setting": 1,
            "policy": {"name": "maxcosd", "gamma": 0.05},
            "horizon": 50,
            "replications": 2,
            "seed": 0,
        }
        data.update(overrides)
        return data

    return _make


@pytest.fixture
def write_config(tmp_path):
    """Writes a config dict to a JSON file and returns its path."""

    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return _write


@pytest.fixture
def stateless_problem():
    """Custom single-product problem without carried-over stock."""
    return {
        "n": 1,
        "dynamic": {"kind": "stateless"},
        "demand": {"kind": "iid_poisson", "intensities": [1.0]},
        "loss": {"kind": "newsvendor", "h": 1.0, "ratio": 200.0},
        "feasible_set": {"kind": "box", "lower": 0.0, "upper": 10.0},
    }
