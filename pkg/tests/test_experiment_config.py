"""Experiment configuration and reference settings."""
import numpy as np
import pytest
from pydantic import ValidationError

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.experiment import ExperimentConfig, PolicySpec
from oio_bench.models.feasible_sets import Box, Capacity
from oio_bench.services.demand import UniformIntensityPoisson
from oio_bench.services.dynamics import PerishableFIFO
from oio_bench.services.settings_catalog import build_problem, derived_quantities, resolve_setting


def _problem(data, horizon=10):
    config = ExperimentConfig.model_validate(data)
    return config, build_problem(resolve_setting(config), horizon=horizon)


class TestValidation:
    def test_exactly_one_problem_source(self, stateless_problem):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({})
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"setting": 1, "custom": stateless_problem})

    def test_unknown_setting(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"setting": 6})

    def test_policy_parameters_required(self):
        with pytest.raises(ValidationError):
            PolicySpec(name="maxcosd")
        with pytest.raises(ValidationError):
            PolicySpec(name="osd", rate="constant")
        with pytest.raises(ValidationError):
            PolicySpec(name="cosd", gamma=0.1, strategy="minibatch")
        with pytest.raises(ValidationError):
            PolicySpec(name="constant")

    def test_perishable_needs_lifetime(self, stateless_problem):
        stateless_problem["dynamic"] = {"kind": "perishable"}
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"custom": stateless_problem})

    def test_hash_is_stable_and_sensitive(self, make_config):
        a = ExperimentConfig.model_validate(make_config())
        b = ExperimentConfig.model_validate(make_config())
        c = ExperimentConfig.model_validate(make_config(seed=1))
        assert a.config_hash == b.config_hash
        assert a.config_hash != c.config_hash
        assert len(a.config_hash) == 64


class TestReferenceSettings:
    def test_setting_one(self):
        config, problem = _problem({"setting": 1})
        assert isinstance(problem.feasible_set, Box)
        assert problem.loss.p.tolist() == [200.0]
        derived = derived_quantities(problem, config.uppd)
        assert derived["uppd_source"] == "closed_form"

    def test_setting_two_perishable(self):
        _, problem = _problem({"setting": 2})
        assert isinstance(problem.dynamic, PerishableFIFO)
        assert problem.dynamic.lifetime == 2

    def test_setting_three_capacity(self):
        _, problem = _problem({"setting": 3, "seed": 4})
        assert problem.n == 100
        assert isinstance(problem.demand, UniformIntensityPoisson)
        assert isinstance(problem.feasible_set, Capacity)
        expected = 1.5 * problem.demand.resolved_intensities().sum()
        assert problem.feasible_set.cap == pytest.approx(expected)
        assert problem.demand.meta_seed == 4

    def test_dataset_settings(self, tmp_path):
        demand = tmp_path / "sales.csv"
        rows = ["a,b"] + [f"{i % 5},{(i * 3) % 7}" for i in range(40)]
        demand.write_text("\n".join(rows) + "\n")
        prices = tmp_path / "prices.csv"
        prices.write_text("a,b\n2.0,4.0\n")
        options = {"dataset_path": str(demand), "prices_path": str(prices), "cost_scale": 0.5}

        config, problem = _problem({"setting": 4, "setting_options": options})
        assert problem.loss.h.tolist() == [1.0, 2.0]
        assert problem.loss.p.tolist() == [200.0, 400.0]
        assert isinstance(problem.feasible_set, Capacity)
        assert derived_quantities(problem, config.uppd)["mu"] is None

        _, problem = _problem({"setting": 5, "setting_options": options})
        matrix = problem.demand.matrix
        np.testing.assert_allclose(problem.feasible_set.upper, np.quantile(matrix, 0.95, axis=0))

    def test_dataset_setting_needs_cost_scale(self, tmp_path):
        demand = tmp_path / "sales.csv"
        demand.write_text("1\n2\n")
        config = ExperimentConfig.model_validate({"setting": 5, "setting_options": {"dataset_path": str(demand)}})
        with pytest.raises(ConfigurationError):
            resolve_setting(config)

    def test_manual_uppd(self, make_config):
        config, problem = _problem(make_config(uppd={"rho": 0.5, "mu": 0.25}))
        derived = derived_quantities(problem, config.uppd)
        assert (derived["rho"], derived["mu"], derived["uppd_source"]) == (0.5, 0.25, "manual")
