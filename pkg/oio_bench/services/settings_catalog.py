"""
Reference settings and problem construction.

Settings (horizon 1969, y1 = 0, p = 200 h):
1. single product, lost sales, Poisson(1), box [0, 10]
2. single product, perishable lifetime 2, Poisson(1), box [0, 10]
3. n = 100, lost sales, Poisson(lambda_i) with lambda_i ~ Uniform[1, 2],
   capacity 1.5 * sum(lambda)
4. demand dataset, lost sales, capacity 1.5 * sum of mean demands,
   h_i = cost_scale * price_i
5. demand dataset, lost sales, box [0, q95 of each product's demand],
   h_i = cost_scale * price_i
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
import logging

from oio_bench.core.exceptions import ConfigurationError
from oio_bench.models.experiment import (
    DemandSpec,
    DynamicSpec,
    ExperimentConfig,
    FeasibleSetSpec,
    LossSpec,
    ProblemSpec,
    SettingOptions,
    UPPDSpec,
)
from oio_bench.models.feasible_sets import Box, Capacity, FeasibleSet
from oio_bench.models.losses import LinearLoss, Loss, NewsvendorLoss
from oio_bench.models.records import FeedbackMode, NonDegeneracyParams
from oio_bench.models.vectors import as_vector
from oio_bench.services import dataset
from oio_bench.services.demand import (
    AdversaryProp2,
    ClippedAR1,
    CsvDataset,
    DemandSource,
    Deterministic,
    IIDPoisson,
    UniformIntensityPoisson,
    uppd_params,
)
from oio_bench.services.dynamics import Dynamic, make_dynamic

logger = logging.getLogger(__name__)

DEFAULT_BOX_UPPER = 10.0
DEFAULT_CAPACITY_FACTOR = 1.5
DEFAULT_UPPER_QUANTILE = 0.95
DEFAULT_PENALTY_RATIO = 200.0
DEFAULT_LIFETIME = 2
SETTING3_PRODUCTS = 100


@dataclass
class Problem:
    """Concrete problem objects built from a ProblemSpec."""
    n: int
    dynamic: Dynamic
    demand: DemandSource
    loss: Loss
    feasible_set: FeasibleSet
    feedback: FeedbackMode
    spec: ProblemSpec


def _require_dataset(options: SettingOptions, setting: int) -> str:
    if options.dataset_path is None:
        raise ConfigurationError(f"setting_options.dataset_path is required for setting {setting}")
    if options.cost_scale is None:
        raise ConfigurationError(f"setting_options.cost_scale is required for setting {setting}")
    return options.dataset_path


def resolve_setting(config: ExperimentConfig) -> ProblemSpec:
    """
    Concrete ProblemSpec for the config (custom block or reference setting).

    Raises:
        ConfigurationError: dataset settings without dataset_path or cost_scale
    """
    if config.custom is not None:
        return config.custom

    setting = config.setting
    options = config.setting_options
    poisson_one = DemandSpec(kind="iid_poisson", intensities=[1.0])
    newsvendor = LossSpec(kind="newsvendor", h=1.0, ratio=DEFAULT_PENALTY_RATIO)
    unit_box = FeasibleSetSpec(kind="box", lower=0.0, upper=options.box_upper or DEFAULT_BOX_UPPER)
    capacity = FeasibleSetSpec(
        kind="capacity",
        cap=options.cap,
        capacity_factor=None if options.cap is not None else (options.capacity_factor or DEFAULT_CAPACITY_FACTOR),
    )

    if setting == 1:
        return ProblemSpec(n=1, dynamic=DynamicSpec(kind="lost_sales"), demand=poisson_one,
                           loss=newsvendor, feasible_set=unit_box)
    if setting == 2:
        lifetime = options.lifetime or DEFAULT_LIFETIME
        return ProblemSpec(n=1, dynamic=DynamicSpec(kind="perishable", lifetime=lifetime),
                           demand=poisson_one, loss=newsvendor, feasible_set=unit_box)
    if setting == 3:
        n = options.n or SETTING3_PRODUCTS
        demand = DemandSpec(kind="uniform_intensity_poisson", intensity_range=[1.0, 2.0],
                            meta_seed=options.meta_seed if options.meta_seed is not None else config.seed)
        return ProblemSpec(n=n, dynamic=DynamicSpec(kind="lost_sales"), demand=demand,
                           loss=newsvendor, feasible_set=capacity)

    path = _require_dataset(options, setting)
    matrix = dataset.load_csv(path).matrix
    n = min(options.n, matrix.shape[1]) if options.n else matrix.shape[1]
    demand = DemandSpec(kind="csv", path=path)
    loss = LossSpec(kind="newsvendor", cost_scale=options.cost_scale,
                    prices_path=options.prices_path, ratio=DEFAULT_PENALTY_RATIO)
    if setting == 4:
        feasible = capacity
    else:
        feasible = FeasibleSetSpec(kind="box", lower=0.0,
                                   upper_quantile=options.upper_quantile or DEFAULT_UPPER_QUANTILE)
    return ProblemSpec(n=n, dynamic=DynamicSpec(kind="lost_sales"), demand=demand,
                       loss=loss, feasible_set=feasible)


def build_demand(spec: DemandSpec, n: int, horizon: int = 1) -> DemandSource:
    """Demand source for a spec; dataset columns beyond n are dropped."""
    if spec.kind == "deterministic":
        source = Deterministic(spec.sequence, cycle=spec.cycle)
    elif spec.kind == "iid_poisson":
        source = IIDPoisson(spec.intensities, n=n)
    elif spec.kind == "uniform_intensity_poisson":
        low, high = spec.intensity_range
        source = UniformIntensityPoisson(n, low, high, meta_seed=spec.meta_seed)
    elif spec.kind == "clipped_ar1":
        source = ClippedAR1(spec.phi, spec.sigma, spec.mean, n=n)
    elif spec.kind == "csv":
        loaded = dataset.load_csv(spec.path)
        if loaded.n < n:
            raise ConfigurationError(f"Dataset {spec.path} has {loaded.n} products, problem needs n={n}")
        source = CsvDataset(loaded.matrix[:, :n], path=loaded.path)
    else:
        source = AdversaryProp2(spec.y1, spec.budget_ratio, horizon=horizon)
    if source.n != n:
        raise ConfigurationError(f"demand has n={source.n} products, problem has n={n}")
    return source


def mean_demand(source: DemandSource) -> np.ndarray:
    """Per-product mean demand used for default capacities."""
    if isinstance(source, IIDPoisson):
        return source.intensities.copy()
    if isinstance(source, UniformIntensityPoisson):
        return source.resolved_intensities()
    if isinstance(source, ClippedAR1):
        return source.mean.copy()
    if isinstance(source, Deterministic):
        return source.matrix.mean(axis=0)
    raise ConfigurationError(f"No mean demand available for source '{source.kind.value}'")


def build_loss(spec: LossSpec, n: int) -> Loss:
    if spec.kind == "linear":
        return LinearLoss(n, spec.weights if spec.weights is not None else np.ones(n))
    if spec.cost_scale is not None:
        prices = np.ones(n)
        if spec.prices_path:
            loaded = dataset.load_prices(spec.prices_path)
            if loaded.size < n:
                raise ConfigurationError(f"loss.prices_path has {loaded.size} prices, problem needs n={n}")
            prices = loaded[:n]
        h = spec.cost_scale * prices
    else:
        h = as_vector(1.0 if spec.h is None else spec.h, n=n, name="loss.h", nonnegative=True)
    if spec.p is not None:
        p = as_vector(spec.p, n=n, name="loss.p", nonnegative=True)
    else:
        p = (spec.ratio or DEFAULT_PENALTY_RATIO) * h
    return NewsvendorLoss(h, p, n=n)


def build_feasible_set(spec: FeasibleSetSpec, n: int, demand: DemandSource) -> FeasibleSet:
    if spec.kind == "capacity":
        if spec.cap is not None:
            return Capacity(n, spec.cap)
        factor = spec.capacity_factor or DEFAULT_CAPACITY_FACTOR
        return Capacity(n, float(factor * mean_demand(demand).sum()))

    lower = as_vector(0.0 if spec.lower is None else spec.lower, n=n, name="feasible_set.lower")
    if spec.upper is not None:
        upper = as_vector(spec.upper, n=n, name="feasible_set.upper")
    elif spec.upper_quantile is not None:
        if not isinstance(demand, Deterministic):
            raise ConfigurationError("feasible_set.upper_quantile needs a recorded demand sequence")
        upper = np.quantile(demand.matrix, spec.upper_quantile, axis=0)
        upper = np.maximum(upper, lower)
    else:
        raise ConfigurationError("feasible_set.upper or feasible_set.upper_quantile is required for a box")
    return Box(lower, upper, n=n)


def build_problem(spec: ProblemSpec, horizon: int = 1) -> Problem:
    """Instantiate dynamic, demand, loss and feasible set of a problem."""
    dynamic = make_dynamic(spec.dynamic.kind, spec.dynamic.lifetime)
    demand = build_demand(spec.demand, spec.n, horizon=horizon)
    loss = build_loss(spec.loss, spec.n)
    feasible_set = build_feasible_set(spec.feasible_set, spec.n, demand)
    return Problem(
        n=spec.n,
        dynamic=dynamic,
        demand=demand,
        loss=loss,
        feasible_set=feasible_set,
        feedback=FeedbackMode(spec.feedback),
        spec=spec,
    )


def resolve_uppd(problem: Problem, manual: Optional[UPPDSpec] = None) -> Optional[NonDegeneracyParams]:
    """Manual (rho, mu) when supplied, otherwise the closed form when computable."""
    if manual is not None:
        return NonDegeneracyParams(rho=manual.rho, mu=manual.mu)
    return uppd_params(problem.demand)


def derived_quantities(problem: Problem, manual: Optional[UPPDSpec] = None) -> Dict[str, Any]:
    """n, D, G and (rho, mu) when known, as echoed into manifests."""
    params = resolve_uppd(problem, manual)
    return {
        "n": problem.n,
        "D": problem.feasible_set.diameter(),
        "G": problem.loss.gradient_bound,
        "rho": params.rho if params else None,
        "mu": params.mu if params else None,
        "uppd_source": "manual" if manual is not None else ("closed_form" if params else "unknown"),
    }
