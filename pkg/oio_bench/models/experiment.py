"""
Declarative experiment configuration.

An experiment names either one of the five reference settings or a custom
problem, plus a policy, a horizon, a replication count and a base seed.
Configs round-trip through JSON and are identified by a SHA-256 hash of
their canonical dump.
"""
import hashlib
import json
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from oio_bench.models.records import FeedbackMode

Scalars = Union[float, List[float]]


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DynamicSpec(_Spec):
    """Inventory dynamic; ``lifetime`` only for the perishable dynamic."""
    kind: Literal["stateless", "backlogging", "lost_sales", "perishable"] = "lost_sales"
    lifetime: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def check_lifetime(self) -> "DynamicSpec":
        if self.kind == "perishable" and self.lifetime is None:
            raise ValueError("dynamic.lifetime is required for the perishable dynamic")
        return self


class DemandSpec(_Spec):
    """Demand source and its parameters (fields relevant to ``kind`` only)."""
    kind: Literal[
        "deterministic",
        "iid_poisson",
        "uniform_intensity_poisson",
        "clipped_ar1",
        "csv",
        "adversary_prop2",
    ]
    sequence: Optional[List[List[float]]] = None
    cycle: bool = True
    intensities: Optional[Scalars] = None
    intensity_range: List[float] = Field(default_factory=lambda: [1.0, 2.0])
    meta_seed: int = 0
    phi: Optional[float] = None
    sigma: Optional[float] = None
    mean: Optional[Scalars] = None
    path: Optional[str] = None
    y1: Optional[float] = None
    budget_ratio: Optional[float] = None

    @model_validator(mode="after")
    def check_required(self) -> "DemandSpec":
        required = {
            "deterministic": ["sequence"],
            "iid_poisson": ["intensities"],
            "uniform_intensity_poisson": [],
            "clipped_ar1": ["phi", "sigma", "mean"],
            "csv": ["path"],
            "adversary_prop2": ["y1", "budget_ratio"],
        }[self.kind]
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"demand.{name} is required for demand kind '{self.kind}'")
        if len(self.intensity_range) != 2:
            raise ValueError("demand.intensity_range must have two entries [low, high]")
        return self


class LossSpec(_Spec):
    """
    Loss parameters.

    Newsvendor costs are given either explicitly (``h``, ``p``) or as a
    holding cost with a penalty ratio (p = ratio * h). ``cost_scale`` with
    optional ``prices_path`` sets h_i = cost_scale * price_i.
    """
    kind: Literal["newsvendor", "linear"] = "newsvendor"
    h: Optional[Scalars] = None
    p: Optional[Scalars] = None
    ratio: Optional[float] = Field(default=None, gt=0)
    cost_scale: Optional[float] = Field(default=None, gt=0)
    prices_path: Optional[str] = None
    weights: Optional[Scalars] = None


class FeasibleSetSpec(_Spec):
    """Box bounds or capacity; ``upper_quantile`` sets box tops from demand data."""
    kind: Literal["box", "capacity"] = "box"
    lower: Optional[Scalars] = None
    upper: Optional[Scalars] = None
    upper_quantile: Optional[float] = Field(default=None, gt=0, le=1)
    cap: Optional[float] = Field(default=None, ge=0)
    capacity_factor: Optional[float] = Field(default=None, gt=0)


class ProblemSpec(_Spec):
    """A complete problem: n products, dynamic, demand, loss, feasible set, feedback."""
    n: int = Field(ge=1)
    dynamic: DynamicSpec = Field(default_factory=DynamicSpec)
    demand: DemandSpec
    loss: LossSpec = Field(default_factory=LossSpec)
    feasible_set: FeasibleSetSpec = Field(default_factory=FeasibleSetSpec)
    feedback: FeedbackMode = FeedbackMode.CENSORED


class SettingOptions(_Spec):
    """Overrides of the reference settings' declared defaults."""
    dataset_path: Optional[str] = None
    prices_path: Optional[str] = None
    cost_scale: Optional[float] = Field(default=None, gt=0)
    box_upper: Optional[float] = Field(default=None, gt=0)
    capacity_factor: Optional[float] = Field(default=None, gt=0)
    cap: Optional[float] = Field(default=None, ge=0)
    upper_quantile: Optional[float] = Field(default=None, gt=0, le=1)
    lifetime: Optional[int] = Field(default=None, ge=1)
    n: Optional[int] = Field(default=None, ge=1)
    meta_seed: Optional[int] = None


class PolicySpec(_Spec):
    """
    Policy choice.

    Names: maxcosd, osd, cosd, constant, per_product_maxcosd. Adversary
    demand constructions are built in code, not configured here.
    ``rate`` applies to osd/cosd; maxcosd always uses the adaptive rate.
    """
    name: Literal["maxcosd", "osd", "cosd", "constant", "per_product_maxcosd"] = "maxcosd"
    gamma: Optional[float] = Field(default=None, gt=0)
    rate: Literal["adaptive", "sqrt_decay", "constant"] = "adaptive"
    eta: Optional[float] = Field(default=None, ge=0)
    strategy: Literal["every_period", "minibatch", "cup", "maxcosd"] = "every_period"
    tau: Optional[int] = Field(default=None, ge=1)
    level: Optional[Scalars] = None
    y1: Optional[Scalars] = None
    guard: bool = False

    @model_validator(mode="after")
    def check_parameters(self) -> "PolicySpec":
        needs_gamma = self.name in ("maxcosd", "per_product_maxcosd") or (
            self.name in ("osd", "cosd") and self.rate != "constant"
        )
        if needs_gamma and self.gamma is None:
            raise ValueError(f"policy.gamma is required for policy '{self.name}'")
        if self.name in ("osd", "cosd") and self.rate == "constant" and self.eta is None:
            raise ValueError("policy.eta is required for a constant learning rate")
        if self.name == "cosd" and self.strategy == "minibatch" and self.tau is None:
            raise ValueError("policy.tau is required for the minibatch strategy")
        if self.name == "constant" and self.level is None:
            raise ValueError("policy.level is required for the constant policy")
        return self


class UPPDSpec(_Spec):
    """Manually supplied non-degeneracy parameters."""
    rho: float = Field(gt=0)
    mu: float = Field(gt=0, le=1)


class ExperimentConfig(_Spec):
    """
    Full declarative description of one experiment.

    ``stream_trajectories`` writes trajectory rows in blocks while a
    replication runs instead of once it finishes (long horizons).
    """
    setting: Optional[int] = None
    setting_options: SettingOptions = Field(default_factory=SettingOptions)
    custom: Optional[ProblemSpec] = None
    policy: PolicySpec = Field(default_factory=lambda: PolicySpec(gamma=0.05))
    horizon: int = Field(default=1969, ge=1)
    replications: int = Field(default=10, ge=1)
    seed: int = Field(default=0, ge=0)
    output_dir: Optional[str] = None
    delta: float = Field(default=0.1, gt=0, lt=1)
    uppd: Optional[UPPDSpec] = None
    save_trajectories: bool = True
    stream_trajectories: bool = False

    @field_validator("setting")
    @classmethod
    def check_setting(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v not in (1, 2, 3, 4, 5):
            raise ValueError(f"setting must be one of 1..5, got {v}")
        return v

    @model_validator(mode="after")
    def check_problem_source(self) -> "ExperimentConfig":
        if (self.setting is None) == (self.custom is None):
            raise ValueError("exactly one of 'setting' or 'custom' must be given")
        return self

    def canonical_json(self) -> str:
        """Sorted-keys JSON dump used for hashing."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True)

    @property
    def config_hash(self) -> str:
        return config_hash(self)


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON dump."""
    return hashlib.sha256(config.canonical_json().encode()).hexdigest()
