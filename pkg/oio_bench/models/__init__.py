"""
Domain models.
"""
from oio_bench.models.vectors import (
    VectorLike,
    as_vector,
    check_same_length,
    dominates,
    positive_part,
)
from oio_bench.models.feasible_sets import (
    SetKind,
    FeasibleSet,
    Box,
    Capacity,
    project,
    diameter,
    feasible_set_from_dict,
)
from oio_bench.models.losses import (
    LossKind,
    Loss,
    NewsvendorLoss,
    LinearLoss,
    newsvendor_cost,
    censored_subgradient,
    full_info_subgradient,
    is_feasible_step,
    loss_from_dict,
)
from oio_bench.models.records import (
    FeedbackMode,
    NonDegeneracyParams,
    Trajectory,
    BoundCheck,
    RegretReport,
    StatsStatus,
    CycleStats,
    AuditResult,
)

__all__ = [
    "VectorLike",
    "as_vector",
    "check_same_length",
    "dominates",
    "positive_part",
    "SetKind",
    "FeasibleSet",
    "Box",
    "Capacity",
    "project",
    "diameter",
    "feasible_set_from_dict",
    "LossKind",
    "Loss",
    "NewsvendorLoss",
    "LinearLoss",
    "newsvendor_cost",
    "censored_subgradient",
    "full_info_subgradient",
    "is_feasible_step",
    "loss_from_dict",
    "FeedbackMode",
    "NonDegeneracyParams",
    "Trajectory",
    "BoundCheck",
    "RegretReport",
    "StatsStatus",
    "CycleStats",
    "AuditResult",
]
