"""Data models package."""

from .initialization import FanMode, InitScheme, RngSeed, SchemeKind
from .landscape import LossConfig, LossVariant, PointClass, Tolerances
from .network import ActivationRecord, Dataset, NetworkSpec, PathId, WeightSet
from .statistics import ClampSpec, ProportionEstimate, TrialPlan

__all__ = [
    "ActivationRecord",
    "ClampSpec",
    "Dataset",
    "FanMode",
    "InitScheme",
    "LossConfig",
    "LossVariant",
    "NetworkSpec",
    "PathId",
    "PointClass",
    "ProportionEstimate",
    "RngSeed",
    "SchemeKind",
    "Tolerances",
    "TrialPlan",
    "WeightSet",
]
