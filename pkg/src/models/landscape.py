"""Records for the expected-loss landscape experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ..exceptions import ValidationError
from .network import NetworkSpec, WeightSet


class LossVariant(str, Enum):
    EXPECTED_OUTPUT = "expected-output"
    MONTE_CARLO = "monte-carlo"


class PointClass(str, Enum):
    LOCAL_MIN_CANDIDATE = "local-min-candidate"
    SADDLE = "saddle"
    DEGENERATE_SADDLE = "degenerate-saddle"
    NOT_CRITICAL = "not-critical"
    UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class LossConfig:
    """Activation probability rho, path scale q and which loss to evaluate."""

    rho: float
    q: float = 1.0
    variant: LossVariant = LossVariant.EXPECTED_OUTPUT

    def __post_init__(self) -> None:
        if not math.isfinite(self.rho) or not 0.0 < self.rho <= 1.0:
            raise ValidationError("rho must lie in (0, 1]", str(self.rho))
        if not math.isfinite(self.q) or self.q <= 0.0:
            raise ValidationError("q must be a positive finite real", str(self.q))
        object.__setattr__(self, "variant", LossVariant(self.variant))

    @classmethod
    def for_spec(cls, spec: NetworkSpec, rho: Optional[float] = None,
                 variant: LossVariant = LossVariant.EXPECTED_OUTPUT) -> "LossConfig":
        """rho defaults to 2^-H, q to the network's path scale."""
        return cls(rho=2.0 ** -spec.hidden_depth if rho is None else rho, q=spec.path_scale, variant=variant)

    @property
    def scale(self) -> float:
        """The product q * rho, the only way (q, rho) enter the expected output."""
        return self.q * self.rho


@dataclass(frozen=True)
class Tolerances:
    grad_factor: float = 1e-8
    eig_factor: float = 1e-6
    fd_step: float = 1e-4
    hessian_budget: int = 200
    descent_directions: int = 200
    descent_steps: int = 16
    step_max: float = 1e-1
    step_min: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("grad_factor", "eig_factor", "fd_step", "step_max", "step_min"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ValidationError(f"{name} must be a positive real", str(value))
        if self.step_min >= self.step_max:
            raise ValidationError("step_min must be below step_max", f"{self.step_min} >= {self.step_max}")
        for name in ("hessian_budget", "descent_directions", "descent_steps"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be at least 1", str(getattr(self, name)))

    def grad_tol(self, zero_loss: float) -> float:
        return self.grad_factor * (1.0 + zero_loss)

    def eig_tol(self, eigenvalues: np.ndarray) -> float:
        largest = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
        return self.eig_factor * max(1.0, largest)

    def step_schedule(self) -> np.ndarray:
        return np.geomspace(self.step_max, self.step_min, self.descent_steps)


@dataclass(frozen=True)
class HessianEstimate:
    """Symmetrized finite-difference Hessian over the flattened parameters."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class DescentResult:
    found: bool
    directions_tried: int
    direction: Optional[np.ndarray] = None
    step: float = 0.0
    decrease: float = 0.0


@dataclass(frozen=True)
class CriticalPointReport:
    theta: WeightSet
    grad_norm: float
    hessian_eigs: tuple[float, ...]
    classification: PointClass
    loss: float
    grad_tol: float
    eig_tol: float
    descent_found: bool = False
    iterations: int = 0
    diagnostics: str = ""


@dataclass(frozen=True)
class MonteCarloLoss:
    mean: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class OracleResult:
    """Global minimum of the expected-output loss and a WeightSet attaining it."""

    min_loss: float
    witness: WeightSet
    rank: int
    singular_values: tuple[float, ...] = field(default=())


@dataclass(frozen=True)
class MultistartResult:
    reports: tuple[CriticalPointReport, ...]
    oracle: OracleResult

    @property
    def candidates(self) -> list[CriticalPointReport]:
        return [report for report in self.reports if report.classification is PointClass.LOCAL_MIN_CANDIDATE]

    @property
    def max_candidate_gap(self) -> float:
        """Largest candidate loss above the oracle minimum; 0 when there is no candidate."""
        gaps = [report.loss - self.oracle.min_loss for report in self.candidates]
        return max(gaps, default=0.0)


@dataclass(frozen=True)
class ConvexityReport:
    found_positive_curvature: bool
    found_negative_curvature: bool
    max_curvature: float
    min_curvature: float
    probes: int
    eig_tol: float

    @property
    def nonconvex_nonconcave(self) -> bool:
        return self.found_positive_curvature and self.found_negative_curvature
