"""Records for Monte Carlo path-activity experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..exceptions import ValidationError
from .initialization import InitScheme, RngSeed
from .network import NetworkSpec, PathId

MIN_PLAN_TRIALS = 1_000


@dataclass(frozen=True)
class ProportionEstimate:
    """Success count with a Wilson score interval."""

    successes: int
    trials: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    z: float

    def __post_init__(self) -> None:
        if self.trials < 1 or not 0 <= self.successes <= self.trials:
            raise ValidationError("Invalid success count", f"{self.successes}/{self.trials}")
        if not 0.0 <= self.ci_lo <= self.p_hat <= self.ci_hi <= 1.0:
            raise ValidationError("Interval must bracket the estimate inside [0, 1]",
                                  f"{self.ci_lo} <= {self.p_hat} <= {self.ci_hi}")

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.trials)

    def contains(self, value: float) -> bool:
        return self.ci_lo <= value <= self.ci_hi


@dataclass(frozen=True)
class TrialPlan:
    """One path of one network, probed at a fixed input over ``trials`` fresh initializations."""

    spec: NetworkSpec
    scheme: InitScheme
    input: np.ndarray
    path: PathId
    trials: int
    seed: RngSeed

    def __post_init__(self) -> None:
        if self.trials < MIN_PLAN_TRIALS:
            raise ValidationError(f"A trial plan needs at least {MIN_PLAN_TRIALS} trials", str(self.trials))
        vector = self.spec.check_input(self.input).copy()
        if not np.any(vector != 0.0):
            raise ValidationError("The probe input must be nonzero",
                                  "a zero input deactivates every path")
        vector.setflags(write=False)
        object.__setattr__(self, "input", vector)
        self.path.check_against(self.spec)

    @property
    def target(self) -> float:
        return 2.0 ** -self.spec.hidden_depth


@dataclass(frozen=True)
class ClampSpec:
    """Values lambda_1 .. lambda_{H+1} for the on-path weights; None leaves a weight sampled."""

    values: tuple[Optional[float], ...]

    def __post_init__(self) -> None:
        values = tuple(None if value is None else float(value) for value in self.values)
        for value in values:
            if value is not None and not math.isfinite(value):
                raise ValidationError("Clamp values must be finite", repr(value))
        object.__setattr__(self, "values", values)

    @classmethod
    def from_fractions(cls, spec: NetworkSpec, fractions: Sequence[Optional[float]]) -> "ClampSpec":
        """lambda_k = f_k / d_{k-1}; f_k = +/-1 puts the clamp on the edge of the even support."""
        if len(fractions) != spec.hidden_depth + 1:
            raise ValidationError("One fraction per path weight is required",
                                  f"expected {spec.hidden_depth + 1}, got {len(fractions)}")
        values = tuple(None if fraction is None else fraction / spec.widths[k]
                       for k, fraction in enumerate(fractions))
        return cls(values)

    def check_against(self, spec: NetworkSpec, output_bound: float) -> None:
        if len(self.values) != spec.hidden_depth + 1:
            raise ValidationError("Clamp needs one value per path weight",
                                  f"expected {spec.hidden_depth + 1}, got {len(self.values)}")
        for k, value in enumerate(self.values[:-1], start=1):
            bound = 1.0 / spec.widths[k - 1]
            if value is not None and abs(value) > bound * (1.0 + 1e-12):
                raise ValidationError(f"Clamp for layer {k} leaves the even support",
                                      f"|{value}| > {bound}")
        last = self.values[-1]
        if last is not None and abs(last) > output_bound:
            raise ValidationError("Output-layer clamp exceeds the configured bound",
                                  f"|{last}| > {output_bound}")


@dataclass(frozen=True)
class IndependenceReport:
    z_stat: float
    p_value: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class ClampCalibration:
    """Width-extrapolated tolerance for the clamped-weights experiment."""

    working_width: int
    calibration_width: int
    calibration_estimate: ProportionEstimate
    deviation_at_calibration: float
    tolerance: float


@dataclass(frozen=True)
class RatioEstimate:
    depth: int
    ratio: float
    ci_lo: float
    ci_hi: float

    def contains(self, value: float) -> bool:
        return self.ci_lo <= value <= self.ci_hi


@dataclass(frozen=True)
class DepthSweep:
    depths: tuple[int, ...]
    estimates: tuple[ProportionEstimate, ...]
    ratios: tuple[RatioEstimate, ...]
    slope: float
    intercept: float

    def targets(self) -> list[float]:
        return [2.0 ** -depth for depth in self.depths]


@dataclass(frozen=True)
class NetInputEnvelope:
    max_abs_net_input: float
    bound: float
    trials: int

    @property
    def within_bound(self) -> bool:
        return self.max_abs_net_input <= self.bound


@dataclass(frozen=True)
class SymmetryAudit:
    """Empirical check that a scheme's draws are centred and sign-balanced."""

    mean_estimate: float
    mean_stderr: float
    sign_balance: ProportionEstimate
    ks_statistic: float
    ks_pvalue: float
    z: float

    @property
    def mean_brackets_zero(self) -> bool:
        return abs(self.mean_estimate) <= self.z * self.mean_stderr

    @property
    def balance_brackets_half(self) -> bool:
        return self.sign_balance.contains(0.5)
