"""Pydantic schemas for lab settings, experiment configs and reports."""

from enum import Enum
from typing import Any, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .initialization import UINT64_LIMIT, InitScheme


class ExperimentKind(str, Enum):
    INTERVALS = "intervals"
    INIT_SAMPLE = "init-sample"
    PATH_PROB = "path-prob"
    COND_WEIGHTS = "cond-weights"
    COND_INPUT = "cond-input"
    INDEPENDENCE = "independence"
    DEPTH_SWEEP = "depth-sweep"
    LANDSCAPE = "landscape"
    MC_LOSS = "mc-loss"


SWEEP_KINDS = (ExperimentKind.DEPTH_SWEEP, ExperimentKind.INTERVALS, ExperimentKind.LANDSCAPE)


class LabSettings(BaseModel):
    """Schema for lab-wide defaults stored in settings.json."""
    wilson_z: float = Field(default=4.0, gt=0, description="Half-width of Wilson intervals in standard deviations")
    independence_threshold: float = Field(default=4.0, gt=0, description="|z| below which two proportions agree")
    default_trials: int = Field(default=100_000, ge=1, description="Trials when neither file nor flag sets them")
    enumeration_cap: int = Field(default=1_000_000, ge=1, description="Largest path count that may be enumerated")
    hessian_budget: int = Field(default=200, ge=1, description="Largest parameter count for a dense Hessian")
    output_clamp_bound: float = Field(default=1.0, gt=0, description="Bound on an output-layer clamp value")
    grad_factor: float = Field(default=1e-8, gt=0, description="grad_tol = grad_factor * (1 + loss at zero)")
    eig_factor: float = Field(default=1e-6, gt=0, description="eig_tol = eig_factor * max(1, max |eigenvalue|)")
    descent_directions: int = Field(default=200, ge=1, description="Random directions tried by the descent search")
    oracle_gap: float = Field(default=1e-6, gt=0, description="Allowed gap between a local-min candidate and the oracle")
    slope_tolerance: float = Field(default=0.05, gt=0, description="Allowed |slope + 1| of log2 p against depth")
    last_updated: Optional[str] = Field(None, description="Timestamp of last update")


class NetworkSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    widths: List[int] = Field(default=[8, 8, 1], min_length=3, description="d_0 ... d_{H+1}")
    path_scale: float = Field(default=1.0, gt=0, description="Path scale q")
    input_bound: float = Field(default=1.0, gt=0, description="Inputs lie in [-bound, bound]")

    @field_validator("widths")
    @classmethod
    def _positive(cls, widths: List[int]) -> List[int]:
        if any(width < 1 for width in widths):
            raise ValueError("every width must be at least 1")
        return widths


class ParametersSection(BaseModel):
    """Experiment-specific knobs; each kind reads the ones it needs."""
    model_config = ConfigDict(extra="forbid")

    input: Optional[List[float]] = Field(None, description="Probe input; a deterministic mixed-sign vector when omitted")
    inputs: Optional[List[List[float]]] = Field(None, description="Conditioning inputs for cond-input")
    input_count: int = Field(default=5, ge=1, description="Generated conditioning inputs when inputs is omitted")
    depths: List[int] = Field(default=[1, 2, 3, 4], min_length=1, description="Hidden depths of a depth sweep")
    fan_ins: List[int] = Field(default=[100], min_length=1, description="Fan-ins reported by intervals")
    fan_out: Optional[int] = Field(None, ge=1, description="Fan-out for glorot rows in intervals")
    sweep_max: int = Field(default=1_000_000, ge=1, description="Containment sweep runs over n = 1 .. sweep_max")
    clamp_fractions: Optional[List[Optional[float]]] = Field(
        None, description="lambda_k = f_k / d_{k-1}; null leaves that weight sampled")
    narrow_width: Optional[int] = Field(None, ge=1, description="Hidden width of the narrow comparison run")
    homogeneity_check: bool = Field(default=True, description="cond-input also compares mu with mu / 2 trial by trial")
    check_envelope: bool = Field(default=False, description="path-prob also reports the net-input envelope")
    patterns: int = Field(default=8, ge=1, description="Patterns of the synthetic dataset")
    realizable_rank: Optional[int] = Field(None, ge=1, description="Targets exactly q rho A x with rank(A) <= this")
    rho: Optional[float] = Field(None, gt=0, le=1, description="Path activation probability, 2^-H when omitted")
    starts: int = Field(default=50, ge=1, description="Multistart initializations")
    probes: int = Field(default=60, ge=1, description="Convexity probe points")
    max_iterations: int = Field(default=20_000, ge=1, description="Gradient descent iteration cap")


class TolerancesSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    z: float = Field(default=4.0, gt=0)
    independence_threshold: float = Field(default=4.0, gt=0)
    clamp_tolerance: Optional[float] = Field(None, gt=0, description="Fixed tolerance instead of the calibrated one")
    output_clamp_bound: float = Field(default=1.0, gt=0)
    grad_factor: float = Field(default=1e-8, gt=0)
    eig_factor: float = Field(default=1e-6, gt=0)
    descent_directions: int = Field(default=200, ge=1)
    hessian_budget: int = Field(default=200, ge=1)
    enumeration_cap: int = Field(default=1_000_000, ge=1)
    oracle_gap: float = Field(default=1e-6, gt=0)
    slope_tolerance: float = Field(default=0.05, gt=0)


class OutputSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[str] = Field(None, description="Report file; stdout when omitted")
    format: Literal["json", "csv"] = Field(default="json")
    include_timing: bool = Field(default=False, description="Write wall time into the report")
    plot_table: Optional[str] = Field(None, description="Also write the plot table of a sweep report here")


class ExperimentConfig(BaseModel):
    """Schema for one fully resolved experiment run."""
    model_config = ConfigDict(extra="forbid")

    kind: ExperimentKind = Field(..., description="Experiment to run")
    seed: int = Field(default=0, ge=0, lt=UINT64_LIMIT, description="Master seed")
    trials: int = Field(default=100_000, ge=1, description="Monte Carlo trials (draws for init-sample)")
    scheme: str = Field(default="even-uniform", description="Initialization scheme token")
    network: NetworkSection = Field(default_factory=NetworkSection)
    parameters: ParametersSection = Field(default_factory=ParametersSection)
    tolerances: TolerancesSection = Field(default_factory=TolerancesSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @field_validator("scheme")
    @classmethod
    def _known_scheme(cls, token: str) -> str:
        try:
            return InitScheme.from_token(token).token
        except Exception as e:
            raise ValueError(f"unknown scheme token {token!r}") from e

    def echo(self) -> dict[str, Any]:
        """Config as written into reports; output.path is left out so a report re-runs anywhere."""
        return self.model_dump(mode="json", exclude={"output": {"path"}})


Scalar = Union[bool, int, float, str, None]


class ReportRow(BaseModel):
    """One result line; statistical rows carry estimate, interval, target and verdict."""
    name: str = Field(..., description="What the row measures")
    x: Optional[Union[int, float]] = Field(None, description="Sweep coordinate (depth, fan-in, start index, ...)")
    estimate: Optional[float] = None
    ci_lo: Optional[float] = None
    ci_hi: Optional[float] = None
    target: Optional[float] = None
    passed: Optional[bool] = Field(None, description="Verdict; null for informational rows")
    values: dict[str, Scalar] = Field(default_factory=dict, description="Row-specific extras")


class ExperimentReport(BaseModel):
    """Schema for a written experiment report."""
    version: str = Field(..., description="Lab version that produced the report")
    kind: ExperimentKind
    config: dict[str, Any] = Field(..., description="Resolved config echo")
    rows: List[ReportRow] = Field(default_factory=list)
    passed: bool = Field(..., description="True iff no row failed")
    wall_time_seconds: Optional[float] = Field(None, description="Present only when output.include_timing is set")

    @property
    def failed_rows(self) -> List[ReportRow]:
        return [row for row in self.rows if row.passed is False]
