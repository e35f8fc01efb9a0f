"""Even initialization, the comparison schemes, and their support intervals."""

import logging
import math
from typing import Iterator, Optional

import numpy as np
from scipy.special import ndtri
from scipy.stats import ks_2samp

from ..exceptions import SamplingError, StructuralError, ValidationError
from ..models.initialization import (
    ContainmentReport,
    FanMode,
    InitScheme,
    IntervalSummary,
    RngSeed,
    SchemeKind,
    SweepResult,
)
from ..models.network import NetworkSpec, WeightSet
from ..models.statistics import SymmetryAudit
from .proportions import DEFAULT_Z, wilson_estimate

logger = logging.getLogger("initializers")

TRUNCATION_RETRY_CAP = 100
THREE_SIGMA_COVERAGE = 0.9973
MIN_AUDIT_DRAWS = 10_000


def _check_fans(fan_in: int, fan_out: Optional[int]) -> None:
    if fan_in < 1:
        raise ValidationError("fan_in must be at least 1", str(fan_in))
    if fan_out is not None and fan_out < 1:
        raise ValidationError("fan_out must be at least 1", str(fan_out))


def _he_std(fan_mode: FanMode, fan_in: int, fan_out: Optional[int]) -> float:
    if fan_mode is FanMode.FAN_OUT:
        if fan_out is None:
            raise ValidationError("he-normal in fan-out mode needs fan_out")
        return math.sqrt(2.0 / fan_out)
    return math.sqrt(2.0 / fan_in)


def _normal_draws(rng: np.random.Generator, size, std: float, bound: float = math.inf,
                  retry_cap: int = TRUNCATION_RETRY_CAP) -> np.ndarray:
    """Inverse-CDF normal draws; entries outside [-bound, bound] are redrawn up to ``retry_cap`` times."""
    values = std * ndtri(rng.random(size))
    rejected = ~(np.abs(values) <= bound)
    rounds = 0
    while np.any(rejected):
        if rounds == retry_cap:
            raise SamplingError("Truncated normal retry cap exhausted",
                                f"{int(np.count_nonzero(rejected))} draws still outside +/-{bound}")
        values[rejected] = std * ndtri(rng.random(int(np.count_nonzero(rejected))))
        rejected = ~(np.abs(values) <= bound)
        rounds += 1
    return values


def draw_entries(kind: SchemeKind, rng: np.random.Generator, size, fan_in: int,
                 fan_out: Optional[int] = None, fan_mode: FanMode = FanMode.FAN_IN,
                 retry_cap: int = TRUNCATION_RETRY_CAP) -> np.ndarray:
    """Draw i.i.d. weights of one kind for a neuron with the given fans."""
    _check_fans(fan_in, fan_out)
    if kind is SchemeKind.EVEN_UNIFORM:
        bound = 1.0 / fan_in
        return rng.uniform(-bound, bound, size)
    if kind is SchemeKind.EVEN_TRUNCATED_NORMAL:
        bound = 1.0 / fan_in
        return _normal_draws(rng, size, bound / 3.0, bound, retry_cap)
    if kind is SchemeKind.STANDARD_UNIFORM:
        bound = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-bound, bound, size)
    if kind is SchemeKind.HE_NORMAL:
        return _normal_draws(rng, size, _he_std(fan_mode, fan_in, fan_out), retry_cap=retry_cap)
    if kind is SchemeKind.GLOROT_UNIFORM:
        if fan_out is None:
            raise ValidationError("glorot-uniform needs fan_out")
        bound = math.sqrt(6.0) / math.sqrt(fan_in + fan_out)
        return rng.uniform(-bound, bound, size)
    raise ValidationError("Unsupported scheme kind", str(kind))


def check_overrides(spec: NetworkSpec, scheme: InitScheme) -> None:
    for layer, neuron in scheme.per_neuron_overrides:
        if not 1 <= layer <= spec.hidden_depth + 1:
            raise StructuralError("Override layer out of range", str(layer))
        if not 0 <= neuron < spec.widths[layer]:
            raise StructuralError(f"Override neuron out of range in layer {layer}", str(neuron))


def iter_layers(spec: NetworkSpec, scheme: InitScheme, seed: RngSeed,
                retry_cap: int = TRUNCATION_RETRY_CAP) -> Iterator[np.ndarray]:
    """Yield W_1, W_2, ... as plain writable arrays, drawing each layer on demand.

    Layer k reads counter lane k, an overridden neuron row reads its own row block,
    so layers (and overridden rows) never share draws and stopping early leaves the
    layers already yielded unchanged. Overrides are assumed checked.
    """
    for k, (rows, cols) in enumerate(spec.layer_shapes, start=1):
        matrix = draw_entries(scheme.kind, seed.generator(lane=k), (rows, cols),
                              fan_in=cols, fan_out=rows, fan_mode=scheme.fan_mode, retry_cap=retry_cap)
        for (layer, neuron), kind in scheme.per_neuron_overrides.items():
            if layer == k and kind is not scheme.kind:
                matrix[neuron] = draw_entries(kind, seed.generator(lane=k, row=neuron + 1), cols,
                                              fan_in=cols, fan_out=rows, retry_cap=retry_cap)
        yield matrix


def sample_weights(spec: NetworkSpec, scheme: InitScheme, seed: RngSeed,
                   retry_cap: int = TRUNCATION_RETRY_CAP) -> WeightSet:
    """Draw every weight of ``spec`` under ``scheme``; deterministic in ``seed``."""
    check_overrides(spec, scheme)
    return WeightSet(tuple(iter_layers(spec, scheme, seed, retry_cap)))


def support_interval(scheme: InitScheme, fan_in: int, fan_out: Optional[int] = None) -> IntervalSummary:
    """Exact support for bounded schemes, the 3-sigma interval for he-normal."""
    _check_fans(fan_in, fan_out)
    kind = scheme.kind
    coverage = 1.0
    if kind.is_even:
        bound = 1.0 / fan_in
    elif kind is SchemeKind.STANDARD_UNIFORM:
        bound = 1.0 / math.sqrt(fan_in)
    elif kind is SchemeKind.HE_NORMAL:
        bound = 3.0 * _he_std(scheme.fan_mode, fan_in, fan_out)
        coverage = THREE_SIGMA_COVERAGE
    else:
        if fan_out is None:
            raise ValidationError("glorot-uniform needs fan_out")
        bound = math.sqrt(6.0) / math.sqrt(fan_in + fan_out)
    return IntervalSummary(kind=kind, fan_in=fan_in, lo=-bound, hi=bound, coverage=coverage)


def check_containment(fan_in: int) -> ContainmentReport:
    """Even interval against the standard interval and the he-normal (fan-in) 3-sigma interval."""
    even = support_interval(InitScheme(SchemeKind.EVEN_UNIFORM), fan_in)
    standard = support_interval(InitScheme(SchemeKind.STANDARD_UNIFORM), fan_in)
    he = support_interval(InitScheme(SchemeKind.HE_NORMAL), fan_in)
    contained = standard.contains(even) and he.contains(even)
    if not contained:
        logger.warning("Containment fails at fan_in=%d", fan_in)
    return ContainmentReport(even=even, standard=standard, he=he, contained=contained)


def containment_sweep(max_fan_in: int) -> SweepResult:
    """Check 1/n <= 1/sqrt(n) and 1/n <= 3*sqrt(2/n) for every n in 1 .. max_fan_in."""
    if max_fan_in < 1:
        raise ValidationError("max_fan_in must be at least 1", str(max_fan_in))
    n = np.arange(1, max_fan_in + 1, dtype=float)
    even = 1.0 / n
    ok = (even <= 1.0 / np.sqrt(n)) & (even <= 3.0 * np.sqrt(2.0 / n))
    violations = np.flatnonzero(~ok)
    first = int(violations[0]) + 1 if violations.size else None
    logger.info("Containment sweep up to n=%d: first violation %s", max_fan_in, first)
    return SweepResult(max_fan_in=max_fan_in, first_violation=first)


def symmetry_audit(scheme: InitScheme, fan_in: int, draws: int, seed: RngSeed,
                   fan_out: Optional[int] = None, z: float = DEFAULT_Z) -> SymmetryAudit:
    """Mean, sign balance and a w vs -w Kolmogorov-Smirnov comparison over ``draws`` samples."""
    if draws < MIN_AUDIT_DRAWS:
        raise ValidationError(f"A symmetry audit needs at least {MIN_AUDIT_DRAWS} draws", str(draws))
    samples = draw_entries(scheme.kind, seed.generator(), draws, fan_in=fan_in,
                           fan_out=fan_out, fan_mode=scheme.fan_mode)
    half = draws // 2
    ks = ks_2samp(samples[:half], -samples[half:2 * half])
    return SymmetryAudit(
        mean_estimate=float(np.mean(samples)),
        mean_stderr=float(np.std(samples, ddof=1) / math.sqrt(draws)),
        sign_balance=wilson_estimate(int(np.count_nonzero(samples > 0.0)), draws, z),
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        z=float(z),
    )
