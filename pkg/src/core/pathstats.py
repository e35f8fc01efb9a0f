"""Monte Carlo estimates of path-activation probabilities under random initialization.

Every trial draws fresh weights from its own seed stream (the plan's stream
offset plus the trial index), so a trial's outcome never depends on which
thread ran it or on how many trials ran before it.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from ..exceptions import ValidationError
from ..models.initialization import UINT64_LIMIT, InitScheme, RngSeed
from ..models.network import NetworkSpec, PathId
from ..models.statistics import (
    ClampCalibration,
    ClampSpec,
    DepthSweep,
    IndependenceReport,
    NetInputEnvelope,
    ProportionEstimate,
    RatioEstimate,
    TrialPlan,
)
from .initializers import check_overrides, iter_layers
from .netmodel import default_probe_input
from .parallel import chunk_bounds, count_successes, map_ordered, worker_count
from .proportions import DEFAULT_Z, ratio_interval, two_proportion_z, wilson_estimate

logger = logging.getLogger("pathstats")

MIN_INDEPENDENCE_TRIALS = 10_000
DEFAULT_INDEPENDENCE_THRESHOLD = 4.0
DEFAULT_OUTPUT_CLAMP_BOUND = 1.0
DEPTH_STREAM_SHIFT = 40


def trial_seed(seed: RngSeed, trial: int) -> RngSeed:
    return RngSeed(seed.master_seed, (seed.stream_id + trial) % UINT64_LIMIT)


def _check_mu(plan: TrialPlan, mu) -> np.ndarray:
    vector = plan.spec.check_input(mu)
    if not np.any(vector != 0.0):
        raise ValidationError("The conditioning input must be nonzero",
                              "a zero input deactivates every path")
    return vector


ClampTable = dict[int, tuple[int, int, float]]


def _clamp_table(plan: TrialPlan, clamp: Optional[ClampSpec]) -> ClampTable:
    """Clamped on-path weight per layer: layer -> (row, col, value)."""
    check_overrides(plan.spec, plan.scheme)
    if clamp is None:
        return {}
    return {layer: (row, col, value)
            for (layer, row, col), value in zip(plan.path.weight_positions(), clamp.values)
            if value is not None}


def _trial_active(plan: TrialPlan, x: np.ndarray, trial: int, clamps: ClampTable) -> bool:
    """Masked forward pass on raw layers; stops at the first on-path unit with U <= 0.

    Layers past that unit are never drawn. The plan, input and overrides are checked
    by the callers.
    """
    chain = plan.path.neuron_chain
    layers = iter_layers(plan.spec, plan.scheme, trial_seed(plan.seed, trial))
    signal = x
    for k in range(1, plan.spec.hidden_depth + 1):
        layer = next(layers)
        if k in clamps:
            row, col, value = clamps[k]
            layer[row, col] = value
        net_input = layer @ signal
        if not net_input[chain[k]] > 0.0:
            return False
        signal = np.maximum(net_input, 0.0)
    return True


def _estimate(plan: TrialPlan, x: np.ndarray, z: float, clamp: Optional[ClampSpec] = None,
              workers: Optional[int] = None) -> ProportionEstimate:
    clamps = _clamp_table(plan, clamp)

    def count_range(start: int, stop: int) -> int:
        return sum(_trial_active(plan, x, trial, clamps) for trial in range(start, stop))

    successes = count_successes(count_range, plan.trials, workers)
    estimate = wilson_estimate(successes, plan.trials, z)
    logger.info("p_hat=%.6f [%.6f, %.6f] over %d trials (H=%d, %s, target %.6g)",
                estimate.p_hat, estimate.ci_lo, estimate.ci_hi, plan.trials,
                plan.spec.hidden_depth, plan.scheme.token, plan.target)
    return estimate


def estimate_activation_prob(plan: TrialPlan, z: float = DEFAULT_Z,
                             workers: Optional[int] = None) -> ProportionEstimate:
    """Fraction of fresh initializations under which ``plan.path`` is active at ``plan.input``."""
    return _estimate(plan, plan.input, z, workers=workers)


def estimate_conditional_given_weights(plan: TrialPlan, clamp: ClampSpec, z: float = DEFAULT_Z,
                                       output_bound: float = DEFAULT_OUTPUT_CLAMP_BOUND,
                                       workers: Optional[int] = None) -> ProportionEstimate:
    """Activation probability with the on-path weights overwritten by ``clamp`` after sampling."""
    clamp.check_against(plan.spec, output_bound)
    return _estimate(plan, plan.input, z, clamp=clamp, workers=workers)


def estimate_conditional_given_input(plan: TrialPlan, mu, z: float = DEFAULT_Z,
                                     workers: Optional[int] = None) -> ProportionEstimate:
    """Activation probability at input ``mu`` instead of ``plan.input``."""
    return _estimate(plan, _check_mu(plan, mu), z, workers=workers)


def trial_outcomes(plan: TrialPlan, x=None, clamp: Optional[ClampSpec] = None,
                   workers: Optional[int] = None) -> np.ndarray:
    """Per-trial activity of ``plan.path`` as a boolean vector, trial order."""
    vector = plan.input if x is None else _check_mu(plan, x)
    clamps = _clamp_table(plan, clamp)
    bounds = chunk_bounds(plan.trials, worker_count(workers))
    chunks = map_ordered(
        lambda b: np.array([_trial_active(plan, vector, trial, clamps) for trial in range(*b)], dtype=bool),
        bounds, workers)
    return np.concatenate(chunks)


def independence_test(a: ProportionEstimate, b: ProportionEstimate,
                      threshold: float = DEFAULT_INDEPENDENCE_THRESHOLD) -> IndependenceReport:
    """Two-proportion z-test; passes iff |z| < threshold."""
    for name, estimate in (("a", a), ("b", b)):
        if estimate.trials < MIN_INDEPENDENCE_TRIALS:
            raise ValidationError(f"Estimate {name} needs at least {MIN_INDEPENDENCE_TRIALS} trials",
                                  str(estimate.trials))
    if not math.isfinite(threshold) or threshold <= 0:
        raise ValidationError("threshold must be a positive real", str(threshold))
    z_stat, p_value = two_proportion_z(a, b)
    passed = abs(z_stat) < threshold
    logger.info("Independence test: z=%.4f p=%.4g threshold=%.2f -> %s",
                z_stat, p_value, threshold, "pass" if passed else "fail")
    return IndependenceReport(z_stat=z_stat, p_value=p_value, threshold=float(threshold), passed=passed)


def _depth_spec(template: NetworkSpec, depth: int) -> NetworkSpec:
    return NetworkSpec.uniform(template.widths[0], template.widths[1], depth, template.widths[-1],
                               path_scale=template.path_scale, input_bound=template.input_bound)


def depth_decay_sweep(template: NetworkSpec, depths: Sequence[int], scheme: InitScheme, trials: int,
                      seed: RngSeed, x=None, z: float = DEFAULT_Z,
                      workers: Optional[int] = None) -> DepthSweep:
    """Estimate 2^-H for consecutive depths H, with successive ratios and the log2 slope.

    Each depth reuses the template's input width, first hidden width and output width,
    probes the all-zeros path, and runs on its own stream block.
    """
    depths = tuple(int(depth) for depth in depths)
    if not depths or depths[0] < 1:
        raise ValidationError("Depths must be a non-empty range starting at 1 or more", str(list(depths)))
    if any(b - a != 1 for a, b in zip(depths, depths[1:])):
        raise ValidationError("Depths must be consecutive and increasing", str(list(depths)))
    vector = default_probe_input(template.input_dim, template.input_bound) if x is None else x

    estimates = []
    for depth in depths:
        spec = _depth_spec(template, depth)
        plan = TrialPlan(spec=spec, scheme=scheme, input=vector, path=PathId(0, (0,) * (depth + 1)),
                         trials=trials,
                         seed=RngSeed(seed.master_seed, (seed.stream_id + (depth << DEPTH_STREAM_SHIFT)) % UINT64_LIMIT))
        estimates.append(estimate_activation_prob(plan, z, workers))

    ratios = []
    for depth, previous, current in zip(depths[1:], estimates, estimates[1:]):
        ratio, lo, hi = ratio_interval(current, previous, z)
        ratios.append(RatioEstimate(depth=depth, ratio=ratio, ci_lo=lo, ci_hi=hi))

    if len(depths) >= 2 and all(estimate.successes > 0 for estimate in estimates):
        slope, intercept = np.polyfit(np.array(depths, dtype=float),
                                      np.log2([estimate.p_hat for estimate in estimates]), 1)
    else:
        slope, intercept = math.nan, math.nan
    logger.info("Depth sweep H=%s: slope %.4f", list(depths), slope)
    return DepthSweep(depths=depths, estimates=tuple(estimates), ratios=tuple(ratios),
                      slope=float(slope), intercept=float(intercept))


def _doubled(plan: TrialPlan) -> TrialPlan:
    widths = tuple(2 * width for width in plan.spec.widths[:-1]) + (plan.spec.output_dim,)
    spec = NetworkSpec(widths, path_scale=plan.spec.path_scale, input_bound=plan.spec.input_bound)
    return TrialPlan(spec=spec, scheme=plan.scheme, input=np.tile(plan.input, 2), path=plan.path,
                     trials=plan.trials, seed=plan.seed)


def calibrate_clamp_tolerance(plan: TrialPlan, fractions: Sequence[Optional[float]], z: float = DEFAULT_Z,
                              output_bound: float = DEFAULT_OUTPUT_CLAMP_BOUND,
                              workers: Optional[int] = None) -> ClampCalibration:
    """Tolerance for the clamped experiment, taken from a run at double width.

    The clamp bias shrinks like 1/sqrt(d), so the deviation seen at 2d is scaled by
    sqrt(2) back to d, plus z standard errors of both runs.
    """
    doubled = _doubled(plan)
    clamp = ClampSpec.from_fractions(doubled.spec, fractions)
    calibration = estimate_conditional_given_weights(doubled, clamp, z, output_bound, workers)
    target = plan.target
    deviation = abs(calibration.p_hat - target)
    working_se = math.sqrt(target * (1.0 - target) / plan.trials)
    tolerance = math.sqrt(2.0) * deviation + z * (math.sqrt(2.0) * calibration.standard_error + working_se)
    logger.info("Clamp calibration at widths %s: deviation %.5f, tolerance %.5f",
                list(doubled.spec.widths), deviation, tolerance)
    return ClampCalibration(working_width=plan.spec.widths[1], calibration_width=doubled.spec.widths[1],
                            calibration_estimate=calibration, deviation_at_calibration=deviation,
                            tolerance=tolerance)


def net_input_envelope(plan: TrialPlan, workers: Optional[int] = None) -> NetInputEnvelope:
    """Largest |U| over all hidden units and trials, against the input bound."""
    check_overrides(plan.spec, plan.scheme)

    def chunk_max(bounds: tuple[int, int]) -> float:
        largest = 0.0
        for trial in range(*bounds):
            layers = iter_layers(plan.spec, plan.scheme, trial_seed(plan.seed, trial))
            signal = plan.input
            for _ in range(plan.spec.hidden_depth):
                net_input = next(layers) @ signal
                largest = max(largest, float(np.max(np.abs(net_input))))
                signal = np.maximum(net_input, 0.0)
        return largest

    maxima = map_ordered(chunk_max, chunk_bounds(plan.trials, worker_count(workers)), workers)
    envelope = NetInputEnvelope(max_abs_net_input=max(maxima), bound=plan.spec.input_bound, trials=plan.trials)
    if not envelope.within_bound:
        logger.warning("Net input %.6g exceeds the bound %.6g under %s",
                       envelope.max_abs_net_input, envelope.bound, plan.scheme.token)
    return envelope
