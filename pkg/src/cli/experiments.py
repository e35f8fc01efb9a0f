"""One runner per experiment kind; each turns a resolved config into report rows."""

import logging
import time
from dataclasses import replace
from typing import Callable, Optional

import numpy as np

from .. import __version__
from ..core.initializers import check_containment, containment_sweep, sample_weights, support_interval, symmetry_audit
from ..core.landscape import (
    bernoulli_variance_gap,
    classify_point,
    convexity_probe,
    expected_loss,
    monte_carlo_loss,
    multistart_descent,
    synthetic_dataset,
)
from ..core.netmodel import default_probe_input
from ..core.pathstats import (
    calibrate_clamp_tolerance,
    depth_decay_sweep,
    estimate_activation_prob,
    estimate_conditional_given_input,
    estimate_conditional_given_weights,
    independence_test,
    net_input_envelope,
    trial_outcomes,
)
from ..core.proportions import alpha_for_z
from ..models.initialization import InitScheme, RngSeed, SchemeKind
from ..models.landscape import LossConfig, LossVariant, PointClass, Tolerances
from ..models.network import NetworkSpec, PathId, WeightSet
from ..models.schemas import ExperimentConfig, ExperimentKind, ExperimentReport, ReportRow
from ..models.statistics import ClampSpec, ProportionEstimate, TrialPlan
from .report_writer import finite_or_none

logger = logging.getLogger("cli")

CLAMPED_STREAM = 1 << 48
DATA_STREAM = 1 << 63
PROBE_STREAM = 1 << 62
LOSS_STREAM = 1 << 60
HOMOGENEITY_TRIALS = 10_000


def _spec(config: ExperimentConfig) -> NetworkSpec:
    network = config.network
    return NetworkSpec(tuple(network.widths), path_scale=network.path_scale, input_bound=network.input_bound)


def _probe_input(config: ExperimentConfig, spec: NetworkSpec) -> np.ndarray:
    if config.parameters.input is not None:
        return np.asarray(config.parameters.input, dtype=float)
    return default_probe_input(spec.input_dim, spec.input_bound)


def _plan(config: ExperimentConfig, spec: NetworkSpec, x=None, stream: int = 0) -> TrialPlan:
    return TrialPlan(spec=spec, scheme=InitScheme.from_token(config.scheme),
                     input=_probe_input(config, spec) if x is None else x,
                     path=PathId(0, (0,) * (spec.hidden_depth + 1)), trials=config.trials,
                     seed=RngSeed(config.seed, stream))


def _estimate_row(name: str, estimate: ProportionEstimate, target: float, x: Optional[float] = None,
                  **values) -> ReportRow:
    return ReportRow(name=name, x=x, estimate=estimate.p_hat, ci_lo=estimate.ci_lo, ci_hi=estimate.ci_hi,
                     target=target, passed=estimate.contains(target),
                     values={"successes": estimate.successes, "trials": estimate.trials, **values})


def _tolerances(config: ExperimentConfig) -> Tolerances:
    t = config.tolerances
    return Tolerances(grad_factor=t.grad_factor, eig_factor=t.eig_factor, hessian_budget=t.hessian_budget,
                      descent_directions=t.descent_directions)


def run_intervals(config: ExperimentConfig) -> list[ReportRow]:
    p = config.parameters
    rows = []
    for n in p.fan_ins:
        for scheme in (InitScheme(SchemeKind.EVEN_UNIFORM), InitScheme(SchemeKind.STANDARD_UNIFORM),
                       InitScheme(SchemeKind.HE_NORMAL)):
            interval = support_interval(scheme, n)
            rows.append(ReportRow(name=scheme.token, x=n, ci_lo=interval.lo, ci_hi=interval.hi,
                                  values={"coverage": interval.coverage}))
        if p.fan_out is not None:
            interval = support_interval(InitScheme(SchemeKind.GLOROT_UNIFORM), n, p.fan_out)
            rows.append(ReportRow(name=SchemeKind.GLOROT_UNIFORM.value, x=n, ci_lo=interval.lo, ci_hi=interval.hi,
                                  values={"coverage": interval.coverage, "fan_out": p.fan_out}))
        rows.append(ReportRow(name="containment", x=n, passed=check_containment(n).contained))
    sweep = containment_sweep(p.sweep_max)
    rows.append(ReportRow(name="containment-sweep", x=p.sweep_max, passed=sweep.contained,
                          values={"first_violation": sweep.first_violation}))
    return rows


def run_init_sample(config: ExperimentConfig) -> list[ReportRow]:
    spec = _spec(config)
    scheme = InitScheme.from_token(config.scheme)
    z = config.tolerances.z
    w = sample_weights(spec, scheme, RngSeed(config.seed))
    rows = []
    for k, layer in enumerate(w.layers, start=1):
        rows_k, cols_k = layer.shape
        interval = support_interval(scheme, cols_k, rows_k)
        bounded = interval.coverage == 1.0
        rows.append(ReportRow(name="support", x=k, estimate=float(np.max(np.abs(layer))), target=interval.hi,
                              passed=bool(np.max(np.abs(layer)) <= interval.hi) if bounded else None,
                              values={"fan_in": cols_k, "coverage": interval.coverage}))
        audit = symmetry_audit(scheme, cols_k, config.trials, RngSeed(config.seed, k), fan_out=rows_k, z=z)
        rows.append(ReportRow(name="mean", x=k, estimate=audit.mean_estimate,
                              ci_lo=audit.mean_estimate - z * audit.mean_stderr,
                              ci_hi=audit.mean_estimate + z * audit.mean_stderr,
                              target=0.0, passed=audit.mean_brackets_zero))
        rows.append(_estimate_row("sign-balance", audit.sign_balance, 0.5, x=k))
        rows.append(ReportRow(name="ks-symmetry", x=k, estimate=audit.ks_statistic,
                              passed=audit.ks_pvalue >= alpha_for_z(z),
                              values={"p_value": audit.ks_pvalue}))
    return rows


def run_path_prob(config: ExperimentConfig) -> list[ReportRow]:
    spec = _spec(config)
    plan = _plan(config, spec)
    rows = [_estimate_row("activation-probability", estimate_activation_prob(plan, config.tolerances.z),
                          plan.target, x=spec.hidden_depth)]
    if config.parameters.check_envelope:
        envelope = net_input_envelope(plan)
        rows.append(ReportRow(name="net-input-envelope", estimate=envelope.max_abs_net_input, target=envelope.bound,
                              passed=envelope.within_bound if plan.scheme.is_even else None))
    return rows


def _deviation(estimate: ProportionEstimate, target: float) -> float:
    return abs(estimate.p_hat - target)


def run_cond_weights(config: ExperimentConfig) -> list[ReportRow]:
    spec = _spec(config)
    t = config.tolerances
    plan = _plan(config, spec)
    fractions = config.parameters.clamp_fractions or [1.0] * (spec.hidden_depth + 1)
    clamp = ClampSpec.from_fractions(spec, fractions)
    estimate = estimate_conditional_given_weights(plan, clamp, t.z, t.output_clamp_bound)
    values = {"successes": estimate.successes, "trials": estimate.trials}
    if t.clamp_tolerance is not None:
        tolerance = t.clamp_tolerance
    else:
        calibration = calibrate_clamp_tolerance(plan, fractions, t.z, t.output_clamp_bound)
        tolerance = calibration.tolerance
        values.update(calibration_width=calibration.calibration_width,
                      calibration_deviation=calibration.deviation_at_calibration)
    values["tolerance"] = tolerance
    deviation = _deviation(estimate, plan.target)
    rows = [ReportRow(name="clamped-activation", x=spec.widths[1], estimate=estimate.p_hat, ci_lo=estimate.ci_lo,
                      ci_hi=estimate.ci_hi, target=plan.target, passed=deviation <= tolerance, values=values)]
    narrow_width = config.parameters.narrow_width
    if narrow_width is not None:
        narrow_spec = NetworkSpec((narrow_width,) * (spec.hidden_depth + 1) + (spec.output_dim,),
                                  path_scale=spec.path_scale, input_bound=spec.input_bound)
        narrow_plan = _plan(config, narrow_spec, x=default_probe_input(narrow_width, spec.input_bound))
        narrow = estimate_conditional_given_weights(narrow_plan, ClampSpec.from_fractions(narrow_spec, fractions),
                                                    t.z, t.output_clamp_bound)
        narrow_deviation = _deviation(narrow, plan.target)
        rows.append(ReportRow(name="narrow-vs-wide", x=narrow_width, estimate=narrow_deviation, target=deviation,
                              passed=narrow_deviation > deviation, values={"narrow_p_hat": narrow.p_hat}))
    return rows


def conditioning_inputs(dim: int, bound: float, count: int) -> list[np.ndarray]:
    """Deterministic, pairwise distinct nonzero inputs."""
    j = np.arange(1, dim + 1, dtype=float)
    return [bound * np.cos((k + 1) * j + k) for k in range(count)]


def run_cond_input(config: ExperimentConfig) -> list[ReportRow]:
    spec = _spec(config)
    p = config.parameters
    plan = _plan(config, spec)
    if p.inputs is not None:
        inputs = [np.asarray(mu, dtype=float) for mu in p.inputs]
    else:
        inputs = conditioning_inputs(spec.input_dim, spec.input_bound, p.input_count)
    rows = [_estimate_row("conditional-activation", estimate_conditional_given_input(plan, mu, config.tolerances.z),
                          plan.target, x=index)
            for index, mu in enumerate(inputs)]
    if p.homogeneity_check:
        short = replace(plan, trials=min(plan.trials, HOMOGENEITY_TRIALS))
        first = trial_outcomes(short, inputs[0])
        halved = trial_outcomes(short, 0.5 * inputs[0])
        mismatches = int(np.count_nonzero(first != halved))
        rows.append(ReportRow(name="homogeneity", estimate=mismatches, target=0.0, passed=mismatches == 0,
                              values={"trials": short.trials}))
    return rows


def run_independence(config: ExperimentConfig) -> list[ReportRow]:
    spec = _spec(config)
    t = config.tolerances
    plan = _plan(config, spec)
    clamped_plan = _plan(config, spec, stream=CLAMPED_STREAM)
    fractions = config.parameters.clamp_fractions or [None] * spec.hidden_depth + [1.0]
    clamp = ClampSpec.from_fractions(spec, fractions)
    unconditional = estimate_activation_prob(plan, t.z)
    clamped = estimate_conditional_given_weights(clamped_plan, clamp, t.z, t.output_clamp_bound)
    report = independence_test(unconditional, clamped, t.independence_threshold)
    return [
        _estimate_row("unconditional", unconditional, plan.target),
        _estimate_row("clamped", clamped, plan.target),
        ReportRow(name="independence", estimate=report.z_stat, target=0.0, passed=report.passed,
                  values={"p_value": report.p_value, "threshold": report.threshold}),
    ]


def run_depth_sweep(config: ExperimentConfig) -> list[ReportRow]:
    template = _spec(config)
    t = config.tolerances
    sweep = depth_decay_sweep(template, config.parameters.depths, InitScheme.from_token(config.scheme),
                              config.trials, RngSeed(config.seed), x=config.parameters.input, z=t.z)
    rows = [_estimate_row("depth", estimate, target, x=depth)
            for depth, estimate, target in zip(sweep.depths, sweep.estimates, sweep.targets())]
    for ratio in sweep.ratios:
        rows.append(ReportRow(name="ratio", x=ratio.depth, estimate=finite_or_none(ratio.ratio),
                              ci_lo=finite_or_none(ratio.ci_lo), ci_hi=finite_or_none(ratio.ci_hi),
                              target=0.5, passed=ratio.contains(0.5)))
    slope = finite_or_none(sweep.slope)
    if slope is not None:
        rows.append(ReportRow(name="slope", estimate=slope, target=-1.0,
                              passed=abs(slope + 1.0) <= t.slope_tolerance,
                              values={"intercept": finite_or_none(sweep.intercept)}))
    return rows


def _start_verdict(classification: PointClass, gap: float, descent_found: bool, oracle_gap: float) -> Optional[bool]:
    if classification is PointClass.LOCAL_MIN_CANDIDATE:
        return gap <= oracle_gap
    if classification is PointClass.NOT_CRITICAL:
        return None
    return descent_found


def run_landscape(config: ExperimentConfig) -> list[ReportRow]:
    spec = _spec(config)
    p = config.parameters
    tolerances = _tolerances(config)
    cfg = LossConfig.for_spec(spec, rho=p.rho)
    data = synthetic_dataset(spec, p.patterns, RngSeed(config.seed, DATA_STREAM), p.realizable_rank, cfg)
    result = multistart_descent(spec, data, cfg, InitScheme.from_token(config.scheme), p.starts,
                                RngSeed(config.seed), tolerances, p.max_iterations)
    oracle = result.oracle
    rows = [ReportRow(name="oracle", estimate=oracle.min_loss, values={"rank": oracle.rank})]
    for start, report in enumerate(result.reports):
        gap = report.loss - oracle.min_loss
        rows.append(ReportRow(
            name="start", x=start, estimate=report.loss, target=oracle.min_loss,
            passed=_start_verdict(report.classification, gap, report.descent_found, config.tolerances.oracle_gap),
            values={"classification": report.classification.value, "grad_norm": report.grad_norm,
                    "iterations": report.iterations, "diagnostics": report.diagnostics}))
    zero = classify_point(spec, WeightSet.zeros(spec), data, cfg, tolerances, RngSeed(config.seed, PROBE_STREAM))
    expected = PointClass.DEGENERATE_SADDLE if spec.hidden_depth >= 2 else PointClass.SADDLE
    rows.append(ReportRow(name="zero-point", estimate=zero.loss, passed=zero.classification is expected,
                          values={"classification": zero.classification.value,
                                  "min_eig": finite_or_none(min(zero.hessian_eigs, default=None)),
                                  "eig_tol": finite_or_none(zero.eig_tol)}))
    probe = convexity_probe(spec, data, cfg, p.probes, RngSeed(config.seed, PROBE_STREAM), tolerances)
    rows.append(ReportRow(name="convexity", passed=probe.nonconvex_nonconcave,
                          values={"min_curvature": probe.min_curvature, "max_curvature": probe.max_curvature,
                                  "eig_tol": probe.eig_tol}))
    return rows


def run_mc_loss(config: ExperimentConfig) -> list[ReportRow]:
    spec = _spec(config)
    p = config.parameters
    t = config.tolerances
    mc_cfg = LossConfig.for_spec(spec, rho=p.rho, variant=LossVariant.MONTE_CARLO)
    expected_cfg = LossConfig.for_spec(spec, rho=p.rho)
    data = synthetic_dataset(spec, p.patterns, RngSeed(config.seed, DATA_STREAM), p.realizable_rank, expected_cfg)
    w = sample_weights(spec, InitScheme.from_token(config.scheme), RngSeed(config.seed))
    estimate = monte_carlo_loss(spec, w, data, mc_cfg, config.trials, RngSeed(config.seed, LOSS_STREAM),
                                cap=t.enumeration_cap)
    expected = expected_loss(spec, w, data, expected_cfg)
    gap = bernoulli_variance_gap(spec, w, data, mc_cfg, cap=t.enumeration_cap)
    target = expected + gap
    if estimate.stderr > 0.0:
        passed = abs(estimate.mean - target) <= t.z * estimate.stderr
    else:
        passed = abs(estimate.mean - target) <= 1e-9 * (1.0 + abs(target))
    return [
        ReportRow(name="monte-carlo-loss", estimate=estimate.mean, ci_lo=estimate.mean - t.z * estimate.stderr,
                  ci_hi=estimate.mean + t.z * estimate.stderr, target=target, passed=passed,
                  values={"stderr": estimate.stderr, "trials": estimate.trials}),
        ReportRow(name="expected-loss", estimate=expected),
        ReportRow(name="variance-gap", estimate=gap),
    ]


RUNNERS: dict[ExperimentKind, Callable[[ExperimentConfig], list[ReportRow]]] = {
    ExperimentKind.INTERVALS: run_intervals,
    ExperimentKind.INIT_SAMPLE: run_init_sample,
    ExperimentKind.PATH_PROB: run_path_prob,
    ExperimentKind.COND_WEIGHTS: run_cond_weights,
    ExperimentKind.COND_INPUT: run_cond_input,
    ExperimentKind.INDEPENDENCE: run_independence,
    ExperimentKind.DEPTH_SWEEP: run_depth_sweep,
    ExperimentKind.LANDSCAPE: run_landscape,
    ExperimentKind.MC_LOSS: run_mc_loss,
}


def run(config: ExperimentConfig) -> ExperimentReport:
    """Run the configured experiment and assemble its report."""
    logger.info("🚀 Running %s (seed %d, %d trials, widths %s)",
                config.kind.value, config.seed, config.trials, config.network.widths)
    started = time.perf_counter()
    rows = RUNNERS[config.kind](config)
    elapsed = time.perf_counter() - started
    report = ExperimentReport(
        version=__version__,
        kind=config.kind,
        config=config.echo(),
        rows=rows,
        passed=all(row.passed is not False for row in rows),
        wall_time_seconds=elapsed if config.output.include_timing else None,
    )
    logger.info("✅ %s finished in %.2fs: %s", config.kind.value, elapsed,
                "all verdicts pass" if report.passed else f"{len(report.failed_rows)} failed rows")
    return report
