"""Expected loss of the path model, its derivatives and critical-point probes.

With E[Z] = rho on every path the network output collapses to q * rho * W_{H+1} ... W_1 x,
so the expected-output loss is the loss of a deep linear network scaled by c = q * rho.
The hot paths below work on plain layer lists; WeightSet validation happens once at the
public entry points.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from ..exceptions import CapacityError, ValidationError
from ..models.initialization import UINT64_LIMIT, InitScheme, RngSeed
from ..models.landscape import (
    ConvexityReport,
    CriticalPointReport,
    DescentResult,
    HessianEstimate,
    LossConfig,
    LossVariant,
    MonteCarloLoss,
    MultistartResult,
    PointClass,
    Tolerances,
)
from ..models.network import Dataset, NetworkSpec, WeightSet
from .initializers import sample_weights
from .netmodel import ENUMERATION_CAP, path_contributions
from .optimizer import gradient_descent
from .oracle import global_min_oracle
from .parallel import chunk_bounds, map_ordered, worker_count

logger = logging.getLogger("landscape")

CURVATURE_SCALES = (1e-2, 1e-1, 1.0)
DEFAULT_MAX_ITERATIONS = 20_000


def _require_variant(cfg: LossConfig, variant: LossVariant) -> None:
    if cfg.variant is not variant:
        raise ValidationError(f"This operation needs the {variant.value} loss variant", cfg.variant.value)


def _check(spec: NetworkSpec, w: WeightSet, data: Dataset) -> None:
    w.check_against(spec)
    data.check_against(spec)


def _unflatten(spec: NetworkSpec, theta: np.ndarray) -> list[np.ndarray]:
    layers = []
    offset = 0
    for rows, cols in spec.layer_shapes:
        layers.append(theta[offset:offset + rows * cols].reshape(rows, cols))
        offset += rows * cols
    return layers


def _product(layers: Sequence[np.ndarray]) -> np.ndarray:
    result = layers[0]
    for layer in layers[1:]:
        result = layer @ result
    return result


def _loss(layers: Sequence[np.ndarray], inputs: np.ndarray, targets: np.ndarray, scale: float) -> float:
    residual = scale * (_product(layers) @ inputs) - targets
    return 0.5 * float(np.sum(residual * residual))


def _gradient(layers: Sequence[np.ndarray], inputs: np.ndarray, targets: np.ndarray,
              scale: float) -> list[np.ndarray]:
    count = len(layers)
    below = [np.eye(layers[0].shape[1])]
    for layer in layers:
        below.append(layer @ below[-1])
    above = [np.eye(layers[-1].shape[0])]
    for layer in reversed(layers):
        above.append(above[-1] @ layer)
    residual = scale * (below[-1] @ inputs) - targets
    correlation = residual @ inputs.T
    # dL/dW_k = c (W_{H+1}..W_{k+1})^T R X^T (W_{k-1}..W_1)^T
    return [scale * above[count - k].T @ correlation @ below[k - 1].T for k in range(1, count + 1)]


def _flat_gradient(spec: NetworkSpec, theta: np.ndarray, data: Dataset, scale: float) -> np.ndarray:
    return np.concatenate([g.ravel() for g in _gradient(_unflatten(spec, theta), data.inputs, data.targets, scale)])


def _flat_loss(spec: NetworkSpec, theta: np.ndarray, data: Dataset, scale: float) -> float:
    return _loss(_unflatten(spec, theta), data.inputs, data.targets, scale)


def end_to_end_matrix(w: WeightSet) -> np.ndarray:
    """W_{H+1} ... W_1."""
    return _product(w.layers)


def expected_output(spec: NetworkSpec, w: WeightSet, x, cfg: LossConfig) -> np.ndarray:
    """q * rho * W_{H+1} ... W_1 x."""
    w.check_against(spec)
    return cfg.scale * (end_to_end_matrix(w) @ spec.check_input(x))


def expected_loss(spec: NetworkSpec, w: WeightSet, data: Dataset, cfg: LossConfig) -> float:
    _require_variant(cfg, LossVariant.EXPECTED_OUTPUT)
    _check(spec, w, data)
    return _loss(w.layers, data.inputs, data.targets, cfg.scale)


def zero_loss(data: Dataset) -> float:
    """Loss at Theta = 0, the scale the gradient tolerance is tied to."""
    return 0.5 * float(np.sum(data.targets ** 2))


def gradient(spec: NetworkSpec, w: WeightSet, data: Dataset, cfg: LossConfig) -> WeightSet:
    _require_variant(cfg, LossVariant.EXPECTED_OUTPUT)
    _check(spec, w, data)
    return WeightSet(tuple(_gradient(w.layers, data.inputs, data.targets, cfg.scale)))


def _pattern_contributions(spec: NetworkSpec, w: WeightSet, data: Dataset, cap: int) -> np.ndarray:
    """(m, d_y, Psi) array of x_i[j_0] * prod w for every pattern, output and path."""
    return np.stack([path_contributions(spec, w, data.inputs[:, i], cap) for i in range(data.count)])


def bernoulli_variance_gap(spec: NetworkSpec, w: WeightSet, data: Dataset, cfg: LossConfig,
                           cap: int = ENUMERATION_CAP) -> float:
    """E||Y_hat - Y||^2 / 2 minus ||E Y_hat - Y||^2 / 2 under independent Bernoulli(rho) paths."""
    _check(spec, w, data)
    contributions = _pattern_contributions(spec, w, data, cap)
    return 0.5 * cfg.q ** 2 * cfg.rho * (1.0 - cfg.rho) * float(np.sum(contributions ** 2))


def monte_carlo_loss(spec: NetworkSpec, w: WeightSet, data: Dataset, cfg: LossConfig, trials: int,
                     seed: RngSeed, cap: int = ENUMERATION_CAP, workers: Optional[int] = None) -> MonteCarloLoss:
    """Mean and standard error of 1/2 sum_i ||Y_hat_i - Y_i||^2 with sampled path activities.

    Every (pattern, output, path) activity is an independent Bernoulli(rho) draw; trial t
    reads stream ``seed.stream_id + t``.
    """
    _require_variant(cfg, LossVariant.MONTE_CARLO)
    _check(spec, w, data)
    if trials < 1:
        raise ValidationError("trials must be at least 1", str(trials))
    contributions = _pattern_contributions(spec, w, data, cap)
    targets = data.targets.T

    def chunk_losses(bounds: tuple[int, int]) -> np.ndarray:
        losses = np.empty(bounds[1] - bounds[0])
        for offset, trial in enumerate(range(*bounds)):
            rng = RngSeed(seed.master_seed, (seed.stream_id + trial) % UINT64_LIMIT).generator()
            active = rng.random(contributions.shape) < cfg.rho
            outputs = cfg.q * np.sum(contributions * active, axis=-1)
            losses[offset] = 0.5 * float(np.sum((outputs - targets) ** 2))
        return losses

    losses = np.concatenate(map_ordered(chunk_losses, chunk_bounds(trials, worker_count(workers)), workers))
    if np.all(losses == losses[0]):
        return MonteCarloLoss(mean=float(losses[0]), stderr=0.0, trials=trials)
    stderr = float(np.std(losses, ddof=1) / math.sqrt(trials))
    logger.info("Monte Carlo loss %.8g +/- %.3g over %d trials", float(np.mean(losses)), stderr, trials)
    return MonteCarloLoss(mean=float(np.mean(losses)), stderr=stderr, trials=trials)


def _check_budget(spec: NetworkSpec, tolerances: Tolerances) -> None:
    if spec.parameter_count > tolerances.hessian_budget:
        raise CapacityError("Hessian budget exceeded",
                            f"{spec.parameter_count} parameters, budget is {tolerances.hessian_budget}")


def _hessian(spec: NetworkSpec, theta: np.ndarray, data: Dataset, scale: float,
             fd_step: float) -> HessianEstimate:
    n = theta.size
    steps = fd_step * (1.0 + np.abs(theta))
    base = _flat_loss(spec, theta, data, scale)

    def at(*moves: tuple[int, float]) -> float:
        point = theta.copy()
        for index, delta in moves:
            point[index] += delta
        return _flat_loss(spec, point, data, scale)

    matrix = np.empty((n, n))
    for i in range(n):
        hi = steps[i]
        matrix[i, i] = (at((i, hi)) - 2.0 * base + at((i, -hi))) / (hi * hi)
        for j in range(i):
            hj = steps[j]
            value = (at((i, hi), (j, hj)) - at((i, hi), (j, -hj))
                     - at((i, -hi), (j, hj)) + at((i, -hi), (j, -hj))) / (4.0 * hi * hj)
            matrix[i, j] = matrix[j, i] = value
    matrix = 0.5 * (matrix + matrix.T)
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    return HessianEstimate(matrix=matrix, eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def hessian_fd(spec: NetworkSpec, w: WeightSet, data: Dataset, cfg: LossConfig,
               tolerances: Tolerances = Tolerances()) -> HessianEstimate:
    """Central second differences of the expected loss over the flattened parameters."""
    _require_variant(cfg, LossVariant.EXPECTED_OUTPUT)
    _check(spec, w, data)
    _check_budget(spec, tolerances)
    return _hessian(spec, w.flatten(), data, cfg.scale, tolerances.fd_step)


def _search(spec: NetworkSpec, theta: np.ndarray, data: Dataset, scale: float, tolerances: Tolerances,
            seed: RngSeed, seed_directions: Sequence[np.ndarray]) -> DescentResult:
    base = _flat_loss(spec, theta, data, scale)
    grad_norm = float(np.linalg.norm(_flat_gradient(spec, theta, data, scale)))
    rng = seed.generator()
    random_directions = rng.standard_normal((tolerances.descent_directions, theta.size))
    random_directions /= np.linalg.norm(random_directions, axis=1, keepdims=True)
    directions = list(seed_directions) + list(random_directions)
    slack = 1e-12 * (1.0 + abs(base))
    for direction in directions:
        for sign in (1.0, -1.0):
            for step in tolerances.step_schedule():
                decrease = _flat_loss(spec, theta + sign * step * direction, data, scale) - base
                if decrease < -(2.0 * step * grad_norm + slack):
                    return DescentResult(found=True, directions_tried=len(directions),
                                         direction=sign * direction, step=float(step), decrease=float(decrease))
    return DescentResult(found=False, directions_tried=len(directions))


def descent_direction_search(spec: NetworkSpec, w: WeightSet, data: Dataset, cfg: LossConfig,
                             tolerances: Tolerances = Tolerances(), seed: RngSeed = RngSeed(0),
                             hessian: Optional[HessianEstimate] = None) -> DescentResult:
    """Look for a direction along which the loss drops by more than its gradient can explain.

    Candidates are the Hessian eigenvectors with eigenvalue below eig_tol (when a Hessian
    is given) followed by seeded random unit directions, each probed with both signs over
    a geometric step schedule.
    """
    _require_variant(cfg, LossVariant.EXPECTED_OUTPUT)
    _check(spec, w, data)
    seeded = []
    if hessian is not None:
        eig_tol = tolerances.eig_tol(hessian.eigenvalues)
        seeded = [hessian.eigenvectors[:, i] for i in np.flatnonzero(hessian.eigenvalues < eig_tol)]
    return _search(spec, w.flatten(), data, cfg.scale, tolerances, seed, seeded)


def classify_point(spec: NetworkSpec, w: WeightSet, data: Dataset, cfg: LossConfig,
                   tolerances: Tolerances = Tolerances(), seed: RngSeed = RngSeed(0),
                   iterations: int = 0, diagnostics: str = "") -> CriticalPointReport:
    """Classify ``w`` as not-critical, saddle, degenerate-saddle or local-min-candidate.

    Negative curvature that no probed direction turns into an actual loss decrease is
    reported as unresolved, with the curvature in the diagnostics.
    """
    _require_variant(cfg, LossVariant.EXPECTED_OUTPUT)
    _check(spec, w, data)
    _check_budget(spec, tolerances)
    theta = w.flatten()
    loss = _loss(w.layers, data.inputs, data.targets, cfg.scale)
    grad_norm = float(np.linalg.norm(_flat_gradient(spec, theta, data, cfg.scale)))
    grad_tol = tolerances.grad_tol(zero_loss(data))

    def report(classification: PointClass, eigs=(), eig_tol=math.nan, found=False,
               note: str = "") -> CriticalPointReport:
        return CriticalPointReport(theta=w, grad_norm=grad_norm, hessian_eigs=tuple(float(e) for e in eigs),
                                   classification=classification, loss=loss, grad_tol=grad_tol,
                                   eig_tol=eig_tol, descent_found=found, iterations=iterations,
                                   diagnostics="; ".join(part for part in (diagnostics, note) if part))

    if grad_norm > grad_tol:
        return report(PointClass.NOT_CRITICAL)

    hessian = _hessian(spec, theta, data, cfg.scale, tolerances.fd_step)
    eigs = hessian.eigenvalues
    eig_tol = tolerances.eig_tol(eigs)
    seeded = [hessian.eigenvectors[:, i] for i in np.flatnonzero(eigs < eig_tol)]
    descent = _search(spec, theta, data, cfg.scale, tolerances, seed, seeded)
    note = ""
    if eigs[0] < -eig_tol and not descent.found:
        note = f"negative curvature {eigs[0]:.3g} without a verified descent step"
        logger.warning("Point left unresolved: %s", note)
        classification = PointClass.UNRESOLVED
    elif eigs[0] < -eig_tol:
        classification = PointClass.SADDLE
    elif descent.found:
        classification = PointClass.DEGENERATE_SADDLE
    else:
        classification = PointClass.LOCAL_MIN_CANDIDATE
    logger.debug("Point classified %s (loss %.6g, |g| %.3g, min eig %.3g)",
                 classification.value, loss, grad_norm, eigs[0])
    return report(classification, eigs, eig_tol, descent.found, note)


def multistart_descent(spec: NetworkSpec, data: Dataset, cfg: LossConfig, scheme: InitScheme, starts: int,
                       seed: RngSeed, tolerances: Tolerances = Tolerances(),
                       max_iterations: int = DEFAULT_MAX_ITERATIONS,
                       workers: Optional[int] = None) -> MultistartResult:
    """Gradient descent from ``starts`` initializations drawn by ``scheme``, each endpoint classified.

    Start s draws its weights and its descent-search directions from stream
    ``seed.stream_id + s``; reports are returned in start order.
    """
    _require_variant(cfg, LossVariant.EXPECTED_OUTPUT)
    data.check_against(spec)
    _check_budget(spec, tolerances)
    if starts < 1:
        raise ValidationError("starts must be at least 1", str(starts))
    oracle = global_min_oracle(spec, data, cfg)
    grad_tol = tolerances.grad_tol(zero_loss(data))

    def run(start: int) -> CriticalPointReport:
        start_seed = RngSeed(seed.master_seed, (seed.stream_id + start) % UINT64_LIMIT)
        w0 = sample_weights(spec, scheme, start_seed)
        trace = gradient_descent(lambda t: _flat_loss(spec, t, data, cfg.scale),
                                 lambda t: _flat_gradient(spec, t, data, cfg.scale),
                                 w0.flatten(), grad_tol, max_iterations)
        diagnostics = ""
        if not trace.converged:
            reason = "line search stalled" if trace.stalled else "iteration cap reached"
            diagnostics = f"{reason} after {trace.iterations} iterations, |g| = {trace.grad_norm:.3e}"
        return classify_point(spec, WeightSet.from_flat(spec, trace.theta), data, cfg, tolerances,
                              start_seed, trace.iterations, diagnostics)

    reports = tuple(map_ordered(run, range(starts), workers))
    result = MultistartResult(reports=reports, oracle=oracle)
    logger.info("Multistart: %d starts, %d candidates, max gap to oracle %.3g",
                starts, len(result.candidates), result.max_candidate_gap)
    return result


def convexity_probe(spec: NetworkSpec, data: Dataset, cfg: LossConfig, probes: int, seed: RngSeed,
                    tolerances: Tolerances = Tolerances(), center: Optional[WeightSet] = None,
                    direction_layers: Optional[Sequence[int]] = None) -> ConvexityReport:
    """Second directional differences at random points along random directions.

    Points are ``center`` (zero when omitted) plus a Gaussian offset whose scale cycles
    through CURVATURE_SCALES. ``direction_layers`` (1-based) restricts directions to
    those layers.
    """
    _require_variant(cfg, LossVariant.EXPECTED_OUTPUT)
    data.check_against(spec)
    if probes < 1:
        raise ValidationError("probes must be at least 1", str(probes))
    origin = np.zeros(spec.parameter_count) if center is None else center.flatten()
    if center is not None:
        center.check_against(spec)
    mask = np.ones(spec.parameter_count, dtype=bool)
    if direction_layers is not None:
        mask[:] = False
        offsets = np.cumsum([0] + [rows * cols for rows, cols in spec.layer_shapes])
        for layer in direction_layers:
            if not 1 <= layer <= spec.hidden_depth + 1:
                raise ValidationError("Direction layer out of range", str(layer))
            mask[offsets[layer - 1]:offsets[layer]] = True

    rng = seed.generator()
    curvatures = np.empty(probes)
    for probe in range(probes):
        point = origin + CURVATURE_SCALES[probe % len(CURVATURE_SCALES)] * rng.standard_normal(origin.size)
        direction = rng.standard_normal(origin.size) * mask
        direction /= np.linalg.norm(direction)
        h = tolerances.fd_step * (1.0 + float(np.max(np.abs(point))))
        f0 = _flat_loss(spec, point, data, cfg.scale)
        curvatures[probe] = (_flat_loss(spec, point + h * direction, data, cfg.scale) - 2.0 * f0
                             + _flat_loss(spec, point - h * direction, data, cfg.scale)) / (h * h)
    eig_tol = tolerances.eig_tol(curvatures)
    report = ConvexityReport(
        found_positive_curvature=bool(np.max(curvatures) > eig_tol),
        found_negative_curvature=bool(np.min(curvatures) < -eig_tol),
        max_curvature=float(np.max(curvatures)),
        min_curvature=float(np.min(curvatures)),
        probes=probes,
        eig_tol=eig_tol,
    )
    logger.info("Convexity probe over %d points: curvature in [%.4g, %.4g]",
                probes, report.min_curvature, report.max_curvature)
    return report


def synthetic_dataset(spec: NetworkSpec, patterns: int, seed: RngSeed, realizable_rank: Optional[int] = None,
                      cfg: Optional[LossConfig] = None) -> Dataset:
    """Seeded inputs uniform in [-alpha, alpha]; targets Gaussian, or exactly q rho A* x with rank(A*) <= rank."""
    if patterns < 1:
        raise ValidationError("patterns must be at least 1", str(patterns))
    inputs = seed.generator(lane=1).uniform(-spec.input_bound, spec.input_bound, (spec.input_dim, patterns))
    target_rng = seed.generator(lane=2)
    if realizable_rank is None:
        targets = target_rng.standard_normal((spec.output_dim, patterns))
    else:
        if realizable_rank < 1:
            raise ValidationError("realizable_rank must be at least 1", str(realizable_rank))
        scale = (cfg or LossConfig.for_spec(spec)).scale
        left = target_rng.standard_normal((spec.output_dim, realizable_rank))
        right = target_rng.standard_normal((realizable_rank, spec.input_dim))
        targets = scale * ((left @ right) @ inputs)
    return Dataset(inputs, targets)
