"""Closed-form global minimum of the expected-output loss by reduced-rank regression."""

import logging

import numpy as np

from ..exceptions import ValidationError
from ..models.landscape import LossConfig, OracleResult
from ..models.network import Dataset, NetworkSpec, WeightSet

logger = logging.getLogger("oracle")


def bottleneck_rank(spec: NetworkSpec) -> int:
    """Largest rank the end-to-end product W_{H+1} ... W_1 can reach."""
    return min(spec.widths)


def reduced_rank_fit(inputs: np.ndarray, targets: np.ndarray, rank: int) -> tuple[np.ndarray, np.ndarray]:
    """Best B of rank <= ``rank`` for min ||B X - Y||_F; returns (B, singular values of the OLS fit)."""
    if np.linalg.matrix_rank(inputs) < inputs.shape[0]:
        raise ValidationError("Inputs must have full row rank for the oracle",
                              f"rank {np.linalg.matrix_rank(inputs)} < {inputs.shape[0]}")
    solution, *_ = np.linalg.lstsq(inputs.T, targets.T, rcond=None)
    b_ols = solution.T
    fitted = b_ols @ inputs
    u, s, _ = np.linalg.svd(fitted, full_matrices=False)
    u_r = u[:, :rank]
    return u_r @ (u_r.T @ b_ols), s


def balanced_factors(spec: NetworkSpec, product: np.ndarray, rank: int) -> WeightSet:
    """Layers whose product is ``product``, each carrying S^(1/(H+1)) of its top-``rank`` SVD."""
    u, s, vt = np.linalg.svd(product, full_matrices=False)
    rank = min(rank, s.size)
    root = np.diag(s[:rank] ** (1.0 / (spec.hidden_depth + 1)))
    u_r, vt_r = u[:, :rank], vt[:rank]

    def embed(width: int) -> np.ndarray:
        return np.eye(width, rank)

    layers = [embed(spec.widths[1]) @ root @ vt_r]
    for k in range(2, spec.hidden_depth + 1):
        layers.append(embed(spec.widths[k]) @ root @ embed(spec.widths[k - 1]).T)
    layers.append(u_r @ root @ embed(spec.widths[spec.hidden_depth]).T)
    return WeightSet(tuple(layers))


def global_min_oracle(spec: NetworkSpec, data: Dataset, cfg: LossConfig) -> OracleResult:
    """min over rank-r maps A of 1/2 sum ||q rho A x_i - y_i||^2, with a witness WeightSet.

    r is the narrowest width of the network, including d_0 and d_y.
    """
    data.check_against(spec)
    rank = bottleneck_rank(spec)
    b, singular_values = reduced_rank_fit(data.inputs, data.targets, rank)
    residual = b @ data.inputs - data.targets
    min_loss = 0.5 * float(np.sum(residual ** 2))
    witness = balanced_factors(spec, b / cfg.scale, rank)
    logger.info("Oracle: rank %d, min loss %.10g", rank, min_loss)
    return OracleResult(min_loss=min_loss, witness=witness, rank=rank,
                        singular_values=tuple(float(value) for value in singular_values))
