"""Layer-wise forward pass and path-decomposition view of the ReLU network."""

import itertools
import logging
from typing import Sequence

import numpy as np

from ..exceptions import CapacityError, StructuralError
from ..models.network import ActivationRecord, NetworkSpec, PathId, WeightSet

logger = logging.getLogger("netmodel")

ENUMERATION_CAP = 10**6


def forward_relu(spec: NetworkSpec, w: WeightSet, x) -> tuple[np.ndarray, ActivationRecord]:
    """Return psi(W_{H+1} phi(W_H ... phi(W_1 x))) and the record of hidden net inputs.

    The path scale q is not applied here.
    """
    w.check_against(spec)
    signal = spec.check_input(x)
    net_inputs = []
    for layer in w.layers[:-1]:
        net_input = layer @ signal
        net_inputs.append(net_input)
        signal = np.maximum(net_input, 0.0)
    output = w.layers[-1] @ signal
    return output, ActivationRecord.from_net_inputs(net_inputs)


def _check_capacity(spec: NetworkSpec, cap: int) -> None:
    if spec.path_count > cap:
        raise CapacityError("Path enumeration exceeds the cap",
                            f"{spec.path_count} paths requested, cap is {cap}")


def path_chains(spec: NetworkSpec, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Integer table of shape (Psi, H+1): one neuron chain per row, lexicographic order."""
    _check_capacity(spec, cap)
    grids = np.indices(spec.widths[:-1]).reshape(spec.hidden_depth + 1, -1)
    return grids.T.copy()


def enumerate_paths(spec: NetworkSpec, output_neuron: int, cap: int = ENUMERATION_CAP) -> list[PathId]:
    """Every path into ``output_neuron``, lexicographic in the neuron chain."""
    _check_capacity(spec, cap)
    if not 0 <= output_neuron < spec.output_dim:
        raise StructuralError("Output neuron out of range", str(output_neuron))
    ranges = [range(width) for width in spec.widths[:-1]]
    return [PathId(output_neuron, chain) for chain in itertools.product(*ranges)]


def _check_record(record: ActivationRecord, chain_length: int) -> None:
    if record.hidden_depth != chain_length - 1:
        raise StructuralError("Path does not belong to the recorded network",
                              f"record has {record.hidden_depth} hidden layers, "
                              f"path traverses {chain_length - 1}")


def path_is_active(record: ActivationRecord, path: PathId) -> bool:
    """True iff every hidden unit on the path has strictly positive net input."""
    _check_record(record, len(path.neuron_chain))
    for layer, flags in enumerate(record.unit_active, start=1):
        index = path.neuron_chain[layer]
        if not 0 <= index < flags.shape[0]:
            raise StructuralError(f"Neuron index out of range in hidden layer {layer}", str(index))
        if not flags[index]:
            return False
    return True


def path_activity(record: ActivationRecord, chains: np.ndarray) -> np.ndarray:
    """Vectorized ``path_is_active`` over a chain table."""
    _check_record(record, chains.shape[1])
    active = np.ones(chains.shape[0], dtype=bool)
    for layer, flags in enumerate(record.unit_active, start=1):
        active &= flags[chains[:, layer]]
    return active


def path_contributions(spec: NetworkSpec, w: WeightSet, x, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Array (d_y, Psi) of x[j_0] * prod_k w_{j_k j_{k-1}} per output neuron and path."""
    w.check_against(spec)
    vector = spec.check_input(x)
    chains = path_chains(spec, cap)
    shared = vector[chains[:, 0]].copy()
    for k, layer in enumerate(w.layers[:-1], start=1):
        shared *= layer[chains[:, k], chains[:, k - 1]]
    last = w.layers[-1][:, chains[:, -1]]
    return last * shared[np.newaxis, :]


def path_sum_output(spec: NetworkSpec, w: WeightSet, x, active: Sequence[bool], output_neuron: int,
                    cap: int = ENUMERATION_CAP) -> float:
    """q * sum over active paths of x[j_0] * prod w, in ``enumerate_paths`` order."""
    flags = np.asarray(active, dtype=bool)
    if flags.shape != (spec.path_count,):
        raise StructuralError("Activity vector length does not match the path count",
                              f"expected {spec.path_count}, got {flags.shape}")
    if not 0 <= output_neuron < spec.output_dim:
        raise StructuralError("Output neuron out of range", str(output_neuron))
    contributions = path_contributions(spec, w, x, cap)[output_neuron]
    return float(spec.path_scale * np.sum(contributions[flags]))


def default_probe_input(dim: int, bound: float = 1.0) -> np.ndarray:
    """Deterministic nonzero input with mixed signs, entries in [-bound, bound]."""
    return bound * np.cos(np.arange(1, dim + 1, dtype=float))
