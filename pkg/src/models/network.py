"""Domain records of the deep ReLU network model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..exceptions import StructuralError, ValidationError


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture of a bias-free ReLU network with a linear output layer.

    ``widths`` lists d_0 ... d_{H+1}; the hidden depth H is implied by its length.
    """

    widths: tuple[int, ...]
    path_scale: float = 1.0
    input_bound: float = 1.0

    def __post_init__(self) -> None:
        widths = tuple(self.widths)
        if len(widths) < 3:
            raise ValidationError("A network needs an input, at least one hidden and an output layer",
                                  f"got widths {list(widths)}")
        for width in widths:
            if isinstance(width, bool) or not isinstance(width, (int, np.integer)) or width < 1:
                raise ValidationError("Every width must be a positive integer", f"got widths {list(widths)}")
        object.__setattr__(self, "widths", tuple(int(width) for width in widths))
        if not math.isfinite(self.path_scale) or self.path_scale <= 0:
            raise ValidationError("path_scale must be a positive finite real", str(self.path_scale))
        if not math.isfinite(self.input_bound) or self.input_bound <= 0:
            raise ValidationError("input_bound must be a positive finite real", str(self.input_bound))

    @classmethod
    def uniform(cls, input_dim: int, hidden_width: int, depth: int, output_dim: int,
                path_scale: float = 1.0, input_bound: float = 1.0) -> "NetworkSpec":
        """Network with ``depth`` hidden layers of equal width."""
        if depth < 1:
            raise ValidationError("Hidden depth must be at least 1", str(depth))
        widths = (input_dim,) + (hidden_width,) * depth + (output_dim,)
        return cls(widths, path_scale=path_scale, input_bound=input_bound)

    @property
    def hidden_depth(self) -> int:
        return len(self.widths) - 2

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    @property
    def output_dim(self) -> int:
        return self.widths[-1]

    @property
    def layer_shapes(self) -> list[tuple[int, int]]:
        """Shape (d_k, d_{k-1}) of W_k for k = 1 .. H+1."""
        return [(self.widths[k], self.widths[k - 1]) for k in range(1, len(self.widths))]

    @property
    def path_count(self) -> int:
        """Number of paths into a single output neuron, d_0 * ... * d_H."""
        return math.prod(self.widths[:-1])

    @property
    def parameter_count(self) -> int:
        return sum(rows * cols for rows, cols in self.layer_shapes)

    def check_input(self, x) -> np.ndarray:
        """Validate an input vector against d_0 and the input bound."""
        vector = np.asarray(x, dtype=float)
        if vector.shape != (self.input_dim,):
            raise StructuralError("Input has the wrong shape",
                                  f"expected ({self.input_dim},), got {vector.shape}")
        if not np.all(np.isfinite(vector)):
            raise ValidationError("Input contains non-finite values")
        if np.any(np.abs(vector) > self.input_bound):
            raise ValidationError("Input leaves the admissible interval",
                                  f"|x| <= {self.input_bound} required, max |x| = {np.max(np.abs(vector))}")
        return vector


@dataclass(frozen=True)
class WeightSet:
    """All weight matrices W_1 ... W_{H+1}; layer k has shape d_k x d_{k-1}."""

    layers: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        layers = tuple(_frozen_array(layer) for layer in self.layers)
        if not layers:
            raise StructuralError("A weight set needs at least one layer")
        for index, layer in enumerate(layers, start=1):
            if layer.ndim != 2:
                raise StructuralError(f"Layer {index} is not a matrix", f"ndim={layer.ndim}")
            if not np.all(np.isfinite(layer)):
                raise ValidationError(f"Layer {index} contains non-finite weights")
        for index in range(1, len(layers)):
            if layers[index].shape[1] != layers[index - 1].shape[0]:
                raise StructuralError("Consecutive layers do not chain",
                                      f"W_{index + 1} has {layers[index].shape[1]} columns, "
                                      f"W_{index} has {layers[index - 1].shape[0]} rows")
        object.__setattr__(self, "layers", layers)

    @classmethod
    def zeros(cls, spec: NetworkSpec) -> "WeightSet":
        return cls(tuple(np.zeros(shape) for shape in spec.layer_shapes))

    @classmethod
    def from_flat(cls, spec: NetworkSpec, theta) -> "WeightSet":
        """Inverse of ``flatten`` (row-major per layer, layers in order 1..H+1)."""
        vector = np.asarray(theta, dtype=float)
        if vector.shape != (spec.parameter_count,):
            raise StructuralError("Parameter vector has the wrong length",
                                  f"expected {spec.parameter_count}, got {vector.shape}")
        layers = []
        offset = 0
        for rows, cols in spec.layer_shapes:
            layers.append(vector[offset:offset + rows * cols].reshape(rows, cols))
            offset += rows * cols
        return cls(tuple(layers))

    def flatten(self) -> np.ndarray:
        return np.concatenate([layer.ravel() for layer in self.layers])

    @property
    def parameter_count(self) -> int:
        return sum(layer.size for layer in self.layers)

    def check_against(self, spec: NetworkSpec) -> None:
        shapes = [layer.shape for layer in self.layers]
        if shapes != spec.layer_shapes:
            raise StructuralError("Weight shapes do not match the network",
                                  f"expected {spec.layer_shapes}, got {shapes}")

    def replace_entry(self, layer: int, row: int, col: int, value: float) -> "WeightSet":
        """Copy with W_layer[row, col] set to ``value`` (layer is 1-based)."""
        layers = [np.array(matrix) for matrix in self.layers]
        layers[layer - 1][row, col] = value
        return WeightSet(tuple(layers))


@dataclass(frozen=True)
class Dataset:
    """Training patterns as columns: inputs d_x x m, targets d_y x m."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        inputs = _frozen_array(self.inputs)
        targets = _frozen_array(self.targets)
        if inputs.ndim != 2 or targets.ndim != 2:
            raise StructuralError("Inputs and targets must be matrices")
        if inputs.shape[1] != targets.shape[1] or inputs.shape[1] < 1:
            raise StructuralError("Inputs and targets must hold the same positive number of patterns",
                                  f"{inputs.shape[1]} vs {targets.shape[1]}")
        if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
            raise ValidationError("Dataset contains non-finite values")
        zero_columns = np.flatnonzero(~np.any(inputs != 0.0, axis=0))
        if zero_columns.size:
            raise ValidationError("Zero input patterns are not admissible",
                                  f"columns {zero_columns.tolist()}")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def count(self) -> int:
        return self.inputs.shape[1]

    def check_against(self, spec: NetworkSpec) -> None:
        if self.inputs.shape[0] != spec.input_dim or self.targets.shape[0] != spec.output_dim:
            raise StructuralError("Dataset dimensions do not match the network",
                                  f"need {spec.input_dim} x m inputs and {spec.output_dim} x m targets")
        if np.any(np.abs(self.inputs) > spec.input_bound):
            raise ValidationError("Dataset inputs leave the admissible interval",
                                  f"|x| <= {spec.input_bound} required")


@dataclass(frozen=True)
class PathId:
    """One input-to-output path: output neuron j and the chain (j_0, ..., j_H)."""

    output_neuron: int
    neuron_chain: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "output_neuron", int(self.output_neuron))
        object.__setattr__(self, "neuron_chain", tuple(int(index) for index in self.neuron_chain))

    def check_against(self, spec: NetworkSpec) -> None:
        if len(self.neuron_chain) != spec.hidden_depth + 1:
            raise StructuralError("Path length does not match the network depth",
                                  f"expected {spec.hidden_depth + 1} neurons, got {len(self.neuron_chain)}")
        if not 0 <= self.output_neuron < spec.output_dim:
            raise StructuralError("Output neuron out of range", str(self.output_neuron))
        for layer, index in enumerate(self.neuron_chain):
            if not 0 <= index < spec.widths[layer]:
                raise StructuralError(f"Neuron index out of range in layer {layer}", str(index))

    def weight_positions(self) -> list[tuple[int, int, int]]:
        """(layer, row, col) of the H+1 weights the path traverses, layer 1-based."""
        chain = self.neuron_chain + (self.output_neuron,)
        return [(k, chain[k], chain[k - 1]) for k in range(1, len(chain))]


@dataclass(frozen=True)
class ActivationRecord:
    """Net inputs U and activity flags (U > 0) of every hidden unit, per hidden layer."""

    unit_net_inputs: tuple[np.ndarray, ...]
    unit_active: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        net_inputs = tuple(_frozen_array(values) for values in self.unit_net_inputs)
        active = tuple(_frozen_array(flags, dtype=bool) for flags in self.unit_active)
        if len(net_inputs) != len(active):
            raise StructuralError("Net inputs and flags cover different layers")
        for values, flags in zip(net_inputs, active):
            if values.shape != flags.shape or not np.array_equal(flags, values > 0.0):
                raise StructuralError("Activity flags must equal (net input > 0)")
        object.__setattr__(self, "unit_net_inputs", net_inputs)
        object.__setattr__(self, "unit_active", active)

    @classmethod
    def from_net_inputs(cls, net_inputs: Sequence[np.ndarray]) -> "ActivationRecord":
        return cls(tuple(net_inputs), tuple(values > 0.0 for values in net_inputs))

    @property
    def hidden_depth(self) -> int:
        return len(self.unit_net_inputs)
