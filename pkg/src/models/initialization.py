"""Initialization schemes, seeds and support-interval records."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

import numpy as np

from ..exceptions import ValidationError

UINT64_LIMIT = 1 << 64


class SchemeKind(str, Enum):
    EVEN_UNIFORM = "even-uniform"
    EVEN_TRUNCATED_NORMAL = "even-truncated-normal"
    STANDARD_UNIFORM = "standard-uniform"
    HE_NORMAL = "he-normal"
    GLOROT_UNIFORM = "glorot-uniform"

    @property
    def is_even(self) -> bool:
        return self in (SchemeKind.EVEN_UNIFORM, SchemeKind.EVEN_TRUNCATED_NORMAL)


class FanMode(str, Enum):
    FAN_IN = "fan-in"
    FAN_OUT = "fan-out"


@dataclass(frozen=True)
class RngSeed:
    """Seed pair that fully determines every sample drawn under it.

    Draws come from a Philox generator keyed by ``(master_seed, stream_id)``.
    Sub-streams (one per weight layer, one per overridden neuron row) are carved
    out of the 256-bit counter, so a draw never depends on how many other draws
    were taken before it.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValidationError(f"{name} must be an integer", repr(value))
            if not 0 <= int(value) < UINT64_LIMIT:
                raise ValidationError(f"{name} must fit in an unsigned 64-bit integer", str(value))
            object.__setattr__(self, name, int(value))

    def generator(self, lane: int = 0, row: int = 0) -> np.random.Generator:
        """Generator for sub-stream ``(lane, row)``.

        lane and row sit in the two middle counter words; the low word is left to
        the generator, so each sub-stream owns 2**64 blocks.
        """
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        counter = np.array([0, lane, row, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(counter=counter, key=key))

    def child(self, stream_id: int) -> "RngSeed":
        return RngSeed(self.master_seed, stream_id)


@dataclass(frozen=True)
class InitScheme:
    """One initialization scheme, optionally with per-neuron overrides for even kinds.

    Override keys are (layer, neuron) with layer 1-based (W_layer) and neuron the
    row of W_layer, i.e. the receiving unit.
    """

    kind: SchemeKind
    fan_mode: FanMode = FanMode.FAN_IN
    per_neuron_overrides: Mapping[tuple[int, int], SchemeKind] = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        object.__setattr__(self, "fan_mode", FanMode(self.fan_mode))
        overrides = {(int(layer), int(neuron)): SchemeKind(kind)
                     for (layer, neuron), kind in dict(self.per_neuron_overrides).items()}
        if overrides and not self.kind.is_even:
            raise ValidationError("Per-neuron overrides are only defined for even schemes",
                                  self.kind.value)
        for position, kind in overrides.items():
            if not kind.is_even:
                raise ValidationError("Overrides must use an even scheme", f"{position}: {kind.value}")
        if self.fan_mode is FanMode.FAN_OUT and self.kind is not SchemeKind.HE_NORMAL:
            raise ValidationError("fan_mode only applies to he-normal", self.kind.value)
        object.__setattr__(self, "per_neuron_overrides", overrides)

    @classmethod
    def from_token(cls, token: str) -> "InitScheme":
        """Parse 'even-uniform', 'he-normal:fan-out', ..."""
        name, _, mode = token.strip().partition(":")
        try:
            kind = SchemeKind(name)
            fan_mode = FanMode(mode) if mode else FanMode.FAN_IN
        except ValueError as e:
            raise ValidationError("Unknown scheme token", token) from e
        return cls(kind, fan_mode)

    @property
    def token(self) -> str:
        if self.kind is SchemeKind.HE_NORMAL:
            return f"{self.kind.value}:{self.fan_mode.value}"
        return self.kind.value

    @property
    def is_even(self) -> bool:
        return self.kind.is_even

    def kind_for(self, layer: int, neuron: int) -> SchemeKind:
        return self.per_neuron_overrides.get((layer, neuron), self.kind)


@dataclass(frozen=True)
class IntervalSummary:
    """Support (or 3-sigma) interval of a scheme at a given fan-in."""

    kind: SchemeKind
    fan_in: int
    lo: float
    hi: float
    coverage: float

    def contains(self, other: "IntervalSummary") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


@dataclass(frozen=True)
class ContainmentReport:
    even: IntervalSummary
    standard: IntervalSummary
    he: IntervalSummary
    contained: bool

    @property
    def intervals(self) -> list[IntervalSummary]:
        return [self.even, self.standard, self.he]


@dataclass(frozen=True)
class SweepResult:
    """Outcome of the exhaustive containment sweep over n = 1 .. max_fan_in."""

    max_fan_in: int
    first_violation: Optional[int]

    @property
    def contained(self) -> bool:
        return self.first_violation is None
