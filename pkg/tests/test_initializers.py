"""Tests for initialization schemes and support intervals."""

import math

import numpy as np
import pytest

from src.core.initializers import (
    _normal_draws,
    check_containment,
    containment_sweep,
    draw_entries,
    sample_weights,
    support_interval,
    symmetry_audit,
)
from src.exceptions import SamplingError, StructuralError, ValidationError
from src.models.initialization import FanMode, InitScheme, RngSeed, SchemeKind
from src.models.network import NetworkSpec


class TestInitScheme:
    """Test class for scheme tokens and override rules."""

    @pytest.mark.parametrize("token, kind, mode", [
        ("even-uniform", SchemeKind.EVEN_UNIFORM, FanMode.FAN_IN),
        ("he-normal", SchemeKind.HE_NORMAL, FanMode.FAN_IN),
        ("he-normal:fan-out", SchemeKind.HE_NORMAL, FanMode.FAN_OUT),
        ("glorot-uniform", SchemeKind.GLOROT_UNIFORM, FanMode.FAN_IN),
    ])
    def test_from_token(self, token, kind, mode):
        scheme = InitScheme.from_token(token)
        assert scheme.kind is kind
        assert scheme.fan_mode is mode

    def test_token_rendering(self):
        assert InitScheme(SchemeKind.HE_NORMAL).token == "he-normal:fan-in"
        assert InitScheme(SchemeKind.EVEN_TRUNCATED_NORMAL).token == "even-truncated-normal"

    def test_unknown_token(self):
        with pytest.raises(ValidationError):
            InitScheme.from_token("orthogonal")

    def test_overrides_only_for_even_kinds(self):
        with pytest.raises(ValidationError):
            InitScheme(SchemeKind.HE_NORMAL, per_neuron_overrides={(1, 0): SchemeKind.EVEN_UNIFORM})
        with pytest.raises(ValidationError):
            InitScheme(SchemeKind.EVEN_UNIFORM, per_neuron_overrides={(1, 0): SchemeKind.STANDARD_UNIFORM})

    def test_fan_out_only_for_he(self):
        with pytest.raises(ValidationError):
            InitScheme(SchemeKind.EVEN_UNIFORM, fan_mode=FanMode.FAN_OUT)


class TestRngSeed:
    """Test class for seed validation."""

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            RngSeed(-1)
        with pytest.raises(ValidationError):
            RngSeed(0, 1 << 64)
        with pytest.raises(ValidationError):
            RngSeed(1.5)

    def test_sub_streams_differ(self):
        seed = RngSeed(7)
        a = seed.generator(lane=1).random(4)
        b = seed.generator(lane=2).random(4)
        c = seed.child(1).generator(lane=1).random(4)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)
        np.testing.assert_array_equal(a, seed.generator(lane=1).random(4))


class TestSampleWeights:
    """Test class for weight sampling."""

    def test_even_uniform_support(self, seed):
        """Fan-in 100 keeps every weight in [-0.01, 0.01]."""
        spec = NetworkSpec((100, 100, 100, 3))
        w = sample_weights(spec, InitScheme(SchemeKind.EVEN_UNIFORM), seed)
        for layer in w.layers:
            assert np.max(np.abs(layer)) <= 0.01

    def test_standard_uniform_support(self, seed):
        spec = NetworkSpec((100, 50, 2))
        w = sample_weights(spec, InitScheme(SchemeKind.STANDARD_UNIFORM), seed)
        assert np.max(np.abs(w.layers[0])) <= 0.1
        assert np.max(np.abs(w.layers[1])) <= 1.0 / math.sqrt(50)

    def test_even_truncated_normal_support(self, seed):
        spec = NetworkSpec((10, 40, 40, 2))
        w = sample_weights(spec, InitScheme(SchemeKind.EVEN_TRUNCATED_NORMAL), seed)
        for layer, fan_in in zip(w.layers, (10, 40, 40)):
            assert np.max(np.abs(layer)) <= 1.0 / fan_in

    def test_glorot_support(self, seed):
        spec = NetworkSpec((30, 20, 5))
        w = sample_weights(spec, InitScheme(SchemeKind.GLOROT_UNIFORM), seed)
        assert np.max(np.abs(w.layers[0])) <= math.sqrt(6.0 / 50)
        assert np.max(np.abs(w.layers[1])) <= math.sqrt(6.0 / 25)

    def test_deterministic(self, seed):
        spec = NetworkSpec((4, 6, 6, 2))
        for kind in SchemeKind:
            a = sample_weights(spec, InitScheme(kind), seed)
            b = sample_weights(spec, InitScheme(kind), seed)
            for x, y in zip(a.layers, b.layers):
                np.testing.assert_array_equal(x, y)

    def test_override_rows_do_not_shift_other_draws(self, seed):
        """Overriding one neuron changes only that neuron's row."""
        spec = NetworkSpec((5, 6, 6, 2))
        base = sample_weights(spec, InitScheme(SchemeKind.EVEN_UNIFORM), seed)
        mixed = sample_weights(spec, InitScheme(SchemeKind.EVEN_UNIFORM,
                                                per_neuron_overrides={(2, 3): SchemeKind.EVEN_TRUNCATED_NORMAL}), seed)
        changed = np.any(base.layers[1] != mixed.layers[1], axis=1)
        assert changed.tolist() == [False, False, False, True, False, False]
        np.testing.assert_array_equal(base.layers[0], mixed.layers[0])
        np.testing.assert_array_equal(base.layers[2], mixed.layers[2])
        assert np.max(np.abs(mixed.layers[1][3])) <= 1.0 / 6

    def test_override_out_of_range(self, seed):
        scheme = InitScheme(SchemeKind.EVEN_UNIFORM, per_neuron_overrides={(4, 0): SchemeKind.EVEN_UNIFORM})
        with pytest.raises(StructuralError):
            sample_weights(NetworkSpec((2, 2, 1)), scheme, seed)

    def test_truncation_retry_cap(self, seed):
        """An impossible truncation exhausts the retry cap."""
        with pytest.raises(SamplingError):
            _normal_draws(seed.generator(), 10, std=1.0, bound=1e-9, retry_cap=3)

    @pytest.mark.slow
    def test_he_normal_variance(self, seed):
        """10^6 draws at fan-in 100 have variance within 1% of 0.02."""
        values = draw_entries(SchemeKind.HE_NORMAL, seed.generator(), 1_000_000, fan_in=100)
        assert np.var(values) == pytest.approx(0.02, rel=0.01)

    def test_he_normal_variance_reduced(self, seed):
        values = draw_entries(SchemeKind.HE_NORMAL, seed.generator(), 200_000, fan_in=100)
        assert np.var(values) == pytest.approx(0.02, rel=0.02)

    def test_he_normal_fan_out(self, seed):
        values = draw_entries(SchemeKind.HE_NORMAL, seed.generator(), 200_000, fan_in=100, fan_out=8,
                              fan_mode=FanMode.FAN_OUT)
        assert np.var(values) == pytest.approx(0.25, rel=0.02)


class TestSupportIntervals:
    """Test class for interval queries and containment."""

    def test_worked_example_at_100(self):
        even = support_interval(InitScheme(SchemeKind.EVEN_UNIFORM), 100)
        standard = support_interval(InitScheme(SchemeKind.STANDARD_UNIFORM), 100)
        he = support_interval(InitScheme(SchemeKind.HE_NORMAL), 100)
        assert (even.lo, even.hi) == pytest.approx((-0.01, 0.01))
        assert (standard.lo, standard.hi) == pytest.approx((-0.1, 0.1))
        assert round(he.hi, 3) == 0.424
        assert he.hi == pytest.approx(3 * math.sqrt(2) / 10)
        assert he.coverage == 0.9973
        assert even.coverage == 1.0

    def test_fan_in_one(self):
        even = support_interval(InitScheme(SchemeKind.EVEN_UNIFORM), 1)
        standard = support_interval(InitScheme(SchemeKind.STANDARD_UNIFORM), 1)
        assert (even.lo, even.hi) == (standard.lo, standard.hi) == (-1.0, 1.0)

    def test_symmetric(self):
        for kind in SchemeKind:
            interval = support_interval(InitScheme(kind), 17, 9)
            assert interval.lo == -interval.hi

    def test_glorot_needs_fan_out(self):
        with pytest.raises(ValidationError):
            support_interval(InitScheme(SchemeKind.GLOROT_UNIFORM), 10)

    def test_he_fan_out_uses_fan_out(self):
        interval = support_interval(InitScheme(SchemeKind.HE_NORMAL, FanMode.FAN_OUT), 100, 50)
        assert interval.hi == pytest.approx(3 * math.sqrt(2 / 50))

    @pytest.mark.parametrize("n", [1, 2, 100, 12345])
    def test_containment(self, n):
        report = check_containment(n)
        assert report.contained
        assert len(report.intervals) == 3

    def test_containment_sweep(self):
        """Every n in 1 .. 10^6 satisfies both inclusions."""
        sweep = containment_sweep(1_000_000)
        assert sweep.contained
        assert sweep.first_violation is None

    def test_sweep_rejects_zero(self):
        with pytest.raises(ValidationError):
            containment_sweep(0)


class TestSymmetryAudit:
    """Test class for the empirical symmetry audit."""

    def test_even_uniform_mean_bound(self, seed):
        """|mean| <= 3 * (1/n) / sqrt(3 * draws) at n = 10."""
        draws = 1_000_000
        audit = symmetry_audit(InitScheme(SchemeKind.EVEN_UNIFORM), 10, draws, seed)
        assert abs(audit.mean_estimate) <= 3 * 0.1 / math.sqrt(3 * draws)
        assert audit.mean_brackets_zero
        assert audit.balance_brackets_half

    def test_truncated_normal_sign_balance(self, seed):
        audit = symmetry_audit(InitScheme(SchemeKind.EVEN_TRUNCATED_NORMAL), 10, 100_000, seed)
        assert audit.balance_brackets_half
        assert audit.sign_balance.trials == 100_000

    @pytest.mark.parametrize("kind", [SchemeKind.EVEN_UNIFORM, SchemeKind.EVEN_TRUNCATED_NORMAL])
    def test_ks_symmetry(self, kind, seed):
        """w and -w are indistinguishable at 10^5 draws."""
        audit = symmetry_audit(InitScheme(kind), 25, 100_000, seed)
        assert audit.ks_pvalue > 1e-4

    def test_minimum_draws(self, seed):
        with pytest.raises(ValidationError):
            symmetry_audit(InitScheme(SchemeKind.EVEN_UNIFORM), 10, 9_999, seed)
