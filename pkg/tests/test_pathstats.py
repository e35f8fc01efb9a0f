"""Tests for the Monte Carlo path-activation experiments."""

import numpy as np
import pytest

import src.core.pathstats as pathstats
from src.core.initializers import sample_weights
from src.core.netmodel import default_probe_input, forward_relu, path_is_active
from src.core.pathstats import (
    calibrate_clamp_tolerance,
    depth_decay_sweep,
    estimate_activation_prob,
    estimate_conditional_given_input,
    estimate_conditional_given_weights,
    independence_test,
    net_input_envelope,
    trial_outcomes,
)
from src.core.proportions import ratio_interval, two_proportion_z, wilson_estimate
from src.exceptions import StructuralError, ValidationError
from src.models.initialization import InitScheme, RngSeed, SchemeKind
from src.models.network import NetworkSpec, PathId, WeightSet
from src.models.statistics import ClampSpec, ProportionEstimate, TrialPlan

TRIALS = 20_000


def make_plan(widths, scheme, trials=TRIALS, seed=RngSeed(42), x=None):
    spec = NetworkSpec(tuple(widths))
    vector = default_probe_input(spec.input_dim) if x is None else np.asarray(x, dtype=float)
    return TrialPlan(spec=spec, scheme=scheme, input=vector, path=PathId(0, (0,) * (spec.hidden_depth + 1)),
                     trials=trials, seed=seed)


class TestProportions:
    """Test class for the binomial helpers."""

    def test_wilson_brackets_estimate(self):
        estimate = wilson_estimate(30, 1000)
        assert estimate.ci_lo <= estimate.p_hat == 0.03 <= estimate.ci_hi
        assert estimate.z == 4.0

    def test_wilson_at_the_edges(self):
        none = wilson_estimate(0, 5000)
        assert none.ci_lo == 0.0 and none.ci_hi > 0.0
        every = wilson_estimate(5000, 5000)
        assert every.ci_hi == 1.0 and every.ci_lo < 1.0

    def test_wider_z_gives_wider_interval(self):
        narrow = wilson_estimate(500, 1000, z=2.0)
        wide = wilson_estimate(500, 1000, z=4.0)
        assert wide.ci_lo < narrow.ci_lo and wide.ci_hi > narrow.ci_hi

    def test_invalid_counts(self):
        with pytest.raises(ValidationError):
            wilson_estimate(11, 10)
        with pytest.raises(ValidationError):
            ProportionEstimate(successes=1, trials=10, p_hat=0.1, ci_lo=0.2, ci_hi=0.3, z=4.0)

    def test_ratio_interval_undefined_at_zero(self):
        ratio, lo, hi = ratio_interval(wilson_estimate(10, 1000), wilson_estimate(0, 1000))
        assert np.isnan(ratio) and lo == 0.0 and hi == np.inf

    def test_ratio_interval_brackets_ratio(self):
        ratio, lo, hi = ratio_interval(wilson_estimate(2500, 10_000), wilson_estimate(5000, 10_000))
        assert ratio == pytest.approx(0.5)
        assert lo < 0.5 < hi

    def test_degenerate_pool(self):
        assert two_proportion_z(wilson_estimate(0, 100), wilson_estimate(0, 200)) == (0.0, 1.0)


class TestTrialPlan:
    """Test class for plan validation."""

    def test_zero_input_rejected(self, even_uniform):
        with pytest.raises(ValidationError):
            make_plan((3, 4, 1), even_uniform, x=[0.0, 0.0, 0.0])

    def test_too_few_trials(self, even_uniform):
        with pytest.raises(ValidationError):
            make_plan((3, 4, 1), even_uniform, trials=999)

    def test_target(self, even_uniform):
        assert make_plan((3, 4, 4, 4, 1), even_uniform).target == 0.125


class TestTrialKernel:
    """Test class for the per-trial activity kernel against the full forward pass."""

    @staticmethod
    def reference_outcomes(plan, clamp=None):
        outcomes = []
        for trial in range(plan.trials):
            layers = [np.array(layer) for layer in
                      sample_weights(plan.spec, plan.scheme, pathstats.trial_seed(plan.seed, trial)).layers]
            if clamp is not None:
                for (layer, row, col), value in zip(plan.path.weight_positions(), clamp.values):
                    if value is not None:
                        layers[layer - 1][row, col] = value
            _, record = forward_relu(plan.spec, WeightSet(tuple(layers)), plan.input)
            outcomes.append(path_is_active(record, plan.path))
        return np.array(outcomes, dtype=bool)

    @pytest.mark.parametrize("scheme", [
        InitScheme(SchemeKind.EVEN_UNIFORM),
        InitScheme(SchemeKind.EVEN_TRUNCATED_NORMAL),
        InitScheme(SchemeKind.HE_NORMAL),
        InitScheme(SchemeKind.EVEN_UNIFORM, per_neuron_overrides={(1, 0): SchemeKind.EVEN_TRUNCATED_NORMAL}),
    ])
    def test_matches_forward_pass(self, scheme):
        plan = make_plan((5, 6, 6, 6, 1), scheme, trials=1500, seed=RngSeed(7, 123))
        np.testing.assert_array_equal(trial_outcomes(plan), self.reference_outcomes(plan))

    def test_matches_forward_pass_with_clamp(self, even_uniform):
        plan = make_plan((4, 8, 8, 1), even_uniform, trials=1500)
        clamp = ClampSpec.from_fractions(plan.spec, [1.0, -0.5, None])
        np.testing.assert_array_equal(trial_outcomes(plan, clamp=clamp), self.reference_outcomes(plan, clamp))

    def test_override_out_of_range_rejected(self):
        scheme = InitScheme(SchemeKind.EVEN_UNIFORM, per_neuron_overrides={(1, 9): SchemeKind.EVEN_TRUNCATED_NORMAL})
        with pytest.raises(StructuralError):
            estimate_activation_prob(make_plan((4, 4, 1), scheme, trials=1000))


class TestActivationProbability:
    """Test class for the unconditional activation probability."""

    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_contains_target(self, depth, even_uniform):
        plan = make_plan((8,) + (8,) * depth + (1,), even_uniform)
        estimate = estimate_activation_prob(plan)
        assert estimate.contains(2.0 ** -depth)

    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_width_free_at_width_two(self, depth, even_truncated):
        """The target holds at width 2 as well."""
        plan = make_plan((2,) + (2,) * depth + (1,), even_truncated)
        assert estimate_activation_prob(plan).contains(2.0 ** -depth)

    def test_deterministic_and_schedule_free(self, even_uniform):
        plan = make_plan((6, 6, 6, 1), even_uniform, trials=4000)
        serial = estimate_activation_prob(plan, workers=1)
        parallel = estimate_activation_prob(plan, workers=4)
        again = estimate_activation_prob(plan, workers=4)
        assert serial.successes == parallel.successes == again.successes

    def test_outcomes_match_count(self, even_uniform):
        plan = make_plan((5, 5, 1), even_uniform, trials=3000)
        outcomes = trial_outcomes(plan)
        assert outcomes.shape == (3000,)
        assert int(outcomes.sum()) == estimate_activation_prob(plan).successes

    def test_non_even_scheme_breaks_the_target(self, monkeypatch):
        """A nonnegative sampler with a positive input activates the path almost always."""
        def nonnegative_layers(spec, scheme, seed):
            rng = seed.generator()
            return (rng.uniform(0.0, 1.0 / cols, (rows, cols)) for rows, cols in spec.layer_shapes)

        monkeypatch.setattr(pathstats, "iter_layers", nonnegative_layers)
        plan = make_plan((4, 4, 1), InitScheme(SchemeKind.EVEN_UNIFORM), trials=5000, x=[0.5] * 4)
        estimate = estimate_activation_prob(plan)
        assert not estimate.contains(0.5)
        assert estimate.p_hat > 0.9

    def test_net_input_envelope(self, even_uniform):
        plan = make_plan((6, 8, 8, 1), even_uniform, trials=2000)
        envelope = net_input_envelope(plan)
        assert envelope.within_bound
        assert 0.0 < envelope.max_abs_net_input <= 1.0

    @pytest.mark.slow
    @pytest.mark.parametrize("kind", [SchemeKind.EVEN_UNIFORM, SchemeKind.EVEN_TRUNCATED_NORMAL])
    @pytest.mark.parametrize("width", [64, 2])
    def test_desk_reproduction(self, kind, width):
        """H = 1..4 at 10^5 trials: every 4-sigma interval contains 2^-H."""
        for depth in range(1, 5):
            plan = make_plan((width,) * (depth + 1) + (1,), InitScheme(kind), trials=100_000)
            assert estimate_activation_prob(plan).contains(2.0 ** -depth)

    @pytest.mark.slow
    def test_deep_network(self, even_uniform):
        plan = make_plan((4,) * 11 + (1,), even_uniform, trials=10_000_000)
        assert estimate_activation_prob(plan).contains(2.0 ** -10)


class TestConditionalGivenWeights:
    """Test class for clamped on-path weights."""

    def test_output_clamp_is_irrelevant(self, even_uniform):
        """Clamping only the output weight leaves the activity distribution unchanged."""
        plan = make_plan((6, 6, 1), even_uniform, trials=10_000)
        clamped_plan = make_plan((6, 6, 1), even_uniform, trials=10_000, seed=RngSeed(42, 1 << 48))
        clamp = ClampSpec((None, 0.9))
        a = estimate_activation_prob(plan)
        b = estimate_conditional_given_weights(clamped_plan, clamp)
        assert independence_test(a, b).passed

    def test_output_clamp_trial_identical(self, even_uniform):
        plan = make_plan((5, 5, 5, 1), even_uniform, trials=2000)
        free = trial_outcomes(plan)
        clamped = trial_outcomes(plan, clamp=ClampSpec((None, None, -0.3)))
        np.testing.assert_array_equal(free, clamped)

    def test_clamp_outside_support(self, even_uniform):
        plan = make_plan((4, 4, 1), even_uniform, trials=1000)
        with pytest.raises(ValidationError):
            estimate_conditional_given_weights(plan, ClampSpec((0.3, None)))
        with pytest.raises(ValidationError):
            estimate_conditional_given_weights(plan, ClampSpec((None, 2.0)), output_bound=1.0)
        with pytest.raises(ValidationError):
            estimate_conditional_given_weights(plan, ClampSpec((0.1,)))

    def test_from_fractions(self):
        spec = NetworkSpec((4, 8, 16, 1))
        clamp = ClampSpec.from_fractions(spec, [1.0, -1.0, None])
        assert clamp.values == (0.25, -0.125, None)

    def test_narrow_deviates_more_than_wide(self, even_uniform):
        """Extreme clamps bias a narrow network more than a wide one."""
        deviations = []
        for width in (4, 64):
            plan = make_plan((width, width, width, 1), even_uniform)
            clamp = ClampSpec.from_fractions(plan.spec, [1.0, 1.0, 1.0])
            estimate = estimate_conditional_given_weights(plan, clamp)
            deviations.append(abs(estimate.p_hat - 0.25))
        assert deviations[0] > deviations[1]

    def test_calibrated_tolerance(self, even_uniform):
        plan = make_plan((32, 32, 32, 1), even_uniform)
        fractions = [1.0, 1.0, 1.0]
        calibration = calibrate_clamp_tolerance(plan, fractions)
        assert calibration.calibration_width == 64
        estimate = estimate_conditional_given_weights(plan, ClampSpec.from_fractions(plan.spec, fractions))
        assert abs(estimate.p_hat - 0.25) <= calibration.tolerance

    @pytest.mark.slow
    def test_desk_reproduction(self, even_uniform):
        """Widths 256 stay within the calibrated tolerance; widths 4 deviate more."""
        fractions = [1.0, 1.0, 1.0]
        wide = make_plan((256, 256, 256, 1), even_uniform, trials=100_000)
        calibration = calibrate_clamp_tolerance(wide, fractions)
        estimate = estimate_conditional_given_weights(wide, ClampSpec.from_fractions(wide.spec, fractions))
        assert abs(estimate.p_hat - 0.25) <= calibration.tolerance
        narrow = make_plan((4, 4, 4, 1), even_uniform, trials=100_000)
        narrow_estimate = estimate_conditional_given_weights(narrow, ClampSpec.from_fractions(narrow.spec, fractions))
        assert abs(narrow_estimate.p_hat - 0.25) > abs(estimate.p_hat - 0.25)


class TestConditionalGivenInput:
    """Test class for conditioning on the input."""

    def test_halved_input_gives_identical_outcomes(self, even_uniform):
        plan = make_plan((5, 6, 6, 1), even_uniform, trials=3000)
        mu = np.array([0.7, -0.2, 0.4, -0.9, 0.1])
        np.testing.assert_array_equal(trial_outcomes(plan, mu), trial_outcomes(plan, 0.5 * mu))

    def test_two_inputs_at_depth_two(self, even_uniform):
        plan = make_plan((5, 8, 8, 1), even_uniform)
        for mu in ([0.9, 0.1, -0.3, 0.5, -0.7], [-0.2, -0.2, -0.2, 0.8, 0.0]):
            assert estimate_conditional_given_input(plan, mu).contains(0.25)

    def test_basis_input(self, even_uniform):
        plan = make_plan((4, 8, 1), even_uniform)
        assert estimate_conditional_given_input(plan, [1.0, 0.0, 0.0, 0.0]).contains(0.5)

    def test_zero_mu_rejected(self, even_uniform):
        plan = make_plan((3, 3, 1), even_uniform, trials=1000)
        with pytest.raises(ValidationError):
            estimate_conditional_given_input(plan, [0.0, 0.0, 0.0])

    @pytest.mark.slow
    def test_desk_reproduction(self, even_uniform):
        plan = make_plan((16, 64, 64, 1), even_uniform, trials=100_000)
        rng = np.random.default_rng(5)
        for _ in range(5):
            assert estimate_conditional_given_input(plan, rng.uniform(-1, 1, 16)).contains(0.25)


class TestIndependenceTest:
    """Test class for the two-proportion comparison."""

    def test_identical_estimates(self):
        estimate = wilson_estimate(5000, 20_000)
        report = independence_test(estimate, estimate)
        assert report.z_stat == 0.0
        assert report.passed

    def test_half_vs_quarter_fails(self):
        report = independence_test(wilson_estimate(50_000, 100_000), wilson_estimate(25_000, 100_000))
        assert not report.passed
        assert abs(report.z_stat) > 100

    def test_needs_enough_trials(self):
        with pytest.raises(ValidationError):
            independence_test(wilson_estimate(500, 1000), wilson_estimate(5000, 10_000))


class TestDepthSweep:
    """Test class for the depth decay sweep."""

    def test_halving_per_layer(self, even_uniform):
        sweep = depth_decay_sweep(NetworkSpec((8, 16, 1)), [1, 2, 3, 4], even_uniform, TRIALS, RngSeed(3))
        assert sweep.depths == (1, 2, 3, 4)
        for estimate, target in zip(sweep.estimates, sweep.targets()):
            assert estimate.contains(target)
        assert [ratio.depth for ratio in sweep.ratios] == [2, 3, 4]
        assert all(ratio.contains(0.5) for ratio in sweep.ratios)
        assert sweep.slope == pytest.approx(-1.0, abs=0.06)

    def test_single_depth_baseline(self, even_uniform):
        sweep = depth_decay_sweep(NetworkSpec((4, 8, 1)), [1], even_uniform, 5000, RngSeed(3))
        assert sweep.estimates[0].contains(0.5)
        assert sweep.ratios == ()
        assert np.isnan(sweep.slope)

    def test_rejects_gaps(self, even_uniform):
        with pytest.raises(ValidationError):
            depth_decay_sweep(NetworkSpec((4, 8, 1)), [1, 3], even_uniform, 1000, RngSeed(3))

    @pytest.mark.slow
    def test_desk_reproduction(self, even_uniform):
        sweep = depth_decay_sweep(NetworkSpec((64, 64, 1)), [1, 2, 3, 4], even_uniform, 100_000, RngSeed(11))
        assert all(ratio.contains(0.5) for ratio in sweep.ratios)
        assert abs(sweep.slope + 1.0) <= 0.05
