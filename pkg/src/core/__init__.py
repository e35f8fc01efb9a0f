"""Core computation package."""

from .initializers import check_containment, containment_sweep, sample_weights, support_interval, symmetry_audit
from .landscape import (
    bernoulli_variance_gap,
    classify_point,
    convexity_probe,
    descent_direction_search,
    end_to_end_matrix,
    expected_loss,
    expected_output,
    gradient,
    hessian_fd,
    monte_carlo_loss,
    multistart_descent,
    synthetic_dataset,
)
from .netmodel import enumerate_paths, forward_relu, path_is_active, path_sum_output
from .oracle import global_min_oracle
from .pathstats import (
    calibrate_clamp_tolerance,
    depth_decay_sweep,
    estimate_activation_prob,
    estimate_conditional_given_input,
    estimate_conditional_given_weights,
    independence_test,
    net_input_envelope,
    trial_outcomes,
)
from .proportions import wilson_estimate

__all__ = [
    "bernoulli_variance_gap",
    "calibrate_clamp_tolerance",
    "check_containment",
    "classify_point",
    "containment_sweep",
    "convexity_probe",
    "depth_decay_sweep",
    "descent_direction_search",
    "end_to_end_matrix",
    "enumerate_paths",
    "estimate_activation_prob",
    "estimate_conditional_given_input",
    "estimate_conditional_given_weights",
    "expected_loss",
    "expected_output",
    "forward_relu",
    "global_min_oracle",
    "gradient",
    "hessian_fd",
    "independence_test",
    "monte_carlo_loss",
    "multistart_descent",
    "net_input_envelope",
    "path_is_active",
    "path_sum_output",
    "sample_weights",
    "support_interval",
    "symmetry_audit",
    "synthetic_dataset",
    "trial_outcomes",
    "wilson_estimate",
]
