"""Binomial interval and two-sample helpers shared by the Monte Carlo modules."""

import math

from scipy.stats import norm
from statsmodels.stats.proportion import (
    confint_proportions_2indep,
    proportion_confint,
    proportions_ztest,
)

from ..exceptions import ValidationError
from ..models.statistics import ProportionEstimate

DEFAULT_Z = 4.0


def alpha_for_z(z: float) -> float:
    """Two-sided tail mass outside +/- z standard deviations."""
    if not math.isfinite(z) or z <= 0:
        raise ValidationError("z must be a positive real", str(z))
    return float(2.0 * norm.sf(z))


def wilson_estimate(successes: int, trials: int, z: float = DEFAULT_Z) -> ProportionEstimate:
    """Proportion with its Wilson score interval at +/- z."""
    successes = int(successes)
    trials = int(trials)
    if trials < 1 or not 0 <= successes <= trials:
        raise ValidationError("Invalid success count", f"{successes}/{trials}")
    p_hat = successes / trials
    lo, hi = proportion_confint(successes, trials, alpha=alpha_for_z(z), method="wilson")
    return ProportionEstimate(
        successes=successes,
        trials=trials,
        p_hat=p_hat,
        ci_lo=float(max(0.0, min(lo, p_hat))),
        ci_hi=float(min(1.0, max(hi, p_hat))),
        z=float(z),
    )


def two_proportion_z(a: ProportionEstimate, b: ProportionEstimate) -> tuple[float, float]:
    """Pooled two-proportion z statistic and two-sided p-value.

    Degenerate pools (no successes or no failures at all) give z = 0.
    """
    pooled = (a.successes + b.successes) / (a.trials + b.trials)
    if pooled in (0.0, 1.0) or (a.successes * b.trials == b.successes * a.trials):
        return 0.0, 1.0
    z_stat, p_value = proportions_ztest([a.successes, b.successes], [a.trials, b.trials])
    return float(z_stat), float(p_value)


def ratio_interval(numerator: ProportionEstimate, denominator: ProportionEstimate,
                   z: float = DEFAULT_Z) -> tuple[float, float, float]:
    """Ratio p_num / p_den with a log-method interval; (nan, 0, inf) when undefined."""
    if numerator.successes == 0 or denominator.successes == 0:
        return math.nan, 0.0, math.inf
    ratio = numerator.p_hat / denominator.p_hat
    lo, hi = confint_proportions_2indep(
        numerator.successes, numerator.trials,
        denominator.successes, denominator.trials,
        method="log", compare="ratio", alpha=alpha_for_z(z),
    )
    return float(ratio), float(lo), float(hi)
