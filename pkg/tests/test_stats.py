"""Binomial confidence intervals: values, edge cases, and coverage."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchbind.stats import (
    EstimateWithCI,
    agresti_coull,
    escape_bias_bound,
    proportion_ci,
)


def test_interval_at_half():
    """50/100 at 95%: the adjusted-Wald interval is (0.4038, 0.5962)."""
    lo, hi = agresti_coull(50, 100)
    assert lo == pytest.approx(0.4038, abs=5e-5)
    assert hi == pytest.approx(0.5962, abs=5e-5)
    assert lo + hi == pytest.approx(1.0, rel=1e-12)  # symmetric at p = 1/2


def test_extremes_are_clamped():
    lo, hi = agresti_coull(0, 500)
    assert lo == 0.0
    assert 0.0 < hi < 0.02
    lo, hi = agresti_coull(500, 500)
    # The shrinkage cancels at the boundary up to rounding; clamping
    # guarantees hi <= 1.
    assert hi <= 1.0 and hi > 1.0 - 1e-12
    assert 0.98 < lo < 1.0


def test_narrower_at_lower_confidence():
    lo95, hi95 = agresti_coull(30, 200, alpha=0.05)
    lo50, hi50 = agresti_coull(30, 200, alpha=0.50)
    assert lo95 < lo50 < hi50 < hi95


@given(st.integers(min_value=1, max_value=10**7), st.data())
@settings(max_examples=200, deadline=None)
def test_interval_contains_point_estimate(trials, data):
    successes = data.draw(st.integers(min_value=0, max_value=trials))
    est = proportion_ci(successes, trials)
    assert 0.0 <= est.lo <= est.point <= est.hi <= 1.0
    assert est.trials == trials
    assert est.point == successes / trials


@given(
    st.integers(min_value=2, max_value=10**6),
    st.floats(min_value=0.001, max_value=0.5),
)
@settings(max_examples=100, deadline=None)
def test_interval_width_shrinks_with_trials(trials, alpha):
    successes = trials // 2
    lo1, hi1 = agresti_coull(successes, trials, alpha)
    lo2, hi2 = agresti_coull(2 * successes, 2 * trials, alpha)
    assert (hi2 - lo2) < (hi1 - lo1)


def test_validation():
    with pytest.raises(ValueError):
        agresti_coull(-1, 10)
    with pytest.raises(ValueError):
        agresti_coull(11, 10)
    with pytest.raises(ValueError):
        agresti_coull(5, 0)


def test_coverage_at_nominal_level():
    """Empirical 95% coverage over binomial replicates stays near nominal."""
    rng = np.random.default_rng(20260819)
    p_true, trials, reps = 0.3, 200, 4000
    draws = rng.binomial(trials, p_true, size=reps)
    covered = 0
    for x in draws:
        lo, hi = agresti_coull(int(x), trials)
        covered += lo <= p_true <= hi
    coverage = covered / reps
    assert 0.93 < coverage < 0.97


def test_escape_bias_bound():
    assert escape_bias_bound(2.0, 200.0) == pytest.approx(1e-6, rel=1e-12)
    with pytest.raises(ValueError):
        escape_bias_bound(5.0, 5.0)
    with pytest.raises(ValueError):
        escape_bias_bound(0.0, 5.0)


def test_estimate_with_ci_is_frozen():
    est = EstimateWithCI(point=0.5, lo=0.4, hi=0.6, alpha=0.05, trials=10)
    with pytest.raises(AttributeError):
        est.point = 0.7
