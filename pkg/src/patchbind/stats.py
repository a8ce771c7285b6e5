"""Binomial proportion confidence intervals and Monte Carlo error budgets."""

from __future__ import annotations

from dataclasses import dataclass

from .special import z_quantile

__all__ = ["EstimateWithCI", "agresti_coull", "escape_bias_bound"]


@dataclass(frozen=True)
class EstimateWithCI:
    """A point estimate with a two-sided confidence interval.

    ``lo <= point <= hi`` always holds; for raw proportions the bounds are
    clamped to [0, 1].
    """

    point: float
    lo: float
    hi: float
    alpha: float
    trials: int


def agresti_coull(successes: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    """Adjusted-Wald binomial interval for a success proportion.

    With ``p_hat = successes / trials`` and ``z`` the two-sided normal
    critical value:

        p_pm = (p_hat + z^2/(2M) +- z * sqrt((p_hat(1-p_hat) + z^2/(4M)) / M))
               / (1 + z^2/M)

    The raw bounds are clamped to [0, 1].  Note that at the extremes the
    formula's shrinkage cancels: successes = M gives exactly hi = 1 and
    successes = 0 gives exactly lo = 0; the interval shrinks strictly only
    on the interior side.  Callers composing intervals with point estimates
    should still clamp the ordering lo <= point <= hi.

    Returns
    -------
    (lo, hi) : tuple of float
    """
    if not (isinstance(trials, int) and trials >= 1):
        raise ValueError(f"trials must be a positive integer, got {trials}")
    if not (isinstance(successes, int) and 0 <= successes <= trials):
        raise ValueError(
            f"successes must be an integer in [0, {trials}], got {successes}"
        )
    z = z_quantile(alpha)
    m = float(trials)
    p_hat = successes / m
    z2 = z * z
    center = p_hat + z2 / (2.0 * m)
    half = z * ((p_hat * (1.0 - p_hat) + z2 / (4.0 * m)) / m) ** 0.5
    denom = 1.0 + z2 / m
    lo = (center - half) / denom
    hi = (center + half) / denom
    # At the extremes the shrinkage cancels algebraically (center == half for
    # zero successes), leaving only a few-ulp rounding residue of either
    # sign; snap those bounds to their exact values.
    if successes == 0:
        lo = 0.0
    if successes == trials:
        hi = 1.0
    return max(0.0, lo), min(1.0, hi)


def proportion_ci(successes: int, trials: int, alpha: float = 0.05) -> EstimateWithCI:
    """Package a raw proportion with its interval as :class:`EstimateWithCI`."""
    lo, hi = agresti_coull(successes, trials, alpha)
    p_hat = successes / trials
    return EstimateWithCI(
        point=p_hat, lo=min(lo, p_hat), hi=max(hi, p_hat), alpha=alpha, trials=trials
    )


def escape_bias_bound(rho_start: float, rho_inf: float) -> float:
    """Upper bound on the relative escape-truncation bias, ``(rho_start/rho_inf)^3``.

    The 5D walk's hit probability truncated at the escape radius differs from
    the untruncated one by a term decaying like the cube of the radius ratio.
    """
    if not 0.0 < rho_start < rho_inf:
        raise ValueError(
            f"need 0 < rho_start < rho_inf, got ({rho_start}, {rho_inf})"
        )
    r = rho_start / rho_inf
    return r * r * r
