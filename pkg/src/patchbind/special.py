"""Shared special functions: normal quantile and inverse complementary error.

A single quantile implementation (``ndtri``, the Cephes-derived normal
inverse CDF shipped with scipy) backs every transformation in the package:
Gaussian draws, the stage-1 first-passage-time inversion, and the
confidence-interval z value.  The compiled backend calls the same C symbol
through ``scipy.special.cython_special``, so both backends produce
bit-identical values.

``erfc_inv`` is defined by the exact identity

    erfc(x) = 2 * Phi(-x * sqrt(2))   =>   erfc_inv(u) = -ndtri(u / 2) / sqrt(2)

with the division written explicitly so the compiled backend can mirror the
operation order.  Accuracy (absolute error below 1e-12 across
u in (1e-300, 2 - 1e-16)) is pinned by an arbitrary-precision test.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

__all__ = ["erfc_inv", "z_quantile", "SQRT2"]

SQRT2 = 1.4142135623730951


def erfc_inv(u):
    """Inverse of the complementary error function on (0, 2).

    Vectorized; returns +inf/-inf at the endpoints 0 and 2 and NaN outside.
    """
    return -ndtri(np.asarray(u, dtype=np.float64) / 2.0) / SQRT2


def z_quantile(alpha: float) -> float:
    """Two-sided standard-normal critical value z_{alpha/2}.

    Equals the (1 - alpha/2) normal quantile, computed through the shared
    inverse-erfc so every module uses one quantile implementation.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return float(SQRT2 * erfc_inv(alpha))
