"""Closed-form binding-rate formulas.

All rate formulas live here as pure functions.  Unless a docstring says
otherwise, rates are *normalized*: the returned value is ``k / k_smol`` where
``k_smol = 4 pi Dtr R`` is the Smoluchowski rate for fully absorbing spheres.
Dimensional output is composed by multiplying with :func:`k_smol` (and, for
molar units, :func:`molar_convert`).

Overview of the rate hierarchy (small cap angle ``eps``, cap counts
``N_A, N_B``):

- ``k_geo = f_A * f_B``: the purely geometric rate (fraction of orientations
  aligned at contact); scales like ``eps^4``.
- ``k0 = eps^3 * N_A * N_B * chi``: the leading-order diffusive rate.  The
  orientation factor ``chi`` depends only on the dimensionless mobilities
  (and cap-size factors); it is what the 5D kinetic Monte Carlo solver
  estimates, and ``chi_qc``/``chi_berg`` are its closed-form approximations.
- ``k0_saturating``: a uniformly valid formula that saturates when either
  molecule's sites stop being limiting, interpolating between ``k0`` and the
  one-sided limit ``k_bar_A``.
- ``k_eff_quasichemical``: the quasi-chemical (six-state Markov) reduction,
  valid through large coverage fractions.
- ``trapping_rate``: converts any normalized rate into the equivalent Robin
  (partial-reactivity) boundary coefficient.
"""

from __future__ import annotations

import math

__all__ = [
    "AVOGADRO",
    "k_smol",
    "molar_convert",
    "surface_fraction",
    "chi_qc",
    "chi_berg",
    "k0_asymptotic",
    "k0_saturating",
    "k_bar_A",
    "k_eff_quasichemical",
    "trapping_rate",
    "k_geo",
]

AVOGADRO = 6.02214076e23

_PI = math.pi


def k_smol(Dtr: float, R: float) -> float:
    """Smoluchowski rate ``4 pi Dtr R`` (dimensional: length^3 / time)."""
    if not (Dtr > 0 and R > 0):
        raise ValueError(f"Dtr and R must be > 0, got ({Dtr}, {R})")
    return 4.0 * _PI * Dtr * R


def molar_convert(k: float) -> float:
    """Convert a rate in nm^3/s to M^-1 s^-1 (Avogadro per liter in nm^3)."""
    if k < 0:
        raise ValueError(f"rate must be >= 0, got {k}")
    return k * AVOGADRO / 1e24


def surface_fraction(N: int, eps_a: float) -> float:
    """Expected fraction of the sphere covered by N caps of angular radius ``eps_a``.

    Caps are placed independently and uniformly, so the uncovered fraction is
    ``cos^(2N)(eps_a / 2)`` and

        f = 1 - cos^(2N)(eps_a / 2)  ~  N * eps_a^2 / 4   (eps_a -> 0).
    """
    if not (isinstance(N, int) and N >= 1):
        raise ValueError(f"N must be a positive integer, got {N}")
    if not 0.0 < eps_a < _PI / 2:
        raise ValueError(f"eps_a must lie in (0, pi/2), got {eps_a}")
    return -math.expm1(2.0 * N * math.log(math.cos(eps_a / 2.0)))


def chi_qc(lambda_A: float, lambda_B: float, a_A: float, a_B: float) -> float:
    """Quasi-chemical closed-form approximation to the orientation factor chi."""
    if lambda_A < 1 or lambda_B < 1:
        raise ValueError("lambda_A and lambda_B must be >= 1")
    if a_A < 0 or a_B < 0:
        raise ValueError("a_A and a_B must be >= 0")
    return a_A * a_B * (a_A * lambda_B + a_B * lambda_A) / (4.0 * _PI)


def chi_berg(lambda_A: float, lambda_B: float, a_A: float, a_B: float) -> float:
    """Berg-style alternative to :func:`chi_qc` (denominator 8*sqrt(2)).

    The two differ by the constant factor ``chi_berg / chi_qc = pi / (2 sqrt 2)``.
    """
    if lambda_A < 1 or lambda_B < 1:
        raise ValueError("lambda_A and lambda_B must be >= 1")
    if a_A < 0 or a_B < 0:
        raise ValueError("a_A and a_B must be >= 0")
    return a_A * a_B * (a_A * lambda_B + a_B * lambda_A) / (8.0 * math.sqrt(2.0))


def k0_asymptotic(eps: float, N_A: int, N_B: int, chi: float, ksmol: float = 1.0) -> float:
    """Leading-order binding rate ``eps^3 * N_A * N_B * chi * ksmol``.

    With the default ``ksmol = 1`` the result is the normalized rate.
    """
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    if chi <= 0:
        raise ValueError(f"chi must be > 0, got {chi}")
    return eps**3 * N_A * N_B * chi * ksmol


def k0_saturating(
    eps: float,
    N_A: int,
    N_B: int,
    lambda_A: float,
    lambda_B: float,
    a_A: float,
    a_B: float,
    chi: float,
) -> float:
    """Normalized rate with site competition/saturation, in (0, 1).

        k0_bar / k_smol =
            eps^3 N_A N_B
            / (1/chi + eps^2 pi (N_A/(a_B lambda_B) + N_B/(lambda_A a_A))
               + eps^3 N_A N_B)

    Reduces to ``eps^3 N_A N_B chi`` as eps -> 0 and to :func:`k_bar_A` as
    N_B -> infinity.
    """
    if min(eps, lambda_A, lambda_B, a_A, a_B, chi) <= 0 or min(N_A, N_B) < 1:
        raise ValueError("all arguments must be positive (N_A, N_B >= 1)")
    top = eps**3 * N_A * N_B
    competition = eps**2 * _PI * (N_A / (a_B * lambda_B) + N_B / (lambda_A * a_A))
    return top / (1.0 / chi + competition + top)


def k_bar_A(eps: float, N_A: int, a_A: float, lambda_A: float) -> float:
    """Normalized rate when molecule B is fully covered in binding sites.

        k_bar_A / k_smol = lambda_A N_A a_A eps / (pi + lambda_A N_A a_A eps)
    """
    if min(eps, a_A, lambda_A) <= 0 or N_A < 1:
        raise ValueError("all arguments must be positive (N_A >= 1)")
    x = lambda_A * N_A * a_A * eps
    return x / (_PI + x)


def _r_factor(lambda_X: float, N_X: int, f_X: float) -> float:
    """Mixing ratio r_X = (2/pi) * lambda_X * sqrt(N_X * f_X)."""
    return (2.0 / _PI) * lambda_X * math.sqrt(N_X * f_X)


def k_eff_quasichemical(
    f_A: float,
    f_B: float,
    N_A: int,
    N_B: int,
    lambda_A: float,
    lambda_B: float,
) -> float:
    """Quasi-chemical normalized rate from coverage fractions f_A, f_B in (0, 1].

    With ``r_X = (2/pi) lambda_X sqrt(N_X f_X)`` and
    ``Lambda_X = f_X (r_X + 1) / (r_X + f_X)``:

        k_eff / k_smol = f_A f_B / (Lambda_A Lambda_B + psi),
        1/psi = 1/((1-Lambda_A)(1-Lambda_B))
              + 1/((1-Lambda_A)(Lambda_B-f_B))
              + 1/((1-Lambda_B)(Lambda_A-f_A)).

    The psi expression is singular at f_X = 1 (Lambda_X = 1 there), so full
    coverage is handled by the exact analytic reduction: at f_B = 1 the rate
    collapses to ``(r_A + f_A) / (r_A + 1)`` (and symmetrically for f_A = 1);
    at f_A = f_B = 1 the rate is the Smoluchowski value 1.
    """
    if not (0.0 < f_A <= 1.0 and 0.0 < f_B <= 1.0):
        raise ValueError(f"f_A and f_B must lie in (0, 1], got ({f_A}, {f_B})")
    if min(N_A, N_B) < 1 or min(lambda_A, lambda_B) < 1:
        raise ValueError("N_X must be >= 1 and lambda_X >= 1")
    if f_A == 1.0 and f_B == 1.0:
        return 1.0
    if f_B == 1.0:
        r_A = _r_factor(lambda_A, N_A, f_A)
        return (r_A + f_A) / (r_A + 1.0)
    if f_A == 1.0:
        r_B = _r_factor(lambda_B, N_B, f_B)
        return (r_B + f_B) / (r_B + 1.0)
    r_A = _r_factor(lambda_A, N_A, f_A)
    r_B = _r_factor(lambda_B, N_B, f_B)
    lam_A = f_A * (r_A + 1.0) / (r_A + f_A)
    lam_B = f_B * (r_B + 1.0) / (r_B + f_B)
    inv_psi = (
        1.0 / ((1.0 - lam_A) * (1.0 - lam_B))
        + 1.0 / ((1.0 - lam_A) * (lam_B - f_B))
        + 1.0 / ((1.0 - lam_B) * (lam_A - f_A))
    )
    return f_A * f_B / (lam_A * lam_B + 1.0 / inv_psi)


def trapping_rate(k_over_ksmol: float, Dtr: float, R: float) -> float:
    """Robin (partial-reactivity) coefficient equivalent to a normalized rate.

        kappa = (Dtr / R) * (k/k_smol) / (1 - k/k_smol)

    Diverges as the rate approaches the perfectly absorbing limit.
    """
    if not 0.0 <= k_over_ksmol < 1.0:
        raise ValueError(
            "k/k_smol must lie in [0, 1); the perfectly absorbing limit "
            f"k = k_smol has no finite trapping rate (got {k_over_ksmol})"
        )
    if not (Dtr > 0 and R > 0):
        raise ValueError(f"Dtr and R must be > 0, got ({Dtr}, {R})")
    return (Dtr / R) * k_over_ksmol / (1.0 - k_over_ksmol)


def k_geo(eps: float, N_A: int, N_B: int, a_A: float, a_B: float) -> float:
    """Normalized geometric rate ``f_A * f_B`` (aligned-at-contact fraction).

    Leading order ``eps^4 N_A N_B a_A^2 a_B^2 / 16``; far below the diffusive
    rate at small eps.
    """
    return surface_fraction(N_A, eps * a_A) * surface_fraction(N_B, eps * a_B)
