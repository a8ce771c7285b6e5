"""Closed-form rate formulas: values, limits, and invariants."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchbind import rates

_SQ2 = math.sqrt(2.0)


def test_k_smol_and_molar_conversion():
    assert rates.k_smol(1.0, 1.0) == pytest.approx(4.0 * math.pi, rel=1e-15)
    assert rates.k_smol(0.5, 2.0) == pytest.approx(4.0 * math.pi, rel=1e-15)
    # 4 pi nm^3/s in per-molar per-second units.
    assert rates.molar_convert(rates.k_smol(1.0, 1.0)) == pytest.approx(
        4.0 * math.pi * 6.02214076e23 / 1e24, rel=1e-12
    )
    with pytest.raises(ValueError):
        rates.k_smol(0.0, 1.0)
    with pytest.raises(ValueError):
        rates.molar_convert(-1.0)


def test_chi_closed_forms():
    # Equal unit mobilities: chi_qc = 2 lambda / 4 pi with lambda = sqrt 2.
    assert rates.chi_qc(_SQ2, _SQ2, 1.0, 1.0) == pytest.approx(
        2.0 * _SQ2 / (4.0 * math.pi), rel=1e-14
    )
    # Size factors enter as a_A a_B (a_A lambda_B + a_B lambda_A).
    assert rates.chi_qc(1.5, 2.5, 2.0, 3.0) == pytest.approx(
        2.0 * 3.0 * (2.0 * 2.5 + 3.0 * 1.5) / (4.0 * math.pi), rel=1e-14
    )
    with pytest.raises(ValueError):
        rates.chi_qc(0.9, 1.0, 1.0, 1.0)


@given(
    st.floats(min_value=1.0, max_value=100.0),
    st.floats(min_value=1.0, max_value=100.0),
    st.floats(min_value=0.01, max_value=10.0),
    st.floats(min_value=0.01, max_value=10.0),
)
@settings(max_examples=100, deadline=None)
def test_chi_variants_fixed_ratio(lam_a, lam_b, a_a, a_b):
    """The two closed forms differ by the constant pi / (2 sqrt 2)."""
    q = rates.chi_qc(lam_a, lam_b, a_a, a_b)
    b = rates.chi_berg(lam_a, lam_b, a_a, a_b)
    assert b / q == pytest.approx(math.pi / (2.0 * _SQ2), rel=1e-12)


def test_k0_asymptotic_scaling():
    chi = 0.2
    base = rates.k0_asymptotic(1e-2, 3, 4, chi)
    assert base == pytest.approx(1e-6 * 12 * chi, rel=1e-13)
    assert rates.k0_asymptotic(2e-2, 3, 4, chi) == pytest.approx(8 * base, rel=1e-12)
    assert rates.k0_asymptotic(1e-2, 3, 4, chi, ksmol=5.0) == pytest.approx(
        5 * base, rel=1e-13
    )


@given(
    st.floats(min_value=1e-4, max_value=0.2),
    st.integers(min_value=1, max_value=1000),
    st.integers(min_value=1, max_value=1000),
    st.floats(min_value=1.0, max_value=10.0),
    st.floats(min_value=1.0, max_value=10.0),
)
@settings(max_examples=150, deadline=None)
def test_k0_saturating_bounded_and_below_asymptotic(eps, n_a, n_b, lam_a, lam_b):
    chi = rates.chi_qc(lam_a, lam_b, 1.0, 1.0)
    k = rates.k0_saturating(eps, n_a, n_b, lam_a, lam_b, 1.0, 1.0, chi)
    assert 0.0 < k < 1.0
    assert k < rates.k0_asymptotic(eps, n_a, n_b, chi) * (1.0 + 1e-12)


def test_k0_saturating_reduces_to_asymptotic_at_small_eps():
    chi = rates.chi_qc(_SQ2, _SQ2, 1.0, 1.0)
    k = rates.k0_saturating(1e-5, 2, 3, _SQ2, _SQ2, 1.0, 1.0, chi)
    assert k == pytest.approx(rates.k0_asymptotic(1e-5, 2, 3, chi), rel=1e-3)


def test_k_bar_a_form_and_limits():
    x = _SQ2 * 7 * 1.3 * 0.01
    assert rates.k_bar_A(0.01, 7, 1.3, _SQ2) == pytest.approx(
        x / (math.pi + x), rel=1e-14
    )
    # Many sites: rate approaches the Smoluchowski limit from below.
    assert rates.k_bar_A(0.1, 10**9, 1.0, 1.0) == pytest.approx(1.0, abs=1e-7)
    assert rates.k_bar_A(0.1, 10**9, 1.0, 1.0) < 1.0


def test_surface_fraction_values_and_limits():
    # Two antipodal-size caps: 1 - cos^2(pi/4) = 1/2.
    assert rates.surface_fraction(1, math.pi / 2.0 - 1e-12) == pytest.approx(0.5, rel=1e-9)
    # Small-cap expansion f ~ N eps_a^2 / 4.
    f = rates.surface_fraction(7, 1e-5)
    assert f == pytest.approx(7 * 1e-10 / 4.0, rel=1e-6)
    # Saturation to full coverage.
    assert rates.surface_fraction(10**9, 0.1) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        rates.surface_fraction(0, 0.1)
    with pytest.raises(ValueError):
        rates.surface_fraction(1, 2.0)


@given(st.integers(min_value=1, max_value=10**6), st.floats(min_value=1e-6, max_value=1.5))
@settings(max_examples=100, deadline=None)
def test_surface_fraction_monotone_and_bounded(n, eps_a):
    f = rates.surface_fraction(n, eps_a)
    more_caps = rates.surface_fraction(n + 1, eps_a)
    wider_caps = rates.surface_fraction(n, min(eps_a * 1.01, 1.55))
    assert 0.0 < f <= 1.0
    assert more_caps >= f
    assert wider_caps >= f
    if f < 0.99:  # strictly monotone until double precision saturates at 1
        assert more_caps > f
        assert wider_caps > f


def test_k_geo_leading_order():
    k = rates.k_geo(1e-4, 3, 5, 1.0, 1.0)
    assert k == pytest.approx(15 * 1e-16 / 16.0, rel=1e-6)
    # Scales with both cap-size factors squared at leading order.
    assert rates.k_geo(1e-4, 3, 5, 2.0, 1.0) == pytest.approx(4 * k, rel=1e-6)


def test_k_eff_quasichemical_full_coverage_reductions():
    lam = 1.7
    # Both molecules fully covered: Smoluchowski limit.
    assert rates.k_eff_quasichemical(1.0, 1.0, 5, 5, lam, lam) == 1.0
    # One fully covered: exact one-sided reduction.
    f_a = 0.37
    r_a = (2.0 / math.pi) * lam * math.sqrt(12 * f_a)
    want = (r_a + f_a) / (r_a + 1.0)
    assert rates.k_eff_quasichemical(f_a, 1.0, 12, 99, lam, 2.9) == want
    assert rates.k_eff_quasichemical(1.0, f_a, 99, 12, 2.9, lam) == want


@given(
    st.floats(min_value=1e-6, max_value=0.999),
    st.floats(min_value=1e-6, max_value=0.999),
    st.integers(min_value=1, max_value=100),
    st.integers(min_value=1, max_value=100),
    st.floats(min_value=1.0, max_value=10.0),
    st.floats(min_value=1.0, max_value=10.0),
)
@settings(max_examples=150, deadline=None)
def test_k_eff_quasichemical_bounded(f_a, f_b, n_a, n_b, lam_a, lam_b):
    k = rates.k_eff_quasichemical(f_a, f_b, n_a, n_b, lam_a, lam_b)
    assert 0.0 < k <= 1.0


def test_trapping_rate_values_and_pole():
    assert rates.trapping_rate(0.0, 1.0, 1.0) == 0.0
    assert rates.trapping_rate(0.5, 2.0, 4.0) == pytest.approx(0.5, rel=1e-14)
    # Monotone divergence toward the perfectly absorbing limit.
    ks = [rates.trapping_rate(x, 1.0, 1.0) for x in (0.9, 0.99, 0.999999)]
    assert ks[0] < ks[1] < ks[2] and ks[2] > 1e5
    with pytest.raises(ValueError):
        rates.trapping_rate(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        rates.trapping_rate(-0.1, 1.0, 1.0)
