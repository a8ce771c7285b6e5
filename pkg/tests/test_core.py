"""Model parameters, derived constants, and the 5D absorbing region."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchbind.core import (
    DiagnosticsError,
    ModelParams,
    Point5,
    SingularGeometryError,
    derive_constants,
    derive_constants_from_D,
    region_contains,
    stokes_einstein_model,
    stokes_einstein_params,
)

_D_RANGE = st.floats(min_value=1e-6, max_value=1e4)


def test_equal_unit_mobilities_exact_constants():
    """At D_A = D_B = 1 every constant has a closed form."""
    d = derive_constants_from_D(1.0, 1.0)
    s3 = math.sqrt(3.0)
    assert d.lambda_A == math.sqrt(2.0)
    assert d.lambda_B == math.sqrt(2.0)
    assert d.c11 == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-15)
    assert d.c21 == pytest.approx(1.0 / (math.sqrt(2.0) * s3), rel=1e-15)
    assert d.c22 == pytest.approx(-math.sqrt(2.0) / s3, rel=1e-15)
    assert d.s == pytest.approx(1.0 / s3, rel=1e-15)
    assert d.r1 == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-15)
    assert d.r2 == pytest.approx(math.sqrt(2.0) / s3, rel=1e-15)


def test_dimensionless_groups_from_physical_parameters():
    p = ModelParams(
        R_A=1.0, R_B=2.0, Dtr_A=0.3, Dtr_B=0.2, Drot_A=0.4, Drot_B=0.0,
        Dsurf_A=0.9, Dsurf_B=0.18,
    )
    assert p.R == 3.0
    assert p.Dtr == 0.5
    assert p.Deff_A == pytest.approx(0.4 + 0.9 / 9.0, rel=1e-15)
    assert p.Deff_B == pytest.approx(0.02, rel=1e-15)
    d = derive_constants(p)
    assert d.D_A == pytest.approx(9.0 * p.Deff_A / 0.5, rel=1e-15)
    assert d.D_B == pytest.approx(9.0 * 0.02 / 0.5, rel=1e-15)


@given(_D_RANGE, _D_RANGE)
@settings(max_examples=200, deadline=None)
def test_combination_constants_identity(D_A, D_B):
    """c11^2 c22^2 (D_A D_B + D_A + D_B) = 1 for every mobility pair."""
    d = derive_constants_from_D(D_A, D_B)
    disc = D_A * D_B + D_A + D_B
    assert d.c11**2 * d.c22**2 * disc == pytest.approx(1.0, rel=1e-12)
    assert d.lambda_A == math.sqrt(1.0 + D_A)
    assert d.lambda_B == math.sqrt(1.0 + D_B)
    # c21/c11 stays positive, c22 negative: the region offset has fixed sign.
    assert d.s > 0 and d.c22 < 0 and d.r1 > 0 and d.r2 > 0


@given(
    _D_RANGE,
    _D_RANGE,
    st.floats(min_value=0.1, max_value=5.0),
    st.floats(min_value=0.1, max_value=5.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=6.283185307179586),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=6.283185307179586),
)
@settings(max_examples=200, deadline=None)
def test_circumscribing_radius_contains_region(D_A, D_B, a_A, a_B, u1, t1, u2, t2):
    """Every region point lies within rho0 of the origin."""
    d = derive_constants_from_D(D_A, D_B, a_A, a_B)
    # Sample the region's closure: disk 1 scaled by u1, riding disk by u2.
    xa = u1 * d.r1 * math.cos(t1)
    ya = u1 * d.r1 * math.sin(t1)
    xb = d.s * xa + u2 * d.r2 * math.cos(t2)
    yb = d.s * ya + u2 * d.r2 * math.sin(t2)
    pt = Point5(0.0, xa, ya, xb, yb)
    assert pt.rho <= d.rho0 * (1.0 + 1e-12)
    if u1 < 0.999 and u2 < 0.999:
        assert region_contains(d, pt)


def test_circumscribing_radius_is_attained():
    """rho0 is tight: the extreme corner of the region reaches it."""
    d = derive_constants_from_D(0.7, 2.3, 1.3, 0.8)
    xa = d.r1
    xb = d.s * d.r1 + d.r2
    pt = Point5(0.0, xa, 0.0, xb, 0.0)
    assert pt.rho == pytest.approx(d.rho0, rel=1e-15)


def test_region_membership_boundaries_are_outside():
    d = derive_constants_from_D(1.0, 1.0)
    assert region_contains(d, Point5(0.0, 0.0, 0.0, 0.0, 0.0))
    assert not region_contains(d, Point5(1e-12, 0.0, 0.0, 0.0, 0.0))
    assert not region_contains(d, Point5(0.0, d.r1, 0.0, 0.0, 0.0))
    assert not region_contains(d, Point5(0.0, 0.0, 0.0, d.r2, 0.0))
    # Riding center: disk 2 is tested relative to s * (x_A, y_A).
    xa = 0.5 * d.r1
    assert region_contains(d, Point5(0.0, xa, 0.0, d.s * xa, 0.0))
    assert not region_contains(d, Point5(0.0, xa, 0.0, d.s * xa + d.r2, 0.0))


def test_singular_geometry_rejected():
    with pytest.raises(SingularGeometryError):
        derive_constants_from_D(0.0, 0.0)
    with pytest.raises(SingularGeometryError):
        derive_constants(ModelParams())  # all orientational mobilities default 0
    # One-sided mobility is fine.
    d = derive_constants_from_D(0.0, 2.0)
    assert d.lambda_A == 1.0


def test_stokes_einstein_pairs():
    D_A, D_B = stokes_einstein_params(1.0)
    assert D_A == D_B == 1.5
    D_A, D_B = stokes_einstein_params(0.5)
    assert D_A == pytest.approx(0.75 * 0.5 * 1.5, rel=1e-15)
    assert D_B == pytest.approx(0.75 * 2.0 * 3.0, rel=1e-15)
    with pytest.raises(ValueError):
        stokes_einstein_params(0.0)
    with pytest.raises(ValueError):
        stokes_einstein_params(1.5)
    d = stokes_einstein_model(0.25)
    assert d.D_A == pytest.approx(0.75 * 0.25 * 1.25, rel=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(R_A=0.0),
        dict(Dtr_B=-1.0),
        dict(Drot_A=-0.1),
        dict(eps=0.0),
        dict(eps=2.0),  # eps * a_A beyond pi/2
        dict(N_A=0),
        dict(N_B=2.5),
        dict(a_A=0.0),
    ],
)
def test_parameter_validation(kwargs):
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


def test_diagnostics_error_is_runtime_error():
    assert issubclass(DiagnosticsError, RuntimeError)
    assert issubclass(SingularGeometryError, ValueError)
