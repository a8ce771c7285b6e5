"""Tests for the 5D kinetic Monte Carlo capacitance estimator."""

import math

import numpy as np
import pytest
from scipy.stats import kstest

from patchbind import kmc5d
from patchbind.backend import available_backends, get_backend
from patchbind.core import DiagnosticsError, Point5, derive_constants_from_D
from patchbind.kmc5d import (
    KmcConfig,
    estimate_chi,
    run_trial,
    sample_uniform_sphere5,
    stage1_displacement_radii,
    stage1_project,
    stage2_distance,
)
from patchbind.rng import PhiloxStream
from patchbind.special import erfc_inv, z_quantile

GEOM = derive_constants_from_D(0.5, 0.5)

Z95 = z_quantile(0.05)


def _se(result):
    """Standard error implied by a result's 95% confidence interval."""
    return (result.ci_hi - result.ci_lo) / (2.0 * Z95)


@pytest.fixture(scope="module")
def baseline():
    """One shared 150k-trial run at D_A = D_B = 1/2 with default geometry."""
    cfg = KmcConfig(trials=150_000, seed=7)
    return cfg, estimate_chi(GEOM, cfg)


# ---------------------------------------------------------------------------
# Scalar reference loop vs batch backends
# ---------------------------------------------------------------------------


def test_scalar_reference_matches_every_backend_bit_for_bit():
    d = derive_constants_from_D(0.7, 1.3)
    cfg = KmcConfig(trials=1, seed=2024, rho_inf=1e4)
    n = 3000
    scalar = np.array(
        [
            1 if run_trial(d, cfg, PhiloxStream(2024, t)) == "hit" else 0
            for t in range(n)
        ],
        dtype=np.uint8,
    )
    assert int(scalar.sum()) > 0

    inv = 1.0 / math.sqrt(1.0 + d.s * d.s)
    rho_start = 2.0 * d.rho0
    for name in available_backends():
        out = np.empty(n, dtype=np.uint8)
        get_backend(name).kmc5d_trials(
            0, n, 2024, d.r1, d.r2, d.s, inv, rho_start, 1e4, 10**9, out
        )
        assert np.array_equal(out, scalar), name


def test_run_trial_returns_only_hit_or_escape():
    d = derive_constants_from_D(0.7, 1.3)
    cfg = KmcConfig(trials=1, seed=3, rho_inf=1e3)
    outcomes = [run_trial(d, cfg, PhiloxStream(3, t)) for t in range(400)]
    assert set(outcomes) <= {"hit", "escape"}
    assert outcomes.count("hit") + outcomes.count("escape") == 400


# ---------------------------------------------------------------------------
# Stage operations
# ---------------------------------------------------------------------------


def test_sphere5_sample_has_requested_radius_and_replays():
    radius = 3.7
    pt = sample_uniform_sphere5(radius, PhiloxStream(99, 5))
    norm = math.sqrt(
        pt.z**2 + pt.x_a**2 + pt.y_a**2 + pt.x_b**2 + pt.y_b**2
    )
    assert norm == pytest.approx(radius, rel=1e-12)

    rng = PhiloxStream(99, 5)
    g = [rng.gaussian() for _ in range(5)]
    f = radius / math.sqrt(sum(v * v for v in g))
    assert pt == Point5(g[0] * f, g[1] * f, g[2] * f, g[3] * f, g[4] * f)


def test_sphere5_sample_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        sample_uniform_sphere5(0.0, PhiloxStream(0, 0))
    with pytest.raises(ValueError):
        sample_uniform_sphere5(-1.0, PhiloxStream(0, 0))


def test_stage1_project_replays_the_documented_draw_sequence():
    start = Point5(0.8, 0.1, -0.2, 0.3, 0.4)
    projected = stage1_project(start, PhiloxStream(123, 9))

    rng = PhiloxStream(123, 9)
    u = rng.uniform()
    e = float(erfc_inv(u))
    q = start.z / e
    tt = 0.25 * q * q
    sd = math.sqrt(tt + tt)
    expected = Point5(
        0.0,
        start.x_a + sd * rng.gaussian(),
        start.y_a + sd * rng.gaussian(),
        start.x_b + sd * rng.gaussian(),
        start.y_b + sd * rng.gaussian(),
    )
    assert projected == expected
    assert projected.z == 0.0


def test_stage1_project_requires_point_off_the_plane():
    with pytest.raises(ValueError):
        stage1_project(Point5(0.0, 1.0, 1.0, 1.0, 1.0), PhiloxStream(0, 0))


def test_stage2_distance_outside_first_disk_only():
    # Directly out along the first disk axis, riding the second disk center:
    # the second-disk distance is -r2 < 0 and the first dominates exactly.
    x_a = GEOM.r1 + 0.75
    pt = Point5(0.0, x_a, 0.0, GEOM.s * x_a, 0.0)
    assert stage2_distance(GEOM, pt) == pytest.approx(0.75, rel=1e-15)


def test_stage2_distance_outside_second_disk_only():
    # At the first disk center the second-disk clearance is scaled by
    # 1/sqrt(1 + s**2), the tilt factor of that disk's supporting plane.
    x_b = GEOM.r2 + 0.5
    pt = Point5(0.0, 0.0, 0.0, x_b, 0.0)
    inv = 1.0 / math.sqrt(1.0 + GEOM.s * GEOM.s)
    assert stage2_distance(GEOM, pt) == pytest.approx(0.5 * inv, rel=1e-15)


def test_stage2_distance_rejects_points_inside_the_region():
    x_a = 0.5 * GEOM.r1
    pt = Point5(0.0, x_a, 0.0, GEOM.s * x_a + 0.5 * GEOM.r2, 0.0)
    with pytest.raises(ValueError):
        stage2_distance(GEOM, pt)


# ---------------------------------------------------------------------------
# Alternation budget
# ---------------------------------------------------------------------------


def test_scalar_trial_surfaces_exhausted_alternation_budget():
    cfg = KmcConfig(trials=1, seed=2024, rho_inf=1e8, max_alternations=1)
    with pytest.raises(DiagnosticsError):
        run_trial(GEOM, cfg, PhiloxStream(2024, 0))


def test_estimate_chi_surfaces_exhausted_alternation_budget():
    cfg = KmcConfig(trials=200, seed=5, rho_inf=1e8, max_alternations=1)
    with pytest.raises(DiagnosticsError, match="alternation budget"):
        estimate_chi(GEOM, cfg)


# ---------------------------------------------------------------------------
# Estimator output
# ---------------------------------------------------------------------------


def test_result_fields_are_mutually_consistent(baseline):
    cfg, res = baseline
    rho_start = cfg.resolve_rho_start(GEOM)
    disc = GEOM.D_A * GEOM.D_B + GEOM.D_A + GEOM.D_B

    assert res.trials == cfg.trials
    assert 0 < res.hits < res.trials
    assert res.p_kmc == res.hits / res.trials
    assert res.c0 == pytest.approx(rho_start**3 * res.p_kmc, rel=1e-14)
    assert res.chi == pytest.approx(disc * res.c0 / 4.0, rel=1e-14)
    assert res.ci_lo <= res.chi <= res.ci_hi


def test_chi_lands_in_the_calibrated_band(baseline):
    # Long-run reference value for D_A = D_B = 1/2 with unit disk radii is
    # 0.21955 +/- 0.0005 (20M trials); a 150k-trial run has SE ~ 0.0054.
    _, res = baseline
    assert abs(res.chi - 0.21955) < 5.0 * _se(res)


def test_chi_is_invariant_to_the_start_radius(baseline):
    _, res = baseline
    cfg2 = KmcConfig(trials=150_000, seed=31, rho_start=1.5 * GEOM.rho0)
    res2 = estimate_chi(GEOM, cfg2)
    pooled = math.hypot(_se(res), _se(res2))
    assert abs(res.chi - res2.chi) < 4.0 * pooled


def test_chi_is_insensitive_to_the_escape_radius(baseline):
    cfg, res = baseline
    cfg2 = KmcConfig(trials=150_000, seed=71, rho_inf=50.0)
    res2 = estimate_chi(GEOM, cfg2)
    pooled = math.hypot(_se(res), _se(res2))
    bias = res.chi * (cfg.resolve_rho_start(GEOM) / cfg2.rho_inf) ** 3
    assert abs(res.chi - res2.chi) < 4.0 * pooled + bias


def test_threads_and_chunking_do_not_change_counts(monkeypatch):
    cfg = KmcConfig(trials=5000, seed=5)
    whole = estimate_chi(GEOM, cfg, threads=1)

    # Shrink the fixed batch size so a small run spans many chunks, then
    # check single- and multi-threaded aggregation against the unchunked run.
    monkeypatch.setattr(kmc5d, "_CHUNK", 1024)
    chunked1 = estimate_chi(GEOM, cfg, threads=1)
    chunked4 = estimate_chi(GEOM, cfg, threads=4)

    assert chunked1.hits == whole.hits
    assert chunked4.hits == whole.hits
    assert chunked4.chi == whole.chi


def test_disjoint_trial_offsets_compose(baseline):
    whole = estimate_chi(GEOM, KmcConfig(trials=4000, seed=11))
    head = estimate_chi(GEOM, KmcConfig(trials=1000, seed=11), trial_offset=0)
    tail = estimate_chi(
        GEOM, KmcConfig(trials=3000, seed=11), trial_offset=1000
    )
    assert whole.hits == head.hits + tail.hits


def test_estimate_chi_validates_threads_and_offset():
    cfg = KmcConfig(trials=10)
    with pytest.raises(ValueError):
        estimate_chi(GEOM, cfg, threads=0)
    with pytest.raises(ValueError):
        estimate_chi(GEOM, cfg, trial_offset=-1)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        {"trials": 0},
        {"trials": 2.5},
        {"trials": 10, "seed": 1.5},
        {"trials": 10, "rho_start": 0.0},
        {"trials": 10, "rho_inf": 0.0},
        {"trials": 10, "alpha": 0.0},
        {"trials": 10, "alpha": 1.0},
        {"trials": 10, "max_alternations": 0},
    ],
)
def test_config_rejects_invalid_fields(kwargs):
    with pytest.raises(ValueError):
        KmcConfig(**kwargs)


def test_config_masks_seed_to_64_bits():
    assert KmcConfig(trials=1, seed=-1).seed == 2**64 - 1
    assert KmcConfig(trials=1, seed=2**64).seed == 0


def test_resolve_rho_start_defaults_and_ordering():
    assert KmcConfig(trials=1).resolve_rho_start(GEOM) == 2.0 * GEOM.rho0
    with pytest.raises(ValueError):
        KmcConfig(trials=1, rho_start=0.5 * GEOM.rho0).resolve_rho_start(GEOM)
    with pytest.raises(ValueError):
        KmcConfig(trials=1, rho_start=50.0, rho_inf=10.0).resolve_rho_start(
            GEOM
        )


# ---------------------------------------------------------------------------
# Stage-1 displacement law
# ---------------------------------------------------------------------------


def test_displacement_radii_follow_the_planar_hitting_law():
    z = 1.0
    radii = stage1_displacement_radii(60_000, z, seed=2026)
    stat = kstest(radii, lambda r: 1.0 - z / np.sqrt(z * z + r * r)).statistic
    assert stat < 0.01


def test_displacement_radii_scale_linearly_with_height():
    # Doubling the height doubles every displacement exactly: the scale
    # enters through power-of-two multiplications that commute with rounding.
    base = stage1_displacement_radii(5000, 1.0, seed=8)
    doubled = stage1_displacement_radii(5000, 2.0, seed=8)
    assert np.array_equal(doubled, 2.0 * base)


def test_displacement_radii_validation():
    with pytest.raises(ValueError):
        stage1_displacement_radii(0, 1.0, seed=0)
    with pytest.raises(ValueError):
        stage1_displacement_radii(10, 0.0, seed=0)
    with pytest.raises(ValueError):
        stage1_displacement_radii(10, -1.0, seed=0)
