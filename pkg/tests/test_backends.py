"""Backend selection and compiled/pure agreement.

The capacitance walks and frozen-orientation Brownian dynamics must agree
bit for bit between the compiled kernels and the vectorized Python fallback
(identical draws, identical arithmetic).  Rotating Brownian dynamics uses
each library's own sin/cos, which may differ in the last bit, so agreement
there is statistical.
"""

import math

import numpy as np
import pytest

from patchbind.backend import available_backends, default_backend_name, get_backend
from patchbind.bdsim import BdConfig, simulate_k0
from patchbind.core import ModelParams, derive_constants_from_D
from patchbind.kmc5d import KmcConfig, estimate_chi

_HAVE_COMPILED = "compiled" in available_backends()
needs_both = pytest.mark.skipif(
    not _HAVE_COMPILED, reason="compiled extension not built"
)


def test_backend_registry():
    names = available_backends()
    assert names["python"] is True
    assert default_backend_name() == ("compiled" if names.get("compiled") else "python")
    assert names[default_backend_name()] is True
    assert get_backend(None) is get_backend(default_backend_name())
    assert get_backend("python").__name__.endswith("pure")
    with pytest.raises(ValueError):
        get_backend("fortran")


def _kmc5d_args(trials):
    d = derive_constants_from_D(0.7, 1.3)
    inv = 1.0 / math.sqrt(1.0 + d.s * d.s)
    rho_start = 2.0 * d.rho0
    return (0, trials, 2024, d.r1, d.r2, d.s, inv, rho_start, 1e4, 10**9)


@needs_both
def test_kmc5d_outcomes_bit_identical():
    trials = 20_000
    args = _kmc5d_args(trials)
    outs = {}
    for name in ("python", "compiled"):
        buf = np.empty(trials, dtype=np.uint8)
        get_backend(name).kmc5d_trials(*args, buf)
        outs[name] = buf
    assert np.array_equal(outs["python"], outs["compiled"])
    assert set(np.unique(outs["python"])) <= {0, 1}
    assert outs["python"].sum() > 0  # some hits at this geometry


@needs_both
def test_kmc3d_outcomes_bit_identical():
    trials = 20_000
    outs = {}
    for name in ("python", "compiled"):
        buf = np.empty(trials, dtype=np.uint8)
        get_backend(name).kmc3d_trials(0, trials, 77, 0.25, 2.0, 1e4, 10**9, buf)
        outs[name] = buf
    assert np.array_equal(outs["python"], outs["compiled"])
    assert outs["python"].sum() > 0


@needs_both
def test_stage1_samples_bit_identical():
    a = get_backend("python").stage1_pair_samples(0, 5000, 99, 1.5)
    b = get_backend("compiled").stage1_pair_samples(0, 5000, 99, 1.5)
    assert np.array_equal(a, b)
    assert a.shape == (5000, 2)


@needs_both
def test_frozen_orientation_bd_bit_identical():
    """With no orientational motion the BD path avoids trig entirely."""
    params = ModelParams(eps=0.9, N_A=1, N_B=1)
    cfg = BdConfig(trials=1500, seed=11, R_inf=3.0, dt_small=1e-5)
    res_py = simulate_k0(params, cfg, backend="python")
    res_c = simulate_k0(params, cfg, backend="compiled")
    assert (res_py.bound, res_py.escaped) == (res_c.bound, res_c.escaped)
    assert res_py.estimate.point == res_c.estimate.point
    assert res_py.bound > 0


@needs_both
def test_rotating_bd_statistically_consistent():
    """sin/cos differ between libm and SIMD paths, so compare proportions."""
    params = ModelParams(Drot_A=1.0, Drot_B=1.0, eps=0.9, N_A=1, N_B=1)
    cfg = BdConfig(trials=1500, seed=5, R_inf=2.5, dt_small=1e-5)
    res_py = simulate_k0(params, cfg, backend="python")
    res_c = simulate_k0(params, cfg, backend="compiled")
    m = cfg.trials
    p1, p2 = res_py.bound / m, res_c.bound / m
    pooled = (res_py.bound + res_c.bound) / (2 * m)
    se = math.sqrt(max(2 * pooled * (1 - pooled) / m, 1e-12))
    assert abs(p1 - p2) <= 5 * se
    assert res_py.bound > 0 and res_c.bound > 0


def test_trial_ranges_compose():
    """Outcomes are a pure function of the global trial index."""
    backend = get_backend(None)
    trials = 4_000
    args = _kmc5d_args(trials)
    whole = np.empty(trials, dtype=np.uint8)
    backend.kmc5d_trials(*args, whole)
    split = np.empty(trials, dtype=np.uint8)
    backend.kmc5d_trials(0, 1000, *args[2:], split[:1000])
    backend.kmc5d_trials(1000, trials, *args[2:], split[1000:])
    assert np.array_equal(whole, split)


def test_estimate_chi_backend_equivalence():
    d = derive_constants_from_D(0.5, 0.5)
    cfg = KmcConfig(trials=30_000, seed=404)
    results = [
        estimate_chi(d, cfg, backend=name).hits for name in available_backends()
    ]
    assert len(set(results)) == 1
