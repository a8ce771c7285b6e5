"""Kinetic Monte Carlo estimator of the 5D capacitance factor chi.

The binding problem for two rotating patchy molecules reduces to a capture
problem for a standard Brownian motion in five dimensionless coordinates
``(z, x_A, y_A, x_B, y_B)`` absorbed on a 4D region sitting in the plane
z = 0.  The capture probability from a uniformly sampled start point at
radius ``rho_start`` equals ``c0 / rho_start**3`` exactly (spherical
averaging cancels every multipole beyond the monopole), which turns a hit
count into the region's capacitance ``c0`` and hence the rate factor

    chi = (D_A*D_B + D_A + D_B) * c0 / 4.

Each trial alternates two exact-sampling stages:

- Stage 1 drops the walker onto the plane z = 0 through its first-passage
  law: t* = (z / erfc_inv(U))**2 / 4 and independent lateral Gaussian
  displacements of standard deviation sqrt(2 t*).
- Stage 2, from a plane point outside the region, jumps to a uniform point
  on the sphere of radius nu = stage2_distance(...) around it, the largest
  sphere guaranteed not to intersect the region.

A trial ends as a hit (stage-1 landing inside the region) or as an escape
(radius exceeding ``rho_inf``; the induced bias is bounded by
``(rho_start/rho_inf)**3``).

Scalar reference operations (driven by ``rng.PhiloxStream``) define the
per-trial draw contract; ``estimate_chi`` runs batches through a selected
backend whose outcomes are bit-identical to the reference loop.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .backend import get_backend
from .core import DerivedConstants, DiagnosticsError, Point5
from .rng import PhiloxStream
from .special import SQRT2, erfc_inv
from .stats import agresti_coull

__all__ = [
    "KmcConfig",
    "KmcResult",
    "sample_uniform_sphere5",
    "stage1_project",
    "stage2_distance",
    "run_trial",
    "estimate_chi",
    "stage1_displacement_radii",
]

_MASK64 = 0xFFFFFFFFFFFFFFFF
_CHUNK = 1 << 20


@dataclass(frozen=True)
class KmcConfig:
    """Monte Carlo run configuration for the 5D capacitance estimator.

    Parameters
    ----------
    trials : int
        Number of independent trials M.
    seed : int
        64-bit generator key; trial ``t`` uses the stream ``(seed, t)``.
    rho_start : float or None
        Start radius; None selects 2*rho0 at estimation time.  Must lie in
        (rho0, rho_inf).
    rho_inf : float
        Escape radius; escapes beyond it end the trial.
    alpha : float
        Confidence level parameter for the chi interval (two-sided 1-alpha).
    max_alternations : int
        Safety cap on stage alternations per trial; exceeding it is a
        diagnostics failure, never a silent hit or escape.
    """

    trials: int
    seed: int = 0
    rho_start: float | None = None
    rho_inf: float = 1e5
    alpha: float = 0.05
    max_alternations: int = 10**9

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ValueError("trials must be an integer >= 1")
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        object.__setattr__(self, "seed", self.seed & _MASK64)
        if self.rho_start is not None and not self.rho_start > 0.0:
            raise ValueError("rho_start must be positive")
        if not self.rho_inf > 0.0:
            raise ValueError("rho_inf must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if not isinstance(self.max_alternations, int) or self.max_alternations < 1:
            raise ValueError("max_alternations must be an integer >= 1")

    def resolve_rho_start(self, d: DerivedConstants) -> float:
        """Concrete start radius for a geometry; validates the ordering."""
        rho_start = 2.0 * d.rho0 if self.rho_start is None else self.rho_start
        if not d.rho0 < rho_start < self.rho_inf:
            raise ValueError(
                f"need rho0 < rho_start < rho_inf, got rho0={d.rho0!r}, "
                f"rho_start={rho_start!r}, rho_inf={self.rho_inf!r}"
            )
        return rho_start


@dataclass(frozen=True)
class KmcResult:
    """Outcome of a capacitance run.

    ``c0 = rho_start**3 * p_kmc`` and
    ``chi = (D_A*D_B + D_A + D_B) * c0 / 4``; ``ci_lo``/``ci_hi`` bound chi.
    """

    hits: int
    trials: int
    p_kmc: float
    c0: float
    chi: float
    ci_lo: float
    ci_hi: float


def sample_uniform_sphere5(radius: float, rng: PhiloxStream) -> Point5:
    """Uniform point on the 5D sphere of given radius (normalized Gaussians).

    Consumes five draws (more on the measure-zero all-zero resample).
    """
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    while True:
        g0 = rng.gaussian()
        g1 = rng.gaussian()
        g2 = rng.gaussian()
        g3 = rng.gaussian()
        g4 = rng.gaussian()
        nrm2 = g0 * g0 + g1 * g1 + g2 * g2 + g3 * g3 + g4 * g4
        if nrm2 > 0.0:
            break
    f = radius / math.sqrt(nrm2)
    return Point5(g0 * f, g1 * f, g2 * f, g3 * f, g4 * f)


def stage1_project(pt: Point5, rng: PhiloxStream) -> Point5:
    """Project a bulk point onto z = 0 through the exact first-passage law.

    Draws the first-passage time t* = (z / erfc_inv(U))**2 / 4 and adds
    independent lateral Gaussian displacements of standard deviation
    sqrt(2 t*) to the four in-plane coordinates.  Consumes five draws.
    """
    if pt.z == 0.0:
        raise ValueError("stage 1 requires a point off the plane (z != 0)")
    U = rng.uniform()
    e = float(erfc_inv(U))
    q = pt.z / e
    tt = 0.25 * q * q
    sd = math.sqrt(tt + tt)
    return Point5(
        0.0,
        pt.x_a + sd * rng.gaussian(),
        pt.y_a + sd * rng.gaussian(),
        pt.x_b + sd * rng.gaussian(),
        pt.y_b + sd * rng.gaussian(),
    )


def stage2_distance(d: DerivedConstants, pt: Point5) -> float:
    """Radius of the largest sphere around a plane point clear of the region.

    nu = max(d1, d2 / sqrt(1 + s**2)) with d1 and d2 the signed distances to
    the two disk boundaries; positive whenever the point is outside the
    region.
    """
    qa = pt.x_a * pt.x_a + pt.y_a * pt.y_a
    ub = pt.x_b - d.s * pt.x_a
    vb = pt.y_b - d.s * pt.y_a
    qb = ub * ub + vb * vb
    d1 = math.sqrt(qa) - d.r1
    d2 = math.sqrt(qb) - d.r2
    if d1 <= 0.0 and d2 <= 0.0:
        raise ValueError(
            "stage 2 called for a point inside the absorbing region "
            f"(d1={d1!r}, d2={d2!r})"
        )
    inv = 1.0 / math.sqrt(1.0 + d.s * d.s)
    nu = d2 * inv
    if d1 > nu:
        nu = d1
    return nu


def run_trial(d: DerivedConstants, cfg: KmcConfig, rng: PhiloxStream) -> str:
    """Run one trial sequentially; returns ``"hit"`` or ``"escape"``.

    Reference implementation of the per-trial loop: consumes draws from
    ``rng`` in exactly the order the batch backends do, so a
    ``PhiloxStream(seed, t)`` reproduces backend trial ``t`` bit for bit.
    """
    rho_start = cfg.resolve_rho_start(d)
    r1sq = d.r1 * d.r1
    r2sq = d.r2 * d.r2
    rho_inf2 = cfg.rho_inf * cfg.rho_inf
    inv = 1.0 / math.sqrt(1.0 + d.s * d.s)

    pt = sample_uniform_sphere5(rho_start, rng)
    for _ in range(cfg.max_alternations):
        pt = stage1_project(pt, rng)
        qa = pt.x_a * pt.x_a + pt.y_a * pt.y_a
        ub = pt.x_b - d.s * pt.x_a
        vb = pt.y_b - d.s * pt.y_a
        qb = ub * ub + vb * vb
        if qa < r1sq and qb < r2sq:
            return "hit"
        d1 = math.sqrt(qa) - d.r1
        d2 = math.sqrt(qb) - d.r2
        nu = d2 * inv
        if d1 > nu:
            nu = d1
        # A point exactly on the rim (float measure zero) enters the open
        # region immediately almost surely.
        if nu <= 0.0:
            return "hit"
        jump = sample_uniform_sphere5(nu, rng)
        pt = Point5(
            jump.z,
            pt.x_a + jump.x_a,
            pt.y_a + jump.y_a,
            pt.x_b + jump.x_b,
            pt.y_b + jump.y_b,
        )
        rho2 = (
            pt.z * pt.z
            + pt.x_a * pt.x_a
            + pt.y_a * pt.y_a
            + pt.x_b * pt.x_b
            + pt.y_b * pt.y_b
        )
        if rho2 > rho_inf2:
            return "escape"
    raise DiagnosticsError(
        f"trial exceeded {cfg.max_alternations} stage alternations"
    )


def _run_outcome_batches(fn, trials, threads, args, trial_offset=0):
    """Run outcome-filling batches over [trial_offset, trial_offset+trials).

    Chunk boundaries are fixed (independent of thread count) and outcomes
    are accumulated by integer sums, so the aggregate is identical for any
    worker count.  Returns (hits, escapes, capped).
    """
    spans = [
        (trial_offset + lo, trial_offset + min(lo + _CHUNK, trials))
        for lo in range(0, trials, _CHUNK)
    ]

    def one(span):
        t0, t1 = span
        out = np.empty(t1 - t0, dtype=np.uint8)
        fn(t0, t1, *args, out)
        counts = np.bincount(out, minlength=3)
        return int(counts[1]), int(counts[0]), int(counts[2])

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, spans))
    else:
        results = [one(sp) for sp in spans]
    hits = sum(r[0] for r in results)
    escapes = sum(r[1] for r in results)
    capped = sum(r[2] for r in results)
    return hits, escapes, capped


def estimate_chi(
    d: DerivedConstants,
    cfg: KmcConfig,
    threads: int = 1,
    backend: str | None = None,
    trial_offset: int = 0,
) -> KmcResult:
    """Estimate chi from ``cfg.trials`` Monte Carlo trials.

    Parameters
    ----------
    d : DerivedConstants
        Geometry of the absorbing region.
    cfg : KmcConfig
        Run configuration.
    threads : int
        Worker threads; any value yields the identical result.
    backend : str or None
        ``"compiled"``, ``"python"``, or None for the best available.
    trial_offset : int
        First global trial index (streams are addressed by global index, so
        disjoint offsets give independent sub-runs under one seed).

    Returns
    -------
    KmcResult
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if trial_offset < 0:
        raise ValueError("trial_offset must be >= 0")
    rho_start = cfg.resolve_rho_start(d)
    backend_mod = get_backend(backend)
    inv = 1.0 / math.sqrt(1.0 + d.s * d.s)
    args = (
        cfg.seed, d.r1, d.r2, d.s, inv, rho_start, cfg.rho_inf,
        cfg.max_alternations,
    )
    hits, _escapes, capped = _run_outcome_batches(
        backend_mod.kmc5d_trials, cfg.trials, threads, args, trial_offset
    )
    if capped:
        raise DiagnosticsError(
            f"{capped} of {cfg.trials} trials exhausted the "
            f"{cfg.max_alternations}-alternation budget"
        )
    p_kmc = hits / cfg.trials
    disc = d.D_A * d.D_B + d.D_A + d.D_B
    scale = disc * (rho_start * rho_start * rho_start) / 4.0
    p_lo, p_hi = agresti_coull(hits, cfg.trials, cfg.alpha)
    chi = scale * p_kmc
    return KmcResult(
        hits=hits,
        trials=cfg.trials,
        p_kmc=p_kmc,
        c0=rho_start * rho_start * rho_start * p_kmc,
        chi=chi,
        ci_lo=min(scale * p_lo, chi),
        ci_hi=max(scale * p_hi, chi),
    )


def stage1_displacement_radii(
    n: int, z: float, seed: int, backend: str | None = None
) -> np.ndarray:
    """Radial lateral displacements of n independent stage-1 projections.

    The exact law of the radius from height z has CDF
    ``F(r) = 1 - z / sqrt(z**2 + r**2)`` (the planar hitting law of Brownian
    motion is bivariate Cauchy with scale z); used by distribution tests.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not z > 0.0:
        raise ValueError("z must be positive")
    pairs = get_backend(backend).stage1_pair_samples(0, n, seed & _MASK64, z)
    dx = pairs[:, 0]
    dy = pairs[:, 1]
    return np.sqrt(dx * dx + dy * dy)
