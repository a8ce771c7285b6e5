"""3D kinetic Monte Carlo capacitance of the two-disk lens region.

In the zero-rotation limit the binding problem reduces to ordinary 3D
diffusion toward the intersection ("lens") of two coplanar unit disks with
centers separated by ``s``.  The same two-stage walk as the 5D solver
estimates the lens's electrostatic capacitance ``c(s)`` from the capture
probability: in 3D the far field decays like ``c(s)/rho``, so
``c(s) = rho_start * p_kmc`` exactly when start points are sampled uniformly
on an enclosing origin-centered sphere.

The validation quantity is the capture probability of a slowly rotating pair
at leading order,

    P ~ (eps**3 / (4 R0)) * integral_0^2 c(s) s ds,

with the integral evaluated by the trapezoid rule on a uniform grid
(``c(2) = 0`` analytically at the closed endpoint).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import get_backend
from .core import DiagnosticsError
from .kmc5d import _run_outcome_batches
from .stats import EstimateWithCI, agresti_coull

__all__ = [
    "LensSpec",
    "lens_capacitance",
    "lens_profile",
    "lens_integral",
    "integral_from_profile",
    "zero_rotation_k0",
]

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class LensSpec:
    """Separation ``s`` in [0, 2) between unit-disk centers at (+-s/2, 0).

    The disks overlap for s < 2; the lens they intersect in vanishes at
    s = 2.  The lens's circumscribed radius is sqrt(1 - s**2/4), reached at
    the two tips on the y-axis.
    """

    s: float

    def __post_init__(self):
        if not 0.0 <= self.s < 2.0:
            raise ValueError(f"separation must lie in [0, 2), got {self.s!r}")

    @property
    def rho0(self) -> float:
        """Circumscribed radius of the lens."""
        return math.sqrt(1.0 - 0.25 * self.s * self.s)


def lens_capacitance(
    spec: LensSpec,
    trials: int,
    rho_inf: float = 1e5,
    seed: int = 0,
    rho_start: float | None = None,
    alpha: float = 0.05,
    threads: int = 1,
    backend: str | None = None,
    trial_offset: int = 0,
    max_alternations: int = 10**9,
) -> EstimateWithCI:
    """Estimate the lens capacitance ``c(s)`` from ``trials`` Monte Carlo walks.

    ``rho_start`` defaults to twice the lens's circumscribed radius; any
    value strictly between that radius and ``rho_inf`` estimates the same
    capacitance (far-field 1/rho decay).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if rho_start is None:
        rho_start = 2.0 * spec.rho0
    if not spec.rho0 < rho_start < rho_inf:
        raise ValueError(
            f"need lens radius < rho_start < rho_inf, got radius={spec.rho0!r}, "
            f"rho_start={rho_start!r}, rho_inf={rho_inf!r}"
        )
    backend_mod = get_backend(backend)
    args = (seed & _MASK64, 0.5 * spec.s, rho_start, rho_inf, max_alternations)
    hits, _escapes, capped = _run_outcome_batches(
        backend_mod.kmc3d_trials, trials, threads, args, trial_offset
    )
    if capped:
        raise DiagnosticsError(
            f"{capped} of {trials} trials exhausted the "
            f"{max_alternations}-alternation budget"
        )
    p_lo, p_hi = agresti_coull(hits, trials, alpha)
    point = rho_start * (hits / trials)
    return EstimateWithCI(
        point=point,
        lo=min(rho_start * p_lo, point),
        hi=max(rho_start * p_hi, point),
        alpha=alpha,
        trials=trials,
    )


def lens_profile(
    grid_n: int,
    trials_per_point: int,
    seed: int = 0,
    rho_inf: float = 1e5,
    alpha: float = 0.05,
    threads: int = 1,
    backend: str | None = None,
) -> tuple[np.ndarray, list[EstimateWithCI]]:
    """Capacitance estimates on the uniform separation grid over [0, 2].

    Grid point ``i`` consumes global trials
    ``[i * trials_per_point, (i+1) * trials_per_point)`` of the shared seed,
    so the profile is deterministic regardless of scheduling.  The closed
    endpoint s = 2 is the exact zero-capacitance point (no trials run).
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    svals = np.linspace(0.0, 2.0, grid_n)
    estimates: list[EstimateWithCI] = []
    for i, s in enumerate(svals):
        if s >= 2.0:
            estimates.append(
                EstimateWithCI(point=0.0, lo=0.0, hi=0.0, alpha=alpha, trials=0)
            )
            continue
        estimates.append(
            lens_capacitance(
                LensSpec(float(s)),
                trials_per_point,
                rho_inf=rho_inf,
                seed=seed,
                alpha=alpha,
                threads=threads,
                backend=backend,
                trial_offset=i * trials_per_point,
            )
        )
    return svals, estimates


def integral_from_profile(svals: np.ndarray, cvals: np.ndarray) -> float:
    """Trapezoid-rule value of the validation integral from a profile."""
    svals = np.asarray(svals, dtype=np.float64)
    cvals = np.asarray(cvals, dtype=np.float64)
    if svals.shape != cvals.shape or svals.ndim != 1 or svals.size < 2:
        raise ValueError("profile arrays must be equal-length 1D with >= 2 points")
    return float(np.trapezoid(cvals * svals, svals))


def lens_integral(
    grid_n: int,
    trials_per_point: int,
    seed: int = 0,
    rho_inf: float = 1e5,
    threads: int = 1,
    backend: str | None = None,
) -> float:
    """Trapezoid value of ``integral_0^2 c(s) s ds`` on a uniform grid."""
    svals, estimates = lens_profile(
        grid_n,
        trials_per_point,
        seed=seed,
        rho_inf=rho_inf,
        threads=threads,
        backend=backend,
    )
    cvals = np.array([e.point for e in estimates])
    return integral_from_profile(svals, cvals)


def zero_rotation_k0(eps: float, R0: float, integral: float) -> float:
    """Leading-order capture probability of a non-rotating pair from radius R0.

    Combines the cap-overlap probability (eps**2 at leading order), the
    overlap-separation density s/2, and the conditional capture probability
    eps*c(s)/(2*R0) into P = (eps**3 / (4*R0)) * integral, where ``integral``
    is the measured value of integral_0^2 c(s) s ds.
    """
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    if not R0 > 0.0:
        raise ValueError("R0 must be positive")
    if integral < 0.0:
        raise ValueError("integral must be nonnegative")
    return (eps * eps * eps) / (4.0 * R0) * integral
