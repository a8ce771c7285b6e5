"""Euler-Maruyama Brownian-dynamics simulation of the full binding process.

Direct simulation used to cross-validate the asymptotic rate formulas: a
point particle (the relative position of the two molecules) diffuses outside
the reaction sphere of radius R while N_A + N_B spherical caps move on the
sphere's surface through independent surface diffusion and shared rigid
rotations.  A trial starts at radius R0 and ends *bound* when a step lands
the particle at ``|p| <= R`` with the contact direction inside both an A-cap
and a B-cap, or *escaped* at ``|p| >= R_inf``.

The normalized rate follows from inverting the splitting probability: with
``q`` the escape fraction, the capacitance estimate is

    C = (1 - q) R0 R_inf / (R_inf - q R0),        k0 / k_smol = C / R,

exact for the ideal process at any R_inf > R0 (the finite escape radius is
corrected, not ignored).

Adaptive time stepping: the small step is used only when the particle is
radially within ``proximity_factor * sqrt(2 Dtr dt_big)`` of the sphere AND
the directions are within
``proximity_factor * sqrt(2 max(Deff) dt_big) + eps (a_A + a_B)`` of both a
cap of A and a cap of B — elsewhere binding is impossible within one step and
the big step is statistically safe.

Scalar reference operations (``step``, ``contact_test``, ``reflect``,
``run_trial``) define the draw contract; ``simulate_k0`` runs batches
through the selected backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import get_backend
from .core import DiagnosticsError, ModelParams
from .kmc5d import _run_outcome_batches
from .rng import PhiloxStream
from .stats import EstimateWithCI, agresti_coull

__all__ = [
    "BdConfig",
    "BdResult",
    "SystemState",
    "initial_state",
    "step",
    "contact_test",
    "reflect",
    "run_trial",
    "simulate_k0",
    "estimate_k0",
]

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class BdConfig:
    """Brownian-dynamics run configuration.

    ``R0``/``R_inf`` default to 1.1 R and 10 R at simulation time; the
    ordering R < R0 < R_inf and dt_small < dt_big are enforced.
    """

    trials: int
    seed: int = 0
    R0: float | None = None
    R_inf: float | None = None
    dt_big: float = 1e-3
    dt_small: float = 1e-8
    proximity_factor: float = 3.0
    alpha: float = 0.05
    max_steps: int = 10**10

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ValueError("trials must be an integer >= 1")
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        object.__setattr__(self, "seed", self.seed & _MASK64)
        if not 0.0 < self.dt_small < self.dt_big:
            raise ValueError("need 0 < dt_small < dt_big")
        if not self.proximity_factor >= 0.0:
            raise ValueError("proximity_factor must be nonnegative")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if not isinstance(self.max_steps, int) or self.max_steps < 1:
            raise ValueError("max_steps must be an integer >= 1")

    def resolve_radii(self, R: float) -> tuple[float, float]:
        """Concrete (R0, R_inf) for reaction radius R, validated."""
        R0 = 1.1 * R if self.R0 is None else self.R0
        R_inf = 10.0 * R if self.R_inf is None else self.R_inf
        if not R < R0 < R_inf:
            raise ValueError(
                f"need R < R0 < R_inf, got R={R!r}, R0={R0!r}, R_inf={R_inf!r}"
            )
        return R0, R_inf


@dataclass
class SystemState:
    """Particle position plus cap-center unit vectors of both molecules."""

    particle: np.ndarray
    caps_a: np.ndarray
    caps_b: np.ndarray
    time: float = 0.0


@dataclass(frozen=True)
class BdResult:
    """Trial tallies and the normalized-rate estimate ``k0 / k_smol``."""

    bound: int
    escaped: int
    trials: int
    estimate: EstimateWithCI


# Step scales: single source of truth for the scalar ops and the batch
# driver, so both backends receive bit-identical sigma values.

def _sig_translate(Dtr: float, dt: float) -> float:
    return math.sqrt(2.0 * Dtr * dt)


def _sig_surface(Dsurf: float, R: float, dt: float) -> float:
    return math.sqrt(2.0 * (Dsurf / (R * R)) * dt)


def _sig_rotate(Drot: float, dt: float) -> float:
    return math.sqrt(2.0 * Drot * dt)


def _unit3(rng: PhiloxStream) -> tuple[float, float, float]:
    """Uniform unit vector from three normals (resampling exact zeros)."""
    while True:
        g0 = rng.gaussian()
        g1 = rng.gaussian()
        g2 = rng.gaussian()
        nrm2 = g0 * g0 + g1 * g1 + g2 * g2
        if nrm2 > 0.0:
            nrm = math.sqrt(nrm2)
            return g0 / nrm, g1 / nrm, g2 / nrm


def initial_state(params: ModelParams, R0: float, rng: PhiloxStream) -> SystemState:
    """Particle at radius R0 with uniform direction; caps i.i.d. uniform."""
    ux, uy, uz = _unit3(rng)
    particle = np.array([R0 * ux, R0 * uy, R0 * uz])
    caps_a = np.empty((params.N_A, 3))
    for i in range(params.N_A):
        caps_a[i] = _unit3(rng)
    caps_b = np.empty((params.N_B, 3))
    for i in range(params.N_B):
        caps_b[i] = _unit3(rng)
    return SystemState(particle=particle, caps_a=caps_a, caps_b=caps_b, time=0.0)


def _surface_substep(caps: np.ndarray, sig: float, rng: PhiloxStream) -> None:
    """Independent tangential Gaussian increment per cap, renormalized."""
    for i in range(caps.shape[0]):
        gx = rng.gaussian()
        gy = rng.gaussian()
        gz = rng.gaussian()
        cx, cy, cz = caps[i, 0], caps[i, 1], caps[i, 2]
        dot = gx * cx + gy * cy + gz * cz
        cx = cx + sig * (gx - dot * cx)
        cy = cy + sig * (gy - dot * cy)
        cz = cz + sig * (gz - dot * cz)
        nrm = math.sqrt(cx * cx + cy * cy + cz * cz)
        caps[i, 0] = cx / nrm
        caps[i, 1] = cy / nrm
        caps[i, 2] = cz / nrm


def _rotate_substep(caps: np.ndarray, sig: float, rng: PhiloxStream) -> None:
    """Shared rigid rotation Rx(w1) Ry(w2) Rz(w3), w ~ N(0, sig^2) i.i.d."""
    w1 = sig * rng.gaussian()
    w2 = sig * rng.gaussian()
    w3 = sig * rng.gaussian()
    c1, s1 = math.cos(w1), math.sin(w1)
    c2, s2 = math.cos(w2), math.sin(w2)
    c3, s3 = math.cos(w3), math.sin(w3)
    for i in range(caps.shape[0]):
        x, y, z = caps[i, 0], caps[i, 1], caps[i, 2]
        x, y = x * c3 - y * s3, x * s3 + y * c3
        x, z = x * c2 + z * s2, -(x * s2) + z * c2
        y, z = y * c1 - z * s1, y * s1 + z * c1
        caps[i, 0] = x
        caps[i, 1] = y
        caps[i, 2] = z


def step(
    state: SystemState, dt: float, params: ModelParams, rng: PhiloxStream
) -> SystemState:
    """Advance every sub-process by one Euler-Maruyama step of size dt.

    Order: particle translation; A-cap surface diffusion; shared A rotation;
    B-cap surface diffusion; shared B rotation.  Sub-processes with zero
    diffusivity are frozen and consume no draws.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    R = params.R
    p = state.particle.copy()
    caps_a = state.caps_a.copy()
    caps_b = state.caps_b.copy()
    sd = _sig_translate(params.Dtr, dt)
    p[0] = p[0] + sd * rng.gaussian()
    p[1] = p[1] + sd * rng.gaussian()
    p[2] = p[2] + sd * rng.gaussian()
    if params.Dsurf_A > 0.0:
        _surface_substep(caps_a, _sig_surface(params.Dsurf_A, R, dt), rng)
    if params.Drot_A > 0.0:
        _rotate_substep(caps_a, _sig_rotate(params.Drot_A, dt), rng)
    if params.Dsurf_B > 0.0:
        _surface_substep(caps_b, _sig_surface(params.Dsurf_B, R, dt), rng)
    if params.Drot_B > 0.0:
        _rotate_substep(caps_b, _sig_rotate(params.Drot_B, dt), rng)
    return SystemState(
        particle=p, caps_a=caps_a, caps_b=caps_b, time=state.time + dt
    )


def _max_dot(p: np.ndarray, caps: np.ndarray) -> float:
    best = p[0] * caps[0, 0] + p[1] * caps[0, 1] + p[2] * caps[0, 2]
    for i in range(1, caps.shape[0]):
        d = p[0] * caps[i, 0] + p[1] * caps[i, 1] + p[2] * caps[i, 2]
        if d > best:
            best = d
    return best


def contact_test(state: SystemState, params: ModelParams) -> bool:
    """True iff the particle direction lies inside an A-cap AND a B-cap.

    Uses the endpoint direction of the crossing step; the angular test
    ``angle(u, cap) < eps*a`` is evaluated as ``dot(p, cap) > |p| cos(eps*a)``.
    """
    p = state.particle
    pn = math.sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
    cos_aA = math.cos(params.eps * params.a_A)
    cos_aB = math.cos(params.eps * params.a_B)
    return (
        _max_dot(p, state.caps_a) > pn * cos_aA
        and _max_dot(p, state.caps_b) > pn * cos_aB
    )


def reflect(state: SystemState, R: float) -> SystemState:
    """Radial mirror at the reaction sphere: ``|p| -> 2R - |p|``."""
    p = state.particle
    pn = math.sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
    if pn == 0.0:
        raise ValueError("cannot reflect a particle at the origin")
    fac = (2.0 * R - pn) / pn
    return SystemState(
        particle=p * fac,
        caps_a=state.caps_a,
        caps_b=state.caps_b,
        time=state.time,
    )


def _gates(params: ModelParams, cfg: BdConfig) -> tuple[float, float, int]:
    """(radial_gate, cos_gate, ang_always) of the adaptive-dt rule."""
    radial_gate = cfg.proximity_factor * _sig_translate(params.Dtr, cfg.dt_big)
    deff = params.Deff_A
    if params.Deff_B > deff:
        deff = params.Deff_B
    ang_gate = cfg.proximity_factor * math.sqrt(
        2.0 * deff * cfg.dt_big
    ) + params.eps * (params.a_A + params.a_B)
    if ang_gate >= math.pi:
        return radial_gate, -2.0, 1
    return radial_gate, math.cos(ang_gate), 0


def _is_near(
    state: SystemState,
    params: ModelParams,
    radial_gate: float,
    cos_gate: float,
    ang_always: int,
) -> bool:
    p = state.particle
    pn = math.sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
    if not pn - params.R < radial_gate:
        return False
    if ang_always:
        return True
    thresh = pn * cos_gate
    return (
        _max_dot(p, state.caps_a) > thresh
        and _max_dot(p, state.caps_b) > thresh
    )


def run_trial(params: ModelParams, cfg: BdConfig, rng: PhiloxStream) -> str:
    """Run one trial sequentially; returns ``"bound"`` or ``"escaped"``.

    Reference implementation consuming draws in the same order as the batch
    backends.
    """
    R = params.R
    R0, R_inf = cfg.resolve_radii(R)
    R2 = R * R
    R_inf2 = R_inf * R_inf
    radial_gate, cos_gate, ang_always = _gates(params, cfg)
    state = initial_state(params, R0, rng)
    for _ in range(cfg.max_steps):
        near = _is_near(state, params, radial_gate, cos_gate, ang_always)
        state = step(state, cfg.dt_small if near else cfg.dt_big, params, rng)
        p = state.particle
        pn2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
        if pn2 <= R2:
            if contact_test(state, params):
                return "bound"
            state = reflect(state, R)
        elif pn2 >= R_inf2:
            return "escaped"
    raise DiagnosticsError(f"trial exceeded {cfg.max_steps} steps")


def estimate_k0(
    bound: int,
    escaped: int,
    R: float,
    R0: float,
    R_inf: float,
    alpha: float = 0.05,
) -> EstimateWithCI:
    """Normalized rate ``k0 / k_smol`` from trial tallies.

    Inverts the splitting probability: with escape fraction q,
    ``C = (1-q) R0 R_inf / (R_inf - q R0)`` and ``k0/k_smol = C/R``.  The
    confidence interval propagates the binomial interval on q through the
    (decreasing) map q -> C.  At q = 0 the point estimate is R0/R — a
    super-unity small-sample artifact, reported as-is.
    """
    if bound < 0 or escaped < 0 or bound + escaped < 1:
        raise ValueError("need nonnegative tallies with at least one trial")
    if not 0.0 < R < R0 < R_inf:
        raise ValueError("need 0 < R < R0 < R_inf")
    trials = bound + escaped

    def cap(q: float) -> float:
        return (1.0 - q) * R0 * R_inf / (R_inf - q * R0)

    q_hat = escaped / trials
    q_lo, q_hi = agresti_coull(escaped, trials, alpha)
    point = cap(q_hat) / R
    return EstimateWithCI(
        point=point,
        lo=min(cap(q_hi) / R, point),
        hi=max(cap(q_lo) / R, point),
        alpha=alpha,
        trials=trials,
    )


def simulate_k0(
    params: ModelParams,
    cfg: BdConfig,
    threads: int = 1,
    backend: str | None = None,
    trial_offset: int = 0,
) -> BdResult:
    """Run ``cfg.trials`` Brownian-dynamics trials and estimate ``k0/k_smol``."""
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if trial_offset < 0:
        raise ValueError("trial_offset must be >= 0")
    R = params.R
    R0, R_inf = cfg.resolve_radii(R)
    radial_gate, cos_gate, ang_always = _gates(params, cfg)
    backend_mod = get_backend(backend)
    args = (
        cfg.seed,
        R,
        R0,
        R_inf,
        params.N_A,
        params.N_B,
        math.cos(params.eps * params.a_A),
        math.cos(params.eps * params.a_B),
        _sig_translate(params.Dtr, cfg.dt_big),
        _sig_translate(params.Dtr, cfg.dt_small),
        _sig_surface(params.Dsurf_A, R, cfg.dt_big),
        _sig_surface(params.Dsurf_A, R, cfg.dt_small),
        _sig_rotate(params.Drot_A, cfg.dt_big),
        _sig_rotate(params.Drot_A, cfg.dt_small),
        _sig_surface(params.Dsurf_B, R, cfg.dt_big),
        _sig_surface(params.Dsurf_B, R, cfg.dt_small),
        _sig_rotate(params.Drot_B, cfg.dt_big),
        _sig_rotate(params.Drot_B, cfg.dt_small),
        radial_gate,
        cos_gate,
        ang_always,
        cfg.max_steps,
    )
    bound, escaped, capped = _run_outcome_batches(
        backend_mod.bd_trials, cfg.trials, threads, args, trial_offset
    )
    if capped:
        raise DiagnosticsError(
            f"{capped} of {cfg.trials} trials exhausted the "
            f"{cfg.max_steps}-step budget"
        )
    return BdResult(
        bound=bound,
        escaped=escaped,
        trials=cfg.trials,
        estimate=estimate_k0(bound, escaped, R, R0, R_inf, cfg.alpha),
    )
