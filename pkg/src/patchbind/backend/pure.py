"""Vectorized NumPy implementation of the Monte Carlo trial loops.

This is the fallback backend (and the readable reference for the compiled
kernels).  Trials are advanced in lockstep over a batch: every trial owns a
counter-based random stream addressed by ``(seed, trial_id)`` and a draw
cursor, so batching, compaction, and vectorization cannot change any trial's
outcome — the compiled backend consumes the exact same draws sequentially.

Bit-compatibility discipline: every floating-point expression here is
written with the same operation order as its counterpart in ``_kernels.pyx``
(explicit elementwise sums instead of reductions, shared precomputed scalar
factors, the same ndtri symbol), and the extension is compiled with FMA
contraction disabled.  The Brownian-dynamics path is the one exception:
NumPy's SIMD sin/cos round differently from libm, so BD agreement across
backends is statistical rather than bitwise.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from ..rng import uniforms_at
from ..special import SQRT2

__all__ = [
    "kmc5d_trials",
    "kmc3d_trials",
    "stage1_pair_samples",
    "bd_trials",
]

# Outcome codes shared with the compiled backend.
ESCAPED = 0
HIT = 1
CAPPED = 2

_BATCH_CAP = 1 << 17  # lockstep state is ~100 bytes/trial; cap the working set


class _Streams:
    """Per-trial draw cursors over the (seed, trial) Philox streams."""

    def __init__(self, t0: int, t1: int, seed: int):
        self.seed = seed
        self.trial = np.arange(t0, t1, dtype=np.uint64)
        self.idx = np.zeros(t1 - t0, dtype=np.uint64)

    def uniforms(self, sel, count: int) -> list[np.ndarray]:
        """``count`` consecutive uniforms for the selected trials."""
        out = [
            uniforms_at(self.trial[sel], self.idx[sel] + np.uint64(k), self.seed)
            for k in range(count)
        ]
        self.idx[sel] += np.uint64(count)
        return out

    def gaussians(self, sel, count: int) -> list[np.ndarray]:
        """``count`` consecutive standard normals for the selected trials."""
        return [ndtri(u) for u in self.uniforms(sel, count)]

    def sphere(self, sel, dim: int) -> tuple[list[np.ndarray], np.ndarray]:
        """Uniform direction on the (dim-1)-sphere plus the Gaussian norm.

        Draws ``dim`` standard normals per trial, redrawing (and consuming
        further draws) for any trial whose Gaussian vector is exactly zero,
        mirroring the sequential resampling rule.

        Returns the raw Gaussian components and their Euclidean norm; the
        caller scales by radius/norm.
        """
        g = self.gaussians(sel, dim)
        nrm2 = g[0] * g[0]
        for k in range(1, dim):
            nrm2 = nrm2 + g[k] * g[k]
        while True:
            bad = np.nonzero(nrm2 == 0.0)[0]
            if bad.size == 0:
                break
            sel_bad = np.asarray(sel)[bad] if np.ndim(sel) else sel
            redraw = self.gaussians(sel_bad, dim)
            for k in range(dim):
                g[k][bad] = redraw[k]
            nrm2_bad = redraw[0] * redraw[0]
            for k in range(1, dim):
                nrm2_bad = nrm2_bad + redraw[k] * redraw[k]
            nrm2[bad] = nrm2_bad
        return g, np.sqrt(nrm2)


def kmc5d_trials(
    t0: int,
    t1: int,
    seed: int,
    r1: float,
    r2: float,
    s: float,
    inv_sqrt_1ps2: float,
    rho_start: float,
    rho_inf: float,
    max_alt: int,
    out: np.ndarray,
) -> None:
    """Run 5D capacitance trials ``[t0, t1)``; write outcome codes into ``out``."""
    n_total = t1 - t0
    done = 0
    while done < n_total:
        n = min(_BATCH_CAP, n_total - done)
        _kmc5d_batch(
            t0 + done, t0 + done + n, seed, r1, r2, s, inv_sqrt_1ps2,
            rho_start, rho_inf, max_alt, out[done : done + n],
        )
        done += n


def _kmc5d_batch(
    t0, t1, seed, r1, r2, s, inv_sqrt_1ps2, rho_start, rho_inf, max_alt, out
):
    n = t1 - t0
    st = _Streams(t0, t1, seed)
    r1sq = r1 * r1
    r2sq = r2 * r2
    rho_inf2 = rho_inf * rho_inf

    act = np.arange(n)
    g, nrm = st.sphere(act, 5)
    f = rho_start / nrm
    z = g[0] * f
    xa = g[1] * f
    ya = g[2] * f
    xb = g[3] * f
    yb = g[4] * f

    out[:] = CAPPED  # anything still alive at the cap stays marked
    alt = 0
    while act.size and alt < max_alt:
        alt += 1
        # Stage 1: project to the z = 0 plane through the first-passage time.
        (U,) = st.uniforms(act, 1)
        e = -ndtri(0.5 * U) / SQRT2
        q = z / e
        tt = 0.25 * q * q
        sd = np.sqrt(tt + tt)
        g = st.gaussians(act, 4)
        xa = xa + sd * g[0]
        ya = ya + sd * g[1]
        xb = xb + sd * g[2]
        yb = yb + sd * g[3]
        # Membership on the plane.
        qa = xa * xa + ya * ya
        ub = xb - s * xa
        vb = yb - s * ya
        qb = ub * ub + vb * vb
        hit = (qa < r1sq) & (qb < r2sq)
        if hit.any():
            out[act[hit]] = HIT
            keep = ~hit
            act = act[keep]
            if act.size == 0:
                break
            xa, ya, xb, yb = xa[keep], ya[keep], xb[keep], yb[keep]
            qa, qb = qa[keep], qb[keep]
            ub, vb = ub[keep], vb[keep]
        # Stage 2: jump to a uniform point on the largest safe sphere.
        d1 = np.sqrt(qa) - r1
        d2 = np.sqrt(qb) - r2
        nu = np.maximum(d1, d2 * inv_sqrt_1ps2)
        # A point exactly on the rim of the absorbing set (nu == 0, a
        # measure-zero float event) would jump nowhere forever; a planar
        # Brownian path started on the rim enters the open set immediately
        # almost surely, so resolve it as a hit.
        rim = nu <= 0.0
        if rim.any():
            out[act[rim]] = HIT
            keep = ~rim
            act = act[keep]
            if act.size == 0:
                break
            xa, ya, xb, yb = xa[keep], ya[keep], xb[keep], yb[keep]
            nu = nu[keep]
        g, nrm = st.sphere(act, 5)
        f = nu / nrm
        z = g[0] * f
        xa = xa + g[1] * f
        ya = ya + g[2] * f
        xb = xb + g[3] * f
        yb = yb + g[4] * f
        rho2 = z * z + xa * xa + ya * ya + xb * xb + yb * yb
        esc = rho2 > rho_inf2
        if esc.any():
            out[act[esc]] = ESCAPED
            keep = ~esc
            act = act[keep]
            z, xa, ya = z[keep], xa[keep], ya[keep]
            xb, yb = xb[keep], yb[keep]


def kmc3d_trials(
    t0: int,
    t1: int,
    seed: int,
    half_s: float,
    rho_start: float,
    rho_inf: float,
    max_alt: int,
    out: np.ndarray,
) -> None:
    """Run 3D lens-capacitance trials ``[t0, t1)``; write outcomes into ``out``."""
    n_total = t1 - t0
    done = 0
    while done < n_total:
        n = min(_BATCH_CAP, n_total - done)
        _kmc3d_batch(
            t0 + done, t0 + done + n, seed, half_s, rho_start, rho_inf,
            max_alt, out[done : done + n],
        )
        done += n


def _kmc3d_batch(t0, t1, seed, half_s, rho_start, rho_inf, max_alt, out):
    n = t1 - t0
    st = _Streams(t0, t1, seed)
    rho_inf2 = rho_inf * rho_inf

    act = np.arange(n)
    g, nrm = st.sphere(act, 3)
    f = rho_start / nrm
    z = g[0] * f
    x = g[1] * f
    y = g[2] * f

    out[:] = CAPPED
    alt = 0
    while act.size and alt < max_alt:
        alt += 1
        (U,) = st.uniforms(act, 1)
        e = -ndtri(0.5 * U) / SQRT2
        q = z / e
        tt = 0.25 * q * q
        sd = np.sqrt(tt + tt)
        g = st.gaussians(act, 2)
        x = x + sd * g[0]
        y = y + sd * g[1]
        dxm = x - half_s
        dxp = x + half_s
        q1 = dxm * dxm + y * y
        q2 = dxp * dxp + y * y
        hit = (q1 < 1.0) & (q2 < 1.0)
        if hit.any():
            out[act[hit]] = HIT
            keep = ~hit
            act = act[keep]
            if act.size == 0:
                break
            x, y = x[keep], y[keep]
            q1, q2 = q1[keep], q2[keep]
        d1 = np.sqrt(q1) - 1.0
        d2 = np.sqrt(q2) - 1.0
        nu = np.maximum(d1, d2)
        # Same rim resolution as the 5D walk: on-the-rim points hit a.s.
        rim = nu <= 0.0
        if rim.any():
            out[act[rim]] = HIT
            keep = ~rim
            act = act[keep]
            if act.size == 0:
                break
            x, y = x[keep], y[keep]
            nu = nu[keep]
        g, nrm = st.sphere(act, 3)
        f = nu / nrm
        z = g[0] * f
        x = x + g[1] * f
        y = y + g[2] * f
        rho2 = z * z + x * x + y * y
        esc = rho2 > rho_inf2
        if esc.any():
            out[act[esc]] = ESCAPED
            keep = ~esc
            act = act[keep]
            z, x, y = z[keep], x[keep], y[keep]


def stage1_pair_samples(t0: int, t1: int, seed: int, z: float) -> np.ndarray:
    """Lateral displacement pairs produced by one stage-1 projection from height z.

    A standalone sampler with its own draw layout: trial ``t`` consumes its
    first three draws as the first-passage uniform followed by two lateral
    Gaussians.  Returns an (n, 2) array; the distribution test takes radii.
    """
    st = _Streams(t0, t1, seed)
    sel = np.arange(t1 - t0)
    (U,) = st.uniforms(sel, 1)
    e = -ndtri(0.5 * U) / SQRT2
    q = z / e
    tt = 0.25 * q * q
    sd = np.sqrt(tt + tt)
    g = st.gaussians(sel, 2)
    return np.stack([sd * g[0], sd * g[1]], axis=1)


def bd_trials(
    t0: int,
    t1: int,
    seed: int,
    R: float,
    R0: float,
    R_inf: float,
    N_A: int,
    N_B: int,
    cos_aA: float,
    cos_aB: float,
    sig_p_big: float,
    sig_p_small: float,
    sig_sA_big: float,
    sig_sA_small: float,
    sig_rA_big: float,
    sig_rA_small: float,
    sig_sB_big: float,
    sig_sB_small: float,
    sig_rB_big: float,
    sig_rB_small: float,
    radial_gate: float,
    cos_gate: float,
    ang_always: int,
    max_steps: int,
    out: np.ndarray,
) -> None:
    """Run Brownian-dynamics trials ``[t0, t1)``; write outcomes into ``out``.

    All step scales arrive precomputed (sig = sqrt(2 D dt) per sub-process and
    time-step size); a sigma of exactly 0 means the sub-process is frozen and
    consumes no draws.
    """
    n_total = t1 - t0
    batch = max(1, min(_BATCH_CAP // (3 * (N_A + N_B + 1)), 4096))
    done = 0
    while done < n_total:
        n = min(batch, n_total - done)
        _bd_batch(
            t0 + done, t0 + done + n, seed, R, R0, R_inf, N_A, N_B,
            cos_aA, cos_aB,
            sig_p_big, sig_p_small, sig_sA_big, sig_sA_small,
            sig_rA_big, sig_rA_small, sig_sB_big, sig_sB_small,
            sig_rB_big, sig_rB_small,
            radial_gate, cos_gate, ang_always, max_steps,
            out[done : done + n],
        )
        done += n


def _sphere_block(st, sel, rows):
    """``rows`` independent unit vectors per selected trial, shape (n, rows, 3)."""
    n = len(np.atleast_1d(sel))
    vecs = np.empty((n, rows, 3))
    for i in range(rows):
        g, nrm = st.sphere(sel, 3)
        vecs[:, i, 0] = g[0] / nrm
        vecs[:, i, 1] = g[1] / nrm
        vecs[:, i, 2] = g[2] / nrm
    return vecs


def _cap_gaussians(st, sel, rows):
    """Gaussian triples for ``rows`` caps per trial, draw order cap-major."""
    cols = []
    for _ in range(rows):
        cols.append(st.gaussians(sel, 3))
    g = np.empty((len(np.atleast_1d(sel)), rows, 3))
    for i, triple in enumerate(cols):
        g[:, i, 0] = triple[0]
        g[:, i, 1] = triple[1]
        g[:, i, 2] = triple[2]
    return g


def _rotate_all(caps, w1, w2, w3):
    """Apply the shared rigid rotation Rx(w1) Ry(w2) Rz(w3) to every cap."""
    c1, s1 = np.cos(w1)[:, None], np.sin(w1)[:, None]
    c2, s2 = np.cos(w2)[:, None], np.sin(w2)[:, None]
    c3, s3 = np.cos(w3)[:, None], np.sin(w3)[:, None]
    x, y, z = caps[:, :, 0], caps[:, :, 1], caps[:, :, 2]
    # Rz
    x, y = x * c3 - y * s3, x * s3 + y * c3
    # Ry
    x, z = x * c2 + z * s2, -(x * s2) + z * c2
    # Rx
    y, z = y * c1 - z * s1, y * s1 + z * c1
    caps[:, :, 0], caps[:, :, 1], caps[:, :, 2] = x, y, z


def _surface_step(caps, g, sig):
    """Tangential Gaussian increment (3D draw projected) plus renormalization."""
    x, y, z = caps[:, :, 0], caps[:, :, 1], caps[:, :, 2]
    gx, gy, gz = g[:, :, 0], g[:, :, 1], g[:, :, 2]
    dot = gx * x + gy * y + gz * z
    x = x + sig * (gx - dot * x)
    y = y + sig * (gy - dot * y)
    z = z + sig * (gz - dot * z)
    nrm = np.sqrt(x * x + y * y + z * z)
    caps[:, :, 0] = x / nrm
    caps[:, :, 1] = y / nrm
    caps[:, :, 2] = z / nrm


def _max_dot(p, caps):
    """Per-trial maximum of cap-center dot products with the particle vector."""
    d = (
        p[:, 0, None] * caps[:, :, 0]
        + p[:, 1, None] * caps[:, :, 1]
        + p[:, 2, None] * caps[:, :, 2]
    )
    return np.max(d, axis=1)


def _bd_batch(
    t0, t1, seed, R, R0, R_inf, N_A, N_B, cos_aA, cos_aB,
    sig_p_big, sig_p_small, sig_sA_big, sig_sA_small,
    sig_rA_big, sig_rA_small, sig_sB_big, sig_sB_small,
    sig_rB_big, sig_rB_small,
    radial_gate, cos_gate, ang_always, max_steps, out,
):
    n = t1 - t0
    st = _Streams(t0, t1, seed)
    R2 = R * R
    R_inf2 = R_inf * R_inf

    act = np.arange(n)
    g, nrm = st.sphere(act, 3)
    p = np.empty((n, 3))
    p[:, 0] = R0 * (g[0] / nrm)
    p[:, 1] = R0 * (g[1] / nrm)
    p[:, 2] = R0 * (g[2] / nrm)
    caps_a = _sphere_block(st, act, N_A)
    caps_b = _sphere_block(st, act, N_B)

    out[:] = CAPPED
    steps = 0
    while act.size and steps < max_steps:
        steps += 1
        # Adaptive step size: small only near the sphere AND near an
        # A-cap/B-cap overlap configuration.
        pn2 = p[:, 0] * p[:, 0] + p[:, 1] * p[:, 1] + p[:, 2] * p[:, 2]
        pnorm = np.sqrt(pn2)
        near_r = pnorm - R < radial_gate
        if ang_always:
            near = near_r
        else:
            thresh = pnorm * cos_gate
            near = near_r & (_max_dot(p, caps_a) > thresh) & (_max_dot(p, caps_b) > thresh)
        sig_p = np.where(near, sig_p_small, sig_p_big)
        # Particle translation.
        g = st.gaussians(act, 3)
        p[:, 0] = p[:, 0] + sig_p * g[0]
        p[:, 1] = p[:, 1] + sig_p * g[1]
        p[:, 2] = p[:, 2] + sig_p * g[2]
        # Cap surface diffusion and shared rigid rotations (draws are only
        # consumed for sub-processes with nonzero diffusivity).
        if sig_sA_big > 0.0:
            gc = _cap_gaussians(st, act, N_A)
            _surface_step(caps_a, gc, np.where(near, sig_sA_small, sig_sA_big)[:, None])
        if sig_rA_big > 0.0:
            w = st.gaussians(act, 3)
            sig = np.where(near, sig_rA_small, sig_rA_big)
            _rotate_all(caps_a, sig * w[0], sig * w[1], sig * w[2])
        if sig_sB_big > 0.0:
            gc = _cap_gaussians(st, act, N_B)
            _surface_step(caps_b, gc, np.where(near, sig_sB_small, sig_sB_big)[:, None])
        if sig_rB_big > 0.0:
            w = st.gaussians(act, 3)
            sig = np.where(near, sig_rB_small, sig_rB_big)
            _rotate_all(caps_b, sig * w[0], sig * w[1], sig * w[2])
        # Contact / reflection / escape.
        pn2 = p[:, 0] * p[:, 0] + p[:, 1] * p[:, 1] + p[:, 2] * p[:, 2]
        inside = pn2 <= R2
        if inside.any():
            pnorm_in = np.sqrt(pn2[inside])
            pin = p[inside]
            bound = (_max_dot(pin, caps_a[inside]) > pnorm_in * cos_aA) & (
                _max_dot(pin, caps_b[inside]) > pnorm_in * cos_aB
            )
            idx_inside = np.nonzero(inside)[0]
            hit_rows = idx_inside[bound]
            out[act[hit_rows]] = HIT
            # Reflect the rest radially: |p| -> 2R - |p|.
            refl_rows = idx_inside[~bound]
            fac = (2.0 * R - pnorm_in[~bound]) / pnorm_in[~bound]
            p[refl_rows] = p[refl_rows] * fac[:, None]
            if hit_rows.size:
                keep = np.ones(act.size, dtype=bool)
                keep[hit_rows] = False
                act, p, caps_a, caps_b, pn2 = (
                    act[keep], p[keep], caps_a[keep], caps_b[keep], pn2[keep],
                )
                if act.size == 0:
                    break
        esc = pn2 >= R_inf2
        if esc.any():
            out[act[esc]] = ESCAPED
            keep = ~esc
            act, p, caps_a, caps_b = act[keep], p[keep], caps_a[keep], caps_b[keep]
