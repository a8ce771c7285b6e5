# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial kernels: sequential per-trial Monte Carlo loops.

Each public function runs a half-open range of trials ``[t0, t1)`` with the
GIL released and writes one outcome byte per trial.  Trial ``t`` consumes
draws from the counter-based stream addressed by ``(seed, t)`` in exactly the
order documented in ``backend.pure``; every floating-point expression mirrors
its NumPy counterpart operation for operation (the extension is compiled with
FMA contraction disabled), so kmc trial outcomes are bit-identical across
backends.  The Brownian-dynamics path matches statistically rather than
bitwise because NumPy's vectorized sin/cos round differently from libm.
"""

import numpy as np

from libc.math cimport sqrt, cos, sin
from libc.stdint cimport int64_t, uint8_t, uint32_t, uint64_t
from libc.stdlib cimport free, malloc

from scipy.special.cython_special cimport ndtri

# Outcome codes shared with the pure backend.
ESCAPED = 0
HIT = 1
CAPPED = 2

cdef uint8_t _ESCAPED = 0
cdef uint8_t _HIT = 1
cdef uint8_t _CAPPED = 2

cdef double SQRT2 = 1.4142135623730951
cdef double TWO_M53 = 1.0 / 9007199254740992.0


# ---------------------------------------------------------------------------
# Counter-based stream (Philox4x32-10), sequential per-trial view.
# ---------------------------------------------------------------------------

cdef struct Rng:
    uint32_t k0
    uint32_t k1
    uint32_t t0
    uint32_t t1
    uint64_t idx
    uint64_t cache


cdef inline void _rng_init(Rng* r, uint64_t seed, uint64_t trial) nogil:
    r.k0 = <uint32_t>(seed & <uint64_t>0xFFFFFFFF)
    r.k1 = <uint32_t>(seed >> 32)
    r.t0 = <uint32_t>(trial & <uint64_t>0xFFFFFFFF)
    r.t1 = <uint32_t>(trial >> 32)
    r.idx = 0
    r.cache = 0


cdef inline void _philox_block(uint64_t block, uint32_t t0, uint32_t t1,
                               uint32_t k0, uint32_t k1,
                               uint64_t* lane0, uint64_t* lane1) nogil:
    cdef uint32_t c0 = <uint32_t>(block & <uint64_t>0xFFFFFFFF)
    cdef uint32_t c1 = <uint32_t>(block >> 32)
    cdef uint32_t c2 = t0
    cdef uint32_t c3 = t1
    cdef uint64_t p0, p1
    cdef uint32_t hi0, lo0, hi1, lo1, n0, n1, n2, n3
    cdef int rnd
    for rnd in range(10):
        if rnd > 0:
            k0 = k0 + <uint32_t>0x9E3779B9
            k1 = k1 + <uint32_t>0xBB67AE85
        p0 = (<uint64_t>0xD2511F53) * c0
        p1 = (<uint64_t>0xCD9E8D57) * c2
        hi0 = <uint32_t>(p0 >> 32)
        lo0 = <uint32_t>(p0 & <uint64_t>0xFFFFFFFF)
        hi1 = <uint32_t>(p1 >> 32)
        lo1 = <uint32_t>(p1 & <uint64_t>0xFFFFFFFF)
        n0 = hi1 ^ c1 ^ k0
        n1 = lo1
        n2 = hi0 ^ c3 ^ k1
        n3 = lo0
        c0 = n0
        c1 = n1
        c2 = n2
        c3 = n3
    lane0[0] = ((<uint64_t>c0) << 32) | (<uint64_t>c1)
    lane1[0] = ((<uint64_t>c2) << 32) | (<uint64_t>c3)


cdef inline double _uniform(Rng* r) nogil:
    """Next uniform double in (0, 1): draw j reads lane j&1 of block j>>1."""
    cdef uint64_t bits, l0, l1
    if r.idx & 1:
        bits = r.cache
    else:
        _philox_block(r.idx >> 1, r.t0, r.t1, r.k0, r.k1, &l0, &l1)
        bits = l0
        r.cache = l1
    r.idx += 1
    return ((<double>(bits >> 11)) + 0.5) * TWO_M53


cdef inline double _gauss(Rng* r) nogil:
    return ndtri(_uniform(r))


cdef inline double _sphere5(Rng* r, double* g) nogil:
    """Five standard normals (resampling exact zero vectors); returns the norm."""
    cdef double nrm2
    while True:
        g[0] = _gauss(r)
        g[1] = _gauss(r)
        g[2] = _gauss(r)
        g[3] = _gauss(r)
        g[4] = _gauss(r)
        nrm2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3] + g[4] * g[4]
        if nrm2 > 0.0:
            return sqrt(nrm2)


cdef inline double _sphere3(Rng* r, double* g) nogil:
    cdef double nrm2
    while True:
        g[0] = _gauss(r)
        g[1] = _gauss(r)
        g[2] = _gauss(r)
        nrm2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2]
        if nrm2 > 0.0:
            return sqrt(nrm2)


# ---------------------------------------------------------------------------
# 5D capacitance walk
# ---------------------------------------------------------------------------

cdef uint8_t _kmc5d_one(uint64_t trial, uint64_t seed,
                        double r1, double r2, double s, double inv_sqrt_1ps2,
                        double rho_start, double rho_inf,
                        int64_t max_alt) nogil:
    cdef Rng rng
    cdef double g[5]
    cdef double nrm, f, z, xa, ya, xb, yb
    cdef double U, e, q, tt, sd, qa, ub, vb, qb, d1, d2, nu, rho2
    cdef double r1sq = r1 * r1
    cdef double r2sq = r2 * r2
    cdef double rho_inf2 = rho_inf * rho_inf
    cdef int64_t alt = 0

    _rng_init(&rng, seed, trial)
    nrm = _sphere5(&rng, g)
    f = rho_start / nrm
    z = g[0] * f
    xa = g[1] * f
    ya = g[2] * f
    xb = g[3] * f
    yb = g[4] * f

    while alt < max_alt:
        alt += 1
        # Stage 1: project to the z = 0 plane through the first-passage time.
        U = _uniform(&rng)
        e = -ndtri(0.5 * U) / SQRT2
        q = z / e
        tt = 0.25 * q * q
        sd = sqrt(tt + tt)
        xa = xa + sd * _gauss(&rng)
        ya = ya + sd * _gauss(&rng)
        xb = xb + sd * _gauss(&rng)
        yb = yb + sd * _gauss(&rng)
        # Membership on the plane.
        qa = xa * xa + ya * ya
        ub = xb - s * xa
        vb = yb - s * ya
        qb = ub * ub + vb * vb
        if qa < r1sq and qb < r2sq:
            return _HIT
        # Stage 2: jump to a uniform point on the largest safe sphere.
        d1 = sqrt(qa) - r1
        d2 = sqrt(qb) - r2
        nu = d2 * inv_sqrt_1ps2
        if d1 > nu:
            nu = d1
        # On-the-rim points (nu == 0) hit immediately almost surely.
        if nu <= 0.0:
            return _HIT
        nrm = _sphere5(&rng, g)
        f = nu / nrm
        z = g[0] * f
        xa = xa + g[1] * f
        ya = ya + g[2] * f
        xb = xb + g[3] * f
        yb = yb + g[4] * f
        rho2 = z * z + xa * xa + ya * ya + xb * xb + yb * yb
        if rho2 > rho_inf2:
            return _ESCAPED
    return _CAPPED


def kmc5d_trials(t0, t1, seed,
                 double r1, double r2, double s, double inv_sqrt_1ps2,
                 double rho_start, double rho_inf, max_alt,
                 uint8_t[::1] out not None):
    """Run 5D capacitance trials ``[t0, t1)``; write outcome codes into ``out``."""
    cdef uint64_t ct0 = t0
    cdef uint64_t ct1 = t1
    cdef uint64_t cseed = seed
    cdef int64_t cmax = max_alt
    cdef uint64_t t
    if out.shape[0] < <Py_ssize_t>(ct1 - ct0):
        raise ValueError("outcome buffer shorter than the trial range")
    with nogil:
        for t in range(ct0, ct1):
            out[<Py_ssize_t>(t - ct0)] = _kmc5d_one(
                t, cseed, r1, r2, s, inv_sqrt_1ps2, rho_start, rho_inf, cmax
            )


# ---------------------------------------------------------------------------
# 3D lens walk
# ---------------------------------------------------------------------------

cdef uint8_t _kmc3d_one(uint64_t trial, uint64_t seed, double half_s,
                        double rho_start, double rho_inf,
                        int64_t max_alt) nogil:
    cdef Rng rng
    cdef double g[3]
    cdef double nrm, f, z, x, y
    cdef double U, e, q, tt, sd, dxm, dxp, q1, q2, d1, d2, nu, rho2
    cdef double rho_inf2 = rho_inf * rho_inf
    cdef int64_t alt = 0

    _rng_init(&rng, seed, trial)
    nrm = _sphere3(&rng, g)
    f = rho_start / nrm
    z = g[0] * f
    x = g[1] * f
    y = g[2] * f

    while alt < max_alt:
        alt += 1
        U = _uniform(&rng)
        e = -ndtri(0.5 * U) / SQRT2
        q = z / e
        tt = 0.25 * q * q
        sd = sqrt(tt + tt)
        x = x + sd * _gauss(&rng)
        y = y + sd * _gauss(&rng)
        dxm = x - half_s
        dxp = x + half_s
        q1 = dxm * dxm + y * y
        q2 = dxp * dxp + y * y
        if q1 < 1.0 and q2 < 1.0:
            return _HIT
        d1 = sqrt(q1) - 1.0
        d2 = sqrt(q2) - 1.0
        nu = d2
        if d1 > nu:
            nu = d1
        if nu <= 0.0:
            return _HIT
        nrm = _sphere3(&rng, g)
        f = nu / nrm
        z = g[0] * f
        x = x + g[1] * f
        y = y + g[2] * f
        rho2 = z * z + x * x + y * y
        if rho2 > rho_inf2:
            return _ESCAPED
    return _CAPPED


def kmc3d_trials(t0, t1, seed, double half_s,
                 double rho_start, double rho_inf, max_alt,
                 uint8_t[::1] out not None):
    """Run 3D lens-capacitance trials ``[t0, t1)``; write outcomes into ``out``."""
    cdef uint64_t ct0 = t0
    cdef uint64_t ct1 = t1
    cdef uint64_t cseed = seed
    cdef int64_t cmax = max_alt
    cdef uint64_t t
    if out.shape[0] < <Py_ssize_t>(ct1 - ct0):
        raise ValueError("outcome buffer shorter than the trial range")
    with nogil:
        for t in range(ct0, ct1):
            out[<Py_ssize_t>(t - ct0)] = _kmc3d_one(
                t, cseed, half_s, rho_start, rho_inf, cmax
            )


def stage1_pair_samples(t0, t1, seed, double z):
    """Lateral displacement pairs produced by one stage-1 projection from height z.

    Same standalone draw layout as the pure backend: trial ``t`` consumes its
    first three draws as the first-passage uniform and two lateral Gaussians.
    """
    cdef uint64_t ct0 = t0
    cdef uint64_t ct1 = t1
    cdef uint64_t cseed = seed
    out = np.empty((t1 - t0, 2), dtype=np.float64)
    cdef double[:, ::1] v = out
    cdef Rng rng
    cdef uint64_t t
    cdef Py_ssize_t i
    cdef double U, e, q, tt, sd
    with nogil:
        for t in range(ct0, ct1):
            i = <Py_ssize_t>(t - ct0)
            _rng_init(&rng, cseed, t)
            U = _uniform(&rng)
            e = -ndtri(0.5 * U) / SQRT2
            q = z / e
            tt = 0.25 * q * q
            sd = sqrt(tt + tt)
            v[i, 0] = sd * _gauss(&rng)
            v[i, 1] = sd * _gauss(&rng)
    return out


# ---------------------------------------------------------------------------
# Brownian-dynamics trials
# ---------------------------------------------------------------------------

cdef inline double _max_dot(double px, double py, double pz,
                            double* caps, int n) nogil:
    cdef double best = px * caps[0] + py * caps[1] + pz * caps[2]
    cdef double d
    cdef int i
    for i in range(1, n):
        d = px * caps[3 * i] + py * caps[3 * i + 1] + pz * caps[3 * i + 2]
        if d > best:
            best = d
    return best


cdef inline void _surface_caps(Rng* rng, double* caps, int n, double sig) nogil:
    """Tangential Gaussian increment per cap plus renormalization."""
    cdef int i
    cdef double gx, gy, gz, cx, cy, cz, dot, nrm
    for i in range(n):
        gx = _gauss(rng)
        gy = _gauss(rng)
        gz = _gauss(rng)
        cx = caps[3 * i]
        cy = caps[3 * i + 1]
        cz = caps[3 * i + 2]
        dot = gx * cx + gy * cy + gz * cz
        cx = cx + sig * (gx - dot * cx)
        cy = cy + sig * (gy - dot * cy)
        cz = cz + sig * (gz - dot * cz)
        nrm = sqrt(cx * cx + cy * cy + cz * cz)
        caps[3 * i] = cx / nrm
        caps[3 * i + 1] = cy / nrm
        caps[3 * i + 2] = cz / nrm


cdef inline void _rotate_caps(Rng* rng, double* caps, int n, double sig) nogil:
    """Shared rigid rotation Rx(w1) Ry(w2) Rz(w3), w ~ N(0, sig^2) iid."""
    cdef double w1 = sig * _gauss(rng)
    cdef double w2 = sig * _gauss(rng)
    cdef double w3 = sig * _gauss(rng)
    cdef double c1 = cos(w1)
    cdef double s1 = sin(w1)
    cdef double c2 = cos(w2)
    cdef double s2 = sin(w2)
    cdef double c3 = cos(w3)
    cdef double s3 = sin(w3)
    cdef int i
    cdef double x, y, z, tx, ty, tz
    for i in range(n):
        x = caps[3 * i]
        y = caps[3 * i + 1]
        z = caps[3 * i + 2]
        # Rz
        tx = x * c3 - y * s3
        ty = x * s3 + y * c3
        x = tx
        y = ty
        # Ry
        tx = x * c2 + z * s2
        tz = -(x * s2) + z * c2
        x = tx
        z = tz
        # Rx
        ty = y * c1 - z * s1
        tz = y * s1 + z * c1
        y = ty
        z = tz
        caps[3 * i] = x
        caps[3 * i + 1] = y
        caps[3 * i + 2] = z


cdef uint8_t _bd_one(uint64_t trial, uint64_t seed,
                     double R, double R0, double R_inf,
                     int N_A, int N_B, double cos_aA, double cos_aB,
                     double sig_p_big, double sig_p_small,
                     double sig_sA_big, double sig_sA_small,
                     double sig_rA_big, double sig_rA_small,
                     double sig_sB_big, double sig_sB_small,
                     double sig_rB_big, double sig_rB_small,
                     double radial_gate, double cos_gate, int ang_always,
                     int64_t max_steps,
                     double* caps_a, double* caps_b) nogil:
    cdef Rng rng
    cdef double g[3]
    cdef double nrm, px, py, pz, pn2, pnorm, thresh, fac
    cdef int near
    cdef int i
    cdef double R2 = R * R
    cdef double R_inf2 = R_inf * R_inf
    cdef int64_t steps = 0

    _rng_init(&rng, seed, trial)
    nrm = _sphere3(&rng, g)
    px = R0 * (g[0] / nrm)
    py = R0 * (g[1] / nrm)
    pz = R0 * (g[2] / nrm)
    for i in range(N_A):
        nrm = _sphere3(&rng, g)
        caps_a[3 * i] = g[0] / nrm
        caps_a[3 * i + 1] = g[1] / nrm
        caps_a[3 * i + 2] = g[2] / nrm
    for i in range(N_B):
        nrm = _sphere3(&rng, g)
        caps_b[3 * i] = g[0] / nrm
        caps_b[3 * i + 1] = g[1] / nrm
        caps_b[3 * i + 2] = g[2] / nrm

    while steps < max_steps:
        steps += 1
        # Adaptive step size: small only near the sphere and (unless the
        # angular gate is vacuous) near a cap/cap alignment.
        pn2 = px * px + py * py + pz * pz
        pnorm = sqrt(pn2)
        near = pnorm - R < radial_gate
        if near and not ang_always:
            thresh = pnorm * cos_gate
            if _max_dot(px, py, pz, caps_a, N_A) > thresh:
                if _max_dot(px, py, pz, caps_b, N_B) > thresh:
                    near = 1
                else:
                    near = 0
            else:
                near = 0
        # Particle translation.
        if near:
            px = px + sig_p_small * _gauss(&rng)
            py = py + sig_p_small * _gauss(&rng)
            pz = pz + sig_p_small * _gauss(&rng)
        else:
            px = px + sig_p_big * _gauss(&rng)
            py = py + sig_p_big * _gauss(&rng)
            pz = pz + sig_p_big * _gauss(&rng)
        # Cap surface diffusion and shared rigid rotations; frozen
        # sub-processes (sigma == 0) consume no draws.
        if sig_sA_big > 0.0:
            _surface_caps(&rng, caps_a, N_A, sig_sA_small if near else sig_sA_big)
        if sig_rA_big > 0.0:
            _rotate_caps(&rng, caps_a, N_A, sig_rA_small if near else sig_rA_big)
        if sig_sB_big > 0.0:
            _surface_caps(&rng, caps_b, N_B, sig_sB_small if near else sig_sB_big)
        if sig_rB_big > 0.0:
            _rotate_caps(&rng, caps_b, N_B, sig_rB_small if near else sig_rB_big)
        # Contact, reflection, or escape.
        pn2 = px * px + py * py + pz * pz
        if pn2 <= R2:
            pnorm = sqrt(pn2)
            if _max_dot(px, py, pz, caps_a, N_A) > pnorm * cos_aA and \
                    _max_dot(px, py, pz, caps_b, N_B) > pnorm * cos_aB:
                return _HIT
            fac = (2.0 * R - pnorm) / pnorm
            px = px * fac
            py = py * fac
            pz = pz * fac
        elif pn2 >= R_inf2:
            return _ESCAPED
    return _CAPPED


def bd_trials(t0, t1, seed,
              double R, double R0, double R_inf,
              int N_A, int N_B, double cos_aA, double cos_aB,
              double sig_p_big, double sig_p_small,
              double sig_sA_big, double sig_sA_small,
              double sig_rA_big, double sig_rA_small,
              double sig_sB_big, double sig_sB_small,
              double sig_rB_big, double sig_rB_small,
              double radial_gate, double cos_gate, int ang_always,
              max_steps, uint8_t[::1] out not None):
    """Run Brownian-dynamics trials ``[t0, t1)``; write outcomes into ``out``.

    All step scales arrive precomputed (sig = sqrt(2 D dt) per sub-process
    and time-step size); a sigma of exactly 0 freezes the sub-process.
    """
    cdef uint64_t ct0 = t0
    cdef uint64_t ct1 = t1
    cdef uint64_t cseed = seed
    cdef int64_t cmax = max_steps
    cdef uint64_t t
    cdef double* caps_a
    cdef double* caps_b
    if N_A < 1 or N_B < 1:
        raise ValueError("cap counts must be at least 1")
    if out.shape[0] < <Py_ssize_t>(ct1 - ct0):
        raise ValueError("outcome buffer shorter than the trial range")
    caps_a = <double*>malloc(3 * N_A * sizeof(double))
    caps_b = <double*>malloc(3 * N_B * sizeof(double))
    if caps_a == NULL or caps_b == NULL:
        free(caps_a)
        free(caps_b)
        raise MemoryError("cap scratch allocation failed")
    try:
        with nogil:
            for t in range(ct0, ct1):
                out[<Py_ssize_t>(t - ct0)] = _bd_one(
                    t, cseed, R, R0, R_inf, N_A, N_B, cos_aA, cos_aB,
                    sig_p_big, sig_p_small,
                    sig_sA_big, sig_sA_small, sig_rA_big, sig_rA_small,
                    sig_sB_big, sig_sB_small, sig_rB_big, sig_rB_small,
                    radial_gate, cos_gate, ang_always, cmax,
                    caps_a, caps_b,
                )
    finally:
        free(caps_a)
        free(caps_b)
