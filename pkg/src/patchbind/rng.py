"""Counter-based random number generation (Philox4x32-10).

Every Monte Carlo trial in this package owns an independent random stream
addressed by ``(seed, trial_id)``.  Streams are *counter-based*: draw ``j`` of
trial ``t`` is a pure function of ``(seed, t, j)``, so results do not depend
on scheduling, chunking, or worker-thread count, and the compiled and pure
backends can consume draws in different orders (sequential vs. vectorized)
while producing identical per-trial values.

Layout
------
- key   = (seed low 32 bits, seed high 32 bits)
- counter = (block low 32, block high 32, trial low 32, trial high 32)
- one Philox block yields four 32-bit words, packed into two 64-bit lanes:
  ``lane0 = (x0 << 32) | x1`` and ``lane1 = (x2 << 32) | x3``
- draw ``j`` of a trial reads lane ``j & 1`` of block ``j >> 1``
- a 64-bit lane ``v`` maps to the open-interval uniform
  ``((v >> 11) + 0.5) * 2**-53  in (0, 1)``

The module provides a scalar pure-Python stream (reference implementation,
used by the single-trial reference operations and the test suite) and
vectorized NumPy primitives (used by the pure backend).  The compiled backend
re-implements the same function in C; agreement between all three is covered
by known-answer and cross-implementation tests.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

__all__ = [
    "PhiloxStream",
    "philox4x32_block",
    "philox_lanes",
    "uniform_from_bits",
    "uniforms_at",
    "gaussians_at",
    "split_seed",
]

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF

# Multipliers and Weyl key increments of the Philox4x32 round function.
_M0 = 0xD2511F53
_M1 = 0xCD9E8D57
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85

_TWO_M53 = 2.0 ** -53


def philox4x32_block(block: int, trial: int, seed: int) -> tuple[int, int]:
    """Run ten Philox4x32 rounds on one counter block; return the two lanes.

    Pure-integer reference implementation.  ``block`` and ``trial`` are
    64-bit counters, ``seed`` is the 64-bit key.
    """
    c0 = block & _MASK32
    c1 = (block >> 32) & _MASK32
    c2 = trial & _MASK32
    c3 = (trial >> 32) & _MASK32
    k0 = seed & _MASK32
    k1 = (seed >> 32) & _MASK32
    for rnd in range(10):
        if rnd > 0:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = (p0 >> 32) & _MASK32, p0 & _MASK32
        hi1, lo1 = (p1 >> 32) & _MASK32, p1 & _MASK32
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
    return (c0 << 32) | c1, (c2 << 32) | c3


def uniform_from_bits(lane: int) -> float:
    """Map a 64-bit lane to a uniform double strictly inside (0, 1)."""
    return ((lane >> 11) + 0.5) * _TWO_M53


class PhiloxStream:
    """Sequential random stream for one trial (reference implementation).

    Parameters
    ----------
    seed : int
        64-bit generator key shared by all trials of a run.
    trial : int
        Trial index; selects an independent stream.
    """

    def __init__(self, seed: int, trial: int):
        self._seed = seed & _MASK64
        self._trial = trial & _MASK64
        self._idx = 0
        self._cache = 0

    @property
    def draws_consumed(self) -> int:
        """Number of 64-bit draws consumed so far."""
        return self._idx

    def next_bits(self) -> int:
        """Return the next 64-bit lane of this stream."""
        if self._idx & 1:
            lane = self._cache
        else:
            lane, self._cache = philox4x32_block(
                self._idx >> 1, self._trial, self._seed
            )
        self._idx += 1
        return lane

    def uniform(self) -> float:
        """Uniform double in the open interval (0, 1)."""
        return uniform_from_bits(self.next_bits())

    def gaussian(self) -> float:
        """Standard normal via the inverse-CDF transform."""
        return float(ndtri(self.uniform()))


def philox_lanes(
    block: np.ndarray, trial: np.ndarray, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Philox4x32-10: map uint64 counter arrays to both lanes.

    Parameters
    ----------
    block, trial : ndarray of uint64
        Broadcastable counter components.
    seed : int
        64-bit key.

    Returns
    -------
    (lane0, lane1) : ndarrays of uint64
    """
    block = np.asarray(block, dtype=np.uint64)
    trial = np.asarray(trial, dtype=np.uint64)
    c0 = (block & np.uint64(_MASK32)).astype(np.uint32)
    c1 = (block >> np.uint64(32)).astype(np.uint32)
    c2 = (trial & np.uint64(_MASK32)).astype(np.uint32)
    c3 = (trial >> np.uint64(32)).astype(np.uint32)
    c0, c1, c2, c3 = np.broadcast_arrays(c0, c1, c2, c3)
    c0, c1 = c0.copy(), c1.copy()
    c2, c3 = c2.copy(), c3.copy()
    k0 = np.uint32(seed & _MASK32)
    k1 = np.uint32((seed >> 32) & _MASK32)
    m0 = np.uint64(_M0)
    m1 = np.uint64(_M1)
    for rnd in range(10):
        if rnd > 0:
            k0 = np.uint32((int(k0) + _W0) & _MASK32)
            k1 = np.uint32((int(k1) + _W1) & _MASK32)
        p0 = m0 * c0.astype(np.uint64)
        p1 = m1 * c2.astype(np.uint64)
        hi0 = (p0 >> np.uint64(32)).astype(np.uint32)
        lo0 = p0.astype(np.uint32)
        hi1 = (p1 >> np.uint64(32)).astype(np.uint32)
        lo1 = p1.astype(np.uint32)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
    lane0 = (c0.astype(np.uint64) << np.uint64(32)) | c1.astype(np.uint64)
    lane1 = (c2.astype(np.uint64) << np.uint64(32)) | c3.astype(np.uint64)
    return lane0, lane1


def uniforms_at(trial: np.ndarray, draw: np.ndarray, seed: int) -> np.ndarray:
    """Vectorized gather of uniforms: draw ``draw[i]`` of trial ``trial[i]``.

    Equivalent to ``PhiloxStream(seed, trial[i])``'s ``draw[i]``-th uniform,
    evaluated independently for every element.
    """
    trial = np.asarray(trial, dtype=np.uint64)
    draw = np.asarray(draw, dtype=np.uint64)
    lane0, lane1 = philox_lanes(draw >> np.uint64(1), trial, seed)
    bits = np.where(draw & np.uint64(1), lane1, lane0)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def gaussians_at(trial: np.ndarray, draw: np.ndarray, seed: int) -> np.ndarray:
    """Vectorized standard normals at the addressed draws (inverse CDF)."""
    return ndtri(uniforms_at(trial, draw, seed))


def split_seed(seed: int, tag: int) -> int:
    """Derive a decorrelated 64-bit sub-seed for an auxiliary computation.

    Distinct tags give distinct Philox keys, hence independent stream
    families; used when a command needs an internal side run (for example the
    asymptotic-prediction column of the Brownian-dynamics table) that must not
    consume the main run's trial streams.
    """
    x = (seed ^ (0x9E3779B97F4A7C15 * (tag + 1))) & _MASK64
    # One xorshift-multiply round so nearby seeds/tags do not share key words.
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    return x
