"""Counter-based random streams for reproducible Monte Carlo runs.

Every replica of a stochastic run owns a stream identified by (seed,
stream index). A draw is a pure function of (stream key, counter), so
replicas can be advanced in lockstep as numpy vectors, draws can be
produced out of order, and results do not depend on batching or thread
count. The generator is the SplitMix64 finalizer applied to a Weyl
sequence, the textbook counter-based construction.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = 0xFFFFFFFFFFFFFFFF
# 53-bit mantissa: (x >> 11) * 2^-53 is the standard uint64 -> [0, 1) map.
_INV_2_53 = np.float64(1.0 / (1 << 53))
_SHIFT_11 = np.uint64(11)
_SHIFT_30 = np.uint64(30)
_SHIFT_27 = np.uint64(27)
_SHIFT_31 = np.uint64(31)


def _mix(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, elementwise on uint64 arrays."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _SHIFT_30)) * _MIX1
        z = (z ^ (z >> _SHIFT_27)) * _MIX2
        return z ^ (z >> _SHIFT_31)


def stream_key(seed: int, index) -> np.uint64 | np.ndarray:
    """Key of stream `index` under `seed`. Vectorized over `index`."""
    s = np.uint64(seed & _U64_MASK)
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        out = _mix(_mix(s + _GAMMA) + idx * _GAMMA)
    return out if out.ndim else out[()]


def uniforms(key, counter) -> np.ndarray:
    """Uniform [0, 1) draws at the given counters. Broadcasts key/counter."""
    k = np.asarray(key, dtype=np.uint64)
    t = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = _mix(k + t * _GAMMA)
    u = (x >> _SHIFT_11).astype(np.float64) * _INV_2_53
    return u if u.ndim else np.float64(u[()])


def normals(key, counter) -> np.ndarray:
    """Standard normal draws, one per counter, via Box-Muller.

    Normal j consumes uniform counters (2j, 2j + 1), so the layout is
    stable no matter how many normals are requested at once.
    """
    t = np.asarray(counter, dtype=np.uint64)
    two = np.uint64(2)
    one = np.uint64(1)
    with np.errstate(over="ignore"):
        u1 = uniforms(key, t * two)
        u2 = uniforms(key, t * two + one)
    r = np.sqrt(-2.0 * np.log1p(-u1))
    return r * np.cos(2.0 * np.pi * np.asarray(u2))


class Stream:
    """Sequential view of one counter stream.

    Used by the scalar simulation loop; the vectorized engines index the
    same streams directly, which is what makes the two paths agree draw
    for draw.
    """

    __slots__ = ("key", "pos")

    def __init__(self, seed: int, index: int = 0):
        self.key = stream_key(seed, index)
        self.pos = 0

    def next_uniform(self) -> float:
        u = float(uniforms(self.key, self.pos))
        self.pos += 1
        return u

    def next_exponential(self, rate: float) -> float:
        # log1p(-u) is finite because u < 1 strictly.
        return -float(np.log1p(-self.next_uniform())) / rate
