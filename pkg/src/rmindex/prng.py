"""Deterministic 64-bit pseudo-random numbers (SplitMix64, counter mode).

All randomized behavior in this package flows through this module so that
datasets and workloads are bitwise reproducible from a seed, independent of
numpy's own generator versioning. The algorithm is SplitMix64 (Steele et al.,
"Fast splittable pseudorandom number generators") driven as a counter-based
stream: draw i of stream s seeded with seed k is

    mix64(k + s * STREAM_STEP + (i + 1) * GOLDEN)    (all mod 2**64)

The constants and the mixer are fixed and must never change; test fixtures
record seeds against this exact stream.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

GOLDEN = 0x9E3779B97F4A7C15
STREAM_STEP = 0xD1B54A32D192ED03

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a single 64-bit value (Python ints)."""
    z &= _MASK64
    z = (z ^ (z >> 30)) * _M1 & _MASK64
    z = (z ^ (z >> 27)) * _M2 & _MASK64
    return z ^ (z >> 31)


def raw_u64(seed: int, count: int, stream: int = 0) -> np.ndarray:
    """`count` raw 64-bit draws from the given seed and stream, as uint64."""
    if count < 0:
        raise ValueError("count must be non-negative")
    base = (seed + stream * STREAM_STEP) & _MASK64
    z = np.arange(1, count + 1, dtype=np.uint64)
    z *= np.uint64(GOLDEN)  # uint64 wraparound is intended here and below
    z += np.uint64(base)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def unit_floats(seed: int, count: int, stream: int = 0) -> np.ndarray:
    """Uniform float64 draws in [0, 1) with 53 random bits each."""
    return (raw_u64(seed, count, stream) >> np.uint64(11)) * 2.0**-53


def unit_floats_open(seed: int, count: int, stream: int = 0) -> np.ndarray:
    """Uniform float64 draws in (0, 1], safe as a log() argument."""
    return ((raw_u64(seed, count, stream) >> np.uint64(11)) + np.uint64(1)) * 2.0**-53


def bounded_u64(seed: int, count: int, bound: int, stream: int = 0) -> np.ndarray:
    """Draws in [0, bound) via 64-bit modulo reduction.

    The modulo bias is at most bound / 2**64 per value, negligible for the
    synthetic-dataset purposes this package has.
    """
    if not 1 <= bound <= 1 << 64:
        raise ValueError("bound must be in [1, 2**64]")
    draws = raw_u64(seed, count, stream)
    if bound == 1 << 64:
        return draws
    return draws % np.uint64(bound)
