"""Sorted key storage: synthetic generators, binary file I/O, lower-bound oracle.

A :class:`KeySet` is an immutable, non-decreasing array of unsigned 64-bit
keys. It is both the data every index is built on and the ground truth for
positions: :func:`lower_bound` defines the answer every lookup must return.

File format (shared with the generated benchmark datasets): a little-endian
unsigned 64-bit count followed by exactly that many little-endian unsigned
64-bit keys, no padding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import prng

KEY_SPACE = 1 << 63  # generators draw from [0, 2**63)

_HEADER_DTYPE = np.dtype("<u8")
_KEY_DTYPE = np.dtype("<u8")


class KeyFileFormatError(ValueError):
    """Raised when a key file does not match the documented layout."""


@dataclass(frozen=True, eq=False)
class KeySet:
    """Immutable sorted array of uint64 keys. Safe for concurrent readers."""

    keys: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.keys, dtype=np.uint64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("KeySet requires a one-dimensional, non-empty key array")
        if arr.size > 1 and np.any(arr[1:] < arr[:-1]):
            raise ValueError("KeySet keys must be sorted non-decreasing")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "keys", arr)

    @property
    def n(self) -> int:
        return int(self.keys.size)

    def __len__(self) -> int:
        return self.n


def lower_bound(ks: KeySet, q: int) -> int:
    """Smallest index i with keys[i] >= q, or n if every key is smaller.

    This is the ground-truth oracle for all index correctness checks.
    """
    return int(np.searchsorted(ks.keys, np.uint64(q), side="left"))


def load_keyset(path: str | Path) -> KeySet:
    """Read a key file. Unsorted payloads are sorted with a warning."""
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise KeyFileFormatError(f"{path}: missing 8-byte count header")
    count = int(np.frombuffer(raw, dtype=_HEADER_DTYPE, count=1)[0])
    payload = raw[8:]
    if len(payload) != 8 * count:
        raise KeyFileFormatError(
            f"{path}: header says {count} keys but payload holds "
            f"{len(payload) // 8} (truncated or trailing bytes)"
        )
    if count == 0:
        raise KeyFileFormatError(f"{path}: empty key files are not valid")
    keys = np.frombuffer(payload, dtype=_KEY_DTYPE).astype(np.uint64)
    if keys.size > 1 and np.any(keys[1:] < keys[:-1]):
        warnings.warn(f"{path}: keys were not sorted on disk, sorting on load")
        keys = np.sort(keys)
    return KeySet(keys)


def save_keyset(ks: KeySet, path: str | Path) -> None:
    """Write `ks` so that :func:`load_keyset` round-trips it exactly."""
    with open(path, "wb") as fh:
        fh.write(np.uint64(ks.n).astype(_HEADER_DTYPE).tobytes())
        fh.write(ks.keys.astype(_KEY_DTYPE, copy=False).tobytes())


# ---------------------------------------------------------------------------
# Synthetic generators
#
# Each generator is a pure function of its parameters: identical arguments
# produce bitwise-identical key arrays, on any platform. Real-valued draws
# are scaled into [0, 2**63) and truncated; collisions are kept since
# duplicate keys are legal.
# ---------------------------------------------------------------------------


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")


def gen_uniform(n: int, seed: int, lo: int = 0, hi: int = KEY_SPACE - 1) -> KeySet:
    """`n` keys uniform over the inclusive range [lo, hi]."""
    _check_n(n)
    if not 0 <= lo <= hi < (1 << 64):
        raise ValueError("need 0 <= lo <= hi < 2**64")
    span = hi - lo + 1
    keys = prng.bounded_u64(seed, n, span)
    if lo:
        keys = keys + np.uint64(lo)
    return KeySet(np.sort(keys))


def gen_lognormal(n: int, seed: int, mu: float = 0.0, sigma: float = 1.0) -> KeySet:
    """Lognormal(mu, sigma) draws scaled so the largest lands at 2**63 - 1.

    Normal deviates come from the Box-Muller transform over two independent
    streams, so the output is a fixed function of the arguments. Scaling into
    the key space divides by the largest draw (in log space, for overflow
    safety), which makes the result invariant to `mu`; the parameter is kept
    so callers can state the distribution they mean, but only `sigma` shapes
    the output.
    """
    _check_n(n)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    u1 = prng.unit_floats_open(seed, n, stream=1)
    u2 = prng.unit_floats(seed, n, stream=2)
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)
    log_v = mu + sigma * z
    scaled = np.exp(log_v - log_v.max()) * float(KEY_SPACE)
    keys = scaled.astype(np.uint64)
    np.minimum(keys, np.uint64(KEY_SPACE - 1), out=keys)
    return KeySet(np.sort(keys))


def gen_clustered(n: int, seed: int, n_clusters: int, spread: int) -> KeySet:
    """Keys bunched into `n_clusters` groups, each at most `spread` wide."""
    _check_n(n)
    if n_clusters < 1:
        raise ValueError("n_clusters must be at least 1")
    if not 1 <= spread < KEY_SPACE:
        raise ValueError("spread must be in [1, 2**63)")
    centers = prng.bounded_u64(seed, n_clusters, KEY_SPACE - spread, stream=1)
    which = prng.bounded_u64(seed, n, n_clusters, stream=2)
    offsets = prng.bounded_u64(seed, n, spread, stream=3)
    keys = centers[which] + offsets
    return KeySet(np.sort(keys))


def gen_outliers(n: int, seed: int, outlier_fraction: float, magnitude_shift: int) -> KeySet:
    """A dense bulk of small keys plus a few far larger ones at the top.

    The largest ceil(outlier_fraction * n) draws are shifted left by
    `magnitude_shift` bits, placing them orders of magnitude above the rest
    at the upper end of the key space.
    """
    _check_n(n)
    if not 0.0 < outlier_fraction < 1.0:
        raise ValueError("outlier_fraction must be in (0, 1)")
    if not 0 <= magnitude_shift <= 62:
        raise ValueError("magnitude_shift must be in [0, 62]")
    n_out = math.ceil(outlier_fraction * n)
    base = np.sort(prng.bounded_u64(seed, n, 1 << (63 - magnitude_shift)))
    keys = base.copy()
    if n_out:
        keys[-n_out:] = np.left_shift(keys[-n_out:], np.uint64(magnitude_shift))
    return KeySet(keys)


def gen_duplicates(n: int, seed: int, distinct: int) -> KeySet:
    """`n` keys drawn with replacement from at most `distinct` values."""
    _check_n(n)
    if distinct < 1:
        raise ValueError("distinct must be at least 1")
    values = prng.bounded_u64(seed, distinct, KEY_SPACE, stream=1)
    which = prng.bounded_u64(seed, n, distinct, stream=2)
    return KeySet(np.sort(values[which]))


GENERATORS = {
    "uniform": gen_uniform,
    "lognormal": gen_lognormal,
    "clustered": gen_clustered,
    "outliers": gen_outliers,
    "duplicates": gen_duplicates,
}
