"""Error-correction search over a sorted key array.

Four strategies share one contract: return the lower-bound position of the
query, i.e. the smallest index whose key is >= the query. Bin and MBin
operate inside a caller-provided window and require error bounds to supply
it; MLin and MExp start from a position estimate and need no bounds.

Scalar functions take a :class:`~rmindex.keyset.KeySet`; the ``*_batch``
variants take raw uint64 arrays plus int64 position arrays and resolve many
queries per numpy sweep. Both produce identical results.

Bounded searches never read outside [lo, hi); unbounded ones never read
outside [0, n).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .keyset import KeySet


class SearchAlgo(str, Enum):
    BIN = "Bin"
    MBIN = "MBin"
    MLIN = "MLin"
    MEXP = "MExp"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SearchSpec:
    algorithm: SearchAlgo
    requires_bounds: bool


SEARCH_SPECS = {
    SearchAlgo.BIN: SearchSpec(SearchAlgo.BIN, requires_bounds=True),
    SearchAlgo.MBIN: SearchSpec(SearchAlgo.MBIN, requires_bounds=True),
    SearchAlgo.MLIN: SearchSpec(SearchAlgo.MLIN, requires_bounds=False),
    SearchAlgo.MEXP: SearchSpec(SearchAlgo.MEXP, requires_bounds=False),
}


def binary_search(ks: KeySet, q: int, lo: int, hi: int) -> int:
    """Lower bound of q within [lo, hi), ignoring any position estimate."""
    keys = ks.keys
    if not 0 <= lo <= hi <= keys.shape[0]:
        raise ValueError("window out of range")
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < q:
            lo = mid + 1
        else:
            hi = mid
    return lo


def model_biased_binary(ks: KeySet, q: int, lo: int, hi: int, est: int) -> int:
    """Like binary_search, but the first probe is the estimate.

    After the first probe the surviving sub-interval is halved as usual.
    An estimate outside [lo, hi) is clamped inward.
    """
    keys = ks.keys
    if not 0 <= lo <= hi <= keys.shape[0]:
        raise ValueError("window out of range")
    if lo < hi:
        probe = min(max(est, lo), hi - 1)
        if keys[probe] < q:
            lo = probe + 1
        else:
            hi = probe
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < q:
            lo = mid + 1
        else:
            hi = mid
    return lo


def model_biased_linear(ks: KeySet, q: int, est: int) -> int:
    """Step by one away from the estimate until the lower bound is certain."""
    keys = ks.keys
    n = keys.shape[0]
    pos = min(max(est, 0), n - 1)
    if keys[pos] >= q:
        while pos > 0 and keys[pos - 1] >= q:
            pos -= 1
        return pos
    pos += 1
    while pos < n and keys[pos] < q:
        pos += 1
    return pos


def model_biased_exponential(ks: KeySet, q: int, est: int) -> int:
    """Double the step away from the estimate, then bisect the bracket."""
    pos, _ = model_biased_exponential_probes(ks, q, est)
    return pos


def model_biased_exponential_probes(ks: KeySet, q: int, est: int) -> tuple[int, int]:
    """MExp with an instrumented count of key comparisons.

    The probe count is at most 2 * (floor(log2(max(1, d))) + 2) where d is
    the distance between the estimate and the true position; this is what
    makes the mean log2 prediction error a proxy for search steps.
    """
    keys = ks.keys
    n = keys.shape[0]
    est = min(max(est, 0), n - 1)
    probes = 1
    if keys[est] >= q:
        hi = est  # keys[hi] >= q holds from here on
        off = 1
        lo = est - off
        while lo >= 0:
            probes += 1
            if keys[lo] >= q:
                hi = lo
                off <<= 1
                lo = est - off
            else:
                break
        lo = max(lo, -1) + 1
    else:
        lo = est  # keys[lo] < q holds from here on
        off = 1
        hi = est + off
        while hi < n:
            probes += 1
            if keys[hi] < q:
                lo = hi
                off <<= 1
                hi = est + off
            else:
                break
        hi = min(hi, n)
        lo += 1
    while lo < hi:
        probes += 1
        mid = (lo + hi) >> 1
        if keys[mid] < q:
            lo = mid + 1
        else:
            hi = mid
    return lo, probes


# ---------------------------------------------------------------------------
# Batch variants. One numpy sweep advances every still-unresolved query, and
# resolved lanes drop out of the active index set.
# ---------------------------------------------------------------------------


def binary_search_batch(keys: np.ndarray, q: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized lower bound within per-query windows [lo, hi)."""
    lo = lo.astype(np.int64, copy=True)
    hi = hi.astype(np.int64, copy=True)
    active = np.flatnonzero(lo < hi)
    while active.size:
        mid = (lo[active] + hi[active]) >> 1
        less = keys[mid] < q[active]
        took_right = active[less]
        lo[took_right] = mid[less] + 1
        took_left = active[~less]
        hi[took_left] = mid[~less]
        active = active[lo[active] < hi[active]]
    return lo


def model_biased_binary_batch(
    keys: np.ndarray, q: np.ndarray, lo: np.ndarray, hi: np.ndarray, est: np.ndarray
) -> np.ndarray:
    """Vectorized MBin: one biased probe per lane, then plain halving."""
    lo = lo.astype(np.int64, copy=True)
    hi = hi.astype(np.int64, copy=True)
    open_lane = np.flatnonzero(lo < hi)
    if open_lane.size:
        probe = np.minimum(np.maximum(est[open_lane], lo[open_lane]), hi[open_lane] - 1)
        less = keys[probe] < q[open_lane]
        lo[open_lane[less]] = probe[less] + 1
        hi[open_lane[~less]] = probe[~less]
    return binary_search_batch(keys, q, lo, hi)


def model_biased_linear_batch(keys: np.ndarray, q: np.ndarray, est: np.ndarray) -> np.ndarray:
    """Vectorized MLin: every lane walks by one position per sweep."""
    n = keys.shape[0]
    pos = np.clip(est, 0, n - 1).astype(np.int64)
    at_or_above = keys[pos] >= q
    walk = np.flatnonzero(at_or_above & (pos > 0))
    while walk.size:
        below = keys[pos[walk] - 1] >= q[walk]
        walk = walk[below]
        pos[walk] -= 1
        walk = walk[pos[walk] > 0]
    fwd = np.flatnonzero(~at_or_above)
    pos[fwd] += 1
    fwd = fwd[pos[fwd] < n]
    while fwd.size:
        short = keys[pos[fwd]] < q[fwd]
        fwd = fwd[short]
        pos[fwd] += 1
        fwd = fwd[pos[fwd] < n]
    return pos


def model_biased_exponential_batch(keys: np.ndarray, q: np.ndarray, est: np.ndarray) -> np.ndarray:
    """Vectorized MExp: gallop away from the estimate, bisect the bracket."""
    n = keys.shape[0]
    est = np.clip(est, 0, n - 1).astype(np.int64)
    out = np.empty(q.shape[0], dtype=np.int64)
    down = keys[est] >= q

    idx = np.flatnonzero(down)
    if idx.size:
        e = est[idx]
        qq = q[idx]
        hi = e.copy()
        off = np.ones_like(e)
        lo = e - off
        active = np.flatnonzero(lo >= 0)
        while active.size:
            still = keys[lo[active]] >= qq[active]
            grow = active[still]
            hi[grow] = lo[grow]
            wider = off[grow] << 1
            off[grow] = wider
            lo[grow] = e[grow] - wider
            active = grow[lo[grow] >= 0]
        lo = np.maximum(lo, -1) + 1
        out[idx] = binary_search_batch(keys, qq, lo, hi)

    idx = np.flatnonzero(~down)
    if idx.size:
        e = est[idx]
        qq = q[idx]
        lo = e.copy()
        off = np.ones_like(e)
        hi = e + off
        active = np.flatnonzero(hi < n)
        while active.size:
            still = keys[hi[active]] < qq[active]
            grow = active[still]
            lo[grow] = hi[grow]
            wider = off[grow] << 1
            off[grow] = wider
            hi[grow] = e[grow] + wider
            active = grow[hi[grow] < n]
        hi = np.minimum(hi, n)
        out[idx] = binary_search_batch(keys, qq, lo + 1, hi)
    return out
