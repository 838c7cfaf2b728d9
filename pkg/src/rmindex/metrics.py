"""Analysis quantities for trained indexes.

Segmentation quality (empty and oversized segments), prediction accuracy
(median absolute error), expected search effort (mean log2 error), and the
work implied by stored bounds (median interval size). Medians of even-length
data are the mean of the two middle values.

The mean log2 error is mean(log2(1 + |est - pos|)): the +1 shift maps a
perfect prediction to zero expected search steps. The auto-configuration
threshold in :mod:`rmindex.guideline` is calibrated against exactly this
definition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .keyset import KeySet
from .rmi import Rmi, _estimate_batch, _leaf_indices, _lower_bound_positions, predict_batch


@dataclass(frozen=True)
class SegmentStats:
    n_segments: int
    empty_fraction: float
    largest_segment: int


@dataclass(frozen=True)
class ErrorStats:
    median_abs_error: float
    mean_log2_error: float
    median_interval_size: float


def segment_stats(boundaries: np.ndarray, n: int) -> SegmentStats:
    """Summary of a (q, 2) array of half-open segment ranges over [0, n)."""
    b = np.asarray(boundaries, dtype=np.int64)
    if b.ndim != 2 or b.shape[1] != 2 or b.shape[0] == 0:
        raise ValueError("boundaries must be a (q, 2) array")
    lengths = b[:, 1] - b[:, 0]
    if b[0, 0] != 0 or b[-1, 1] != n or np.any(lengths < 0) or np.any(b[1:, 0] != b[:-1, 1]):
        raise ValueError("boundaries do not partition [0, n)")
    return SegmentStats(
        n_segments=int(b.shape[0]),
        empty_fraction=float(np.mean(lengths == 0)),
        largest_segment=int(lengths.max()),
    )


def _abs_errors(r: Rmi, ks: KeySet) -> np.ndarray:
    leaf_idx = _leaf_indices(r.root, ks.keys, r.layer2_size)
    est = _estimate_batch(r.leaf_a, r.leaf_b, leaf_idx, ks.keys, r.n)
    pos = _lower_bound_positions(ks.keys)
    return np.abs(est - pos)


def median_abs_error(r: Rmi, ks: KeySet) -> float:
    """Median over all keys of |estimate - true lower-bound position|."""
    return float(np.median(_abs_errors(r, ks)))


def mean_log2_error(r: Rmi, ks: KeySet) -> float:
    """Mean over all keys of log2(1 + |estimate - position|)."""
    return float(np.mean(np.log2(1.0 + _abs_errors(r, ks).astype(np.float64))))


def median_interval_size(r: Rmi, ks: KeySet) -> float:
    """Median width of the search interval over all keys.

    Without bounds every interval is the whole array, so the value is n.
    """
    _, lo, hi = predict_batch(r, ks.keys)
    return float(np.median(hi - lo))


def error_stats(r: Rmi, ks: KeySet) -> ErrorStats:
    abs_err = _abs_errors(r, ks).astype(np.float64)
    _, lo, hi = predict_batch(r, ks.keys)
    return ErrorStats(
        median_abs_error=float(np.median(abs_err)),
        mean_log2_error=float(np.mean(np.log2(1.0 + abs_err))),
        median_interval_size=float(np.median(hi - lo)),
    )
