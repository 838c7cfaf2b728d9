"""The two-layer learned index: training, prediction, bounds, lookup, serialization.

Structure: a single root model segments the key space; a second layer of
linear models (one per segment) predicts positions in the sorted array.
The root is trained on positions pre-scaled by layer2_size / n, so picking
the second-layer model at lookup time is a plain clamp-and-floor of the root
output with no extra multiply or divide.

Segmentation never copies keys. Because every trained model is monotone
non-decreasing, the keys belonging to one segment form a contiguous run of
the sorted array, so the builder records (start, end) positions per segment
and trains each second-layer model on its run in place. The grouped trainer
below performs, per segment, exactly the arithmetic of the per-model
training functions in :mod:`rmindex.models` (same centering, same
left-to-right summation), so its parameters are bit-identical to training
each segment separately.

A trained :class:`Rmi` is immutable; `predict` and `lookup` are safe for any
number of concurrent callers sharing it.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

import numpy as np

from . import models as _m
from .keyset import KeySet
from .models import CubicModel, LinearModel, Model, ModelKind, RadixModel
from .search import (
    SEARCH_SPECS,
    SearchAlgo,
    binary_search,
    binary_search_batch,
    model_biased_binary,
    model_biased_binary_batch,
    model_biased_exponential,
    model_biased_exponential_batch,
    model_biased_linear,
    model_biased_linear_batch,
)

MIN_LAYER2_SIZE = 1 << 6
MAX_LAYER2_SIZE = 1 << 25

LEAF_MODEL_KINDS = (ModelKind.LR, ModelKind.LS)


class SegmentationError(RuntimeError):
    """A root model violated monotonicity while assigning keys to segments."""


class IndexFormatError(ValueError):
    """Raised when serialized index bytes do not match the documented layout."""


class BoundKind(str, Enum):
    NB = "NB"  # no bounds
    GABS = "GAbs"  # one max absolute error for the whole index
    GIND = "GInd"  # max over- and underestimation for the whole index
    LABS = "LAbs"  # max absolute error per second-layer model
    LIND = "LInd"  # max over- and underestimation per second-layer model

    def __str__(self) -> str:
        return self.value


# Error bounds store how far predictions deviate from true positions:
# `err_over` bounds est - pos (search below the estimate), `err_under`
# bounds pos - est (search above it). Stored values are non-negative counts;
# they are kept as int64 in memory for index arithmetic and written as
# unsigned 64-bit on disk.


@dataclass(frozen=True)
class NoBounds:
    kind = BoundKind.NB


@dataclass(frozen=True)
class GlobalAbsoluteBounds:
    kind = BoundKind.GABS
    err: int = 0


@dataclass(frozen=True)
class GlobalIndividualBounds:
    kind = BoundKind.GIND
    err_over: int = 0
    err_under: int = 0


@dataclass(frozen=True, eq=False)
class LocalAbsoluteBounds:
    errs: np.ndarray = field(repr=False)  # int64, one per leaf
    kind = BoundKind.LABS


@dataclass(frozen=True, eq=False)
class LocalIndividualBounds:
    err_over: np.ndarray = field(repr=False)  # int64, one per leaf
    err_under: np.ndarray = field(repr=False)
    kind = BoundKind.LIND


ErrorBounds = Union[
    NoBounds, GlobalAbsoluteBounds, GlobalIndividualBounds, LocalAbsoluteBounds, LocalIndividualBounds
]

_BOUND_SCALAR_BYTES = {
    BoundKind.NB: 0,
    BoundKind.GABS: 8,
    BoundKind.GIND: 16,
    BoundKind.LABS: 0,
    BoundKind.LIND: 0,
}
_BOUND_PER_MODEL_BYTES = {
    BoundKind.NB: 0,
    BoundKind.GABS: 0,
    BoundKind.GIND: 0,
    BoundKind.LABS: 8,
    BoundKind.LIND: 16,
}


def bound_size_bytes(kind: BoundKind, layer2_size: int) -> int:
    return _BOUND_SCALAR_BYTES[kind] + _BOUND_PER_MODEL_BYTES[kind] * layer2_size


def index_size_bytes(root_type: ModelKind, layer2_size: int, bound_kind: BoundKind) -> int:
    """Logical parameter payload: root + 16 bytes per leaf + bounds."""
    return _m.MODEL_PARAM_BYTES[root_type] + 16 * layer2_size + bound_size_bytes(bound_kind, layer2_size)


@dataclass(frozen=True)
class RmiConfig:
    root_type: ModelKind
    leaf_type: ModelKind
    layer2_size: int
    bound_kind: BoundKind = BoundKind.NB

    def __post_init__(self) -> None:
        object.__setattr__(self, "root_type", ModelKind(self.root_type))
        object.__setattr__(self, "leaf_type", ModelKind(self.leaf_type))
        object.__setattr__(self, "bound_kind", BoundKind(self.bound_kind))
        s = self.layer2_size
        if s < MIN_LAYER2_SIZE or s > MAX_LAYER2_SIZE or s & (s - 1):
            raise ValueError(
                f"layer2_size must be a power of two in [2**6, 2**25], got {s}"
            )
        if self.leaf_type not in LEAF_MODEL_KINDS:
            raise ValueError(f"second-layer models must be LR or LS, got {self.leaf_type}")

    def describe(self) -> str:
        return f"{self.root_type}->{self.leaf_type}/{self.layer2_size}/{self.bound_kind}"


@dataclass(frozen=True)
class Prediction:
    """Estimated position plus the half-open search interval [lo, hi)."""

    est: int
    lo: int
    hi: int


@dataclass(frozen=True, eq=False)
class Rmi:
    root: Model
    leaf_a: np.ndarray = field(repr=False)  # float64 slopes, one per leaf
    leaf_b: np.ndarray = field(repr=False)  # float64 intercepts
    n: int
    bounds: ErrorBounds
    config: RmiConfig

    def __post_init__(self) -> None:
        L = self.config.layer2_size
        if self.leaf_a.shape != (L,) or self.leaf_b.shape != (L,):
            raise ValueError("leaf parameter arrays must have layer2_size entries")
        if self.bounds.kind is not self.config.bound_kind:
            raise ValueError("bounds kind does not match the configuration")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        for arr in (self.leaf_a, self.leaf_b):
            arr.setflags(write=False)

    @property
    def layer2_size(self) -> int:
        return self.config.layer2_size

    def leaf_model(self, j: int) -> LinearModel:
        return LinearModel(float(self.leaf_a[j]), float(self.leaf_b[j]))

    @property
    def leaves(self) -> list[LinearModel]:
        return [LinearModel(float(a), float(b)) for a, b in zip(self.leaf_a, self.leaf_b)]


def clamp(p: float, a: float, b: float) -> float:
    """`p` restricted to [a, b]."""
    if a > b:
        raise ValueError("clamp requires a <= b")
    return max(a, min(p, b))


def get_model_index(x: int, f: Model, q: int, n: int, *, scaled_targets: bool = False) -> int:
    """Index of the next-layer model that key `x` routes to.

    The general form scales the model output by q / n. With
    ``scaled_targets=True`` the model was already trained on pre-scaled
    positions and the output is used directly (this index always trains its
    root that way).
    """
    fx = _m.eval_model(f, x)
    if not scaled_targets:
        fx = (q * fx) / n
    return math.floor(clamp(fx, 0.0, float(q - 1)))


def _leaf_indices(root: Model, keys: np.ndarray, q: int) -> np.ndarray:
    """Vectorized routing: same arithmetic as scaled get_model_index."""
    v = _m.eval_model_batch(root, keys)
    np.clip(v, 0.0, float(q - 1), out=v)
    return np.floor(v).astype(np.int64)


def _lower_bound_positions(keys: np.ndarray) -> np.ndarray:
    """Position of each key's first occurrence (ties share one target)."""
    n = keys.shape[0]
    pos = np.arange(n, dtype=np.int64)
    if n > 1:
        run_start = np.empty(n, dtype=bool)
        run_start[0] = True
        np.not_equal(keys[1:], keys[:-1], out=run_start[1:])
        pos[~run_start] = 0
        np.maximum.accumulate(pos, out=pos)
    return pos


def segment_boundaries(root: Model, ks: KeySet, q: int) -> np.ndarray:
    """Half-open (start, end) key ranges per segment, found in one pass.

    Returns an int64 array of shape (q, 2) whose rows partition [0, n).
    Raises :class:`SegmentationError` if the root routes some key to an
    earlier segment than its predecessor, which would mean the model
    violated its monotonicity invariant.
    """
    leaf_idx = _leaf_indices(root, ks.keys, q)
    if leaf_idx.shape[0] > 1 and np.any(leaf_idx[1:] < leaf_idx[:-1]):
        raise SegmentationError("root model assigned keys to non-monotone segments")
    ids = np.arange(q, dtype=np.int64)
    starts = np.searchsorted(leaf_idx, ids, side="left")
    ends = np.searchsorted(leaf_idx, ids, side="right")
    return np.stack([starts, ends], axis=1)


def _train_root(kind: ModelKind, keys: np.ndarray, posf: np.ndarray, L: int, n: int) -> Model:
    if kind is ModelKind.RX:
        return _m.train_radix(keys, L)
    targets = posf * (L / n)  # pre-scaled so routing skips the q/n step
    if kind is ModelKind.LR:
        return _m.train_linear_regression(keys, targets)
    if kind is ModelKind.LS:
        return _m.train_linear_spline(keys, targets)
    return _m.train_cubic_spline(keys, targets)


def _train_leaves_grouped(
    kind: ModelKind,
    keys: np.ndarray,
    posf: np.ndarray,
    leaf_idx: np.ndarray,
    starts: np.ndarray,
    ends: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Train all second-layer models in one vectorized pass.

    Mirrors models.train_linear_regression / train_linear_spline operation
    for operation; grouped np.add.reduceat accumulates left to right exactly
    like the per-model path. Empty segments get a constant model predicting
    their boundary position, which equals the end of the preceding
    non-empty segment.
    """
    L = starts.shape[0]
    leaf_a = np.zeros(L, dtype=np.float64)
    leaf_b = np.zeros(L, dtype=np.float64)
    nonempty = ends > starts
    if not np.all(nonempty):
        leaf_b[~nonempty] = starts[~nonempty].astype(np.float64)
    if not np.any(nonempty):
        return leaf_a, leaf_b

    st = starts[nonempty]
    en = ends[nonempty]
    xl = keys[st]
    xr = keys[en - 1]
    xlf = xl.astype(np.float64)
    y0 = posf[st]
    y1 = posf[en - 1]

    if kind is ModelKind.LS:
        degen = xl == xr
        span = (xr - xl).astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(degen, 0.0, (y1 - y0) / span)
        b = np.where(degen, y0, y0 - a * xlf)
    else:  # LR
        ranks = np.cumsum(nonempty) - 1  # compact ids of non-empty segments
        cidx = ranks[leaf_idx]
        cnt = (en - st).astype(np.float64)
        my = np.add.reduceat(posf, st) / cnt
        dx = (keys - xl[cidx]).astype(np.float64)
        mdx = np.add.reduceat(dx, st) / cnt
        u = dx - mdx[cidx]
        v = posf - my[cidx]
        sxx = np.add.reduceat(u * u, st)
        sxy = np.add.reduceat(u * v, st)
        with np.errstate(divide="ignore", invalid="ignore"):
            a_raw = sxy / sxx
        bad = (xl == xr) | (sxx <= 0.0) | (a_raw < 0.0)
        a = np.where(bad, 0.0, a_raw)
        b = np.where(bad, my, (my - a * mdx) - a * xlf)

    leaf_a[nonempty] = a
    leaf_b[nonempty] = b
    return leaf_a, leaf_b


def build_rmi(ks: KeySet, cfg: RmiConfig) -> Rmi:
    """Train the full index: root, segmentation, second layer, bounds.

    Targets are lower-bound positions, so duplicate keys train toward their
    first occurrence. Bounds (if configured) are computed by evaluating the
    finished index on every key.
    """
    keys = ks.keys
    n = ks.n
    L = cfg.layer2_size
    pos = _lower_bound_positions(keys)
    posf = pos.astype(np.float64)

    root = _train_root(cfg.root_type, keys, posf, L, n)
    leaf_idx = _leaf_indices(root, keys, L)
    if n > 1 and np.any(leaf_idx[1:] < leaf_idx[:-1]):
        raise SegmentationError("root model assigned keys to non-monotone segments")
    ids = np.arange(L, dtype=np.int64)
    starts = np.searchsorted(leaf_idx, ids, side="left")
    ends = np.searchsorted(leaf_idx, ids, side="right")

    leaf_a, leaf_b = _train_leaves_grouped(cfg.leaf_type, keys, posf, leaf_idx, starts, ends)
    bounds = _bounds_from_arrays(leaf_a, leaf_b, keys, pos, leaf_idx, st_all=starts, kind=cfg.bound_kind)
    return Rmi(root=root, leaf_a=leaf_a, leaf_b=leaf_b, n=n, bounds=bounds, config=cfg)


def _estimate_batch(leaf_a, leaf_b, leaf_idx, keys: np.ndarray, n: int) -> np.ndarray:
    """Floored, clamped position estimates; bitwise equal to scalar predict."""
    kf = keys.astype(np.float64)
    v = leaf_a[leaf_idx] * kf
    v += leaf_b[leaf_idx]
    np.clip(v, 0.0, float(n - 1), out=v)
    return np.floor(v).astype(np.int64)


def _bounds_from_arrays(leaf_a, leaf_b, keys, pos, leaf_idx, st_all, kind: BoundKind) -> ErrorBounds:
    if kind is BoundKind.NB:
        return NoBounds()
    n = keys.shape[0]
    est = _estimate_batch(leaf_a, leaf_b, leaf_idx, keys, n)
    d = est - pos
    if kind is BoundKind.GABS:
        return GlobalAbsoluteBounds(err=int(np.abs(d).max()))
    if kind is BoundKind.GIND:
        return GlobalIndividualBounds(
            err_over=max(int(d.max()), 0), err_under=max(-int(d.min()), 0)
        )
    L = st_all.shape[0]
    counts = np.diff(np.append(st_all, n))
    # st_all are segment starts; a segment is empty when the next start equals it
    nonempty = counts > 0
    st = st_all[nonempty]
    if kind is BoundKind.LABS:
        errs = np.zeros(L, dtype=np.int64)
        errs[nonempty] = np.maximum.reduceat(np.abs(d), st)
        return LocalAbsoluteBounds(errs=errs)
    over = np.zeros(L, dtype=np.int64)
    under = np.zeros(L, dtype=np.int64)
    over[nonempty] = np.maximum(np.maximum.reduceat(d, st), 0)
    under[nonempty] = np.maximum(-np.minimum.reduceat(d, st), 0)
    return LocalIndividualBounds(err_over=over, err_under=under)


def compute_bounds(r: Rmi, ks: KeySet, kind: BoundKind) -> ErrorBounds:
    """Error bounds of the given kind for an already-trained index."""
    kind = BoundKind(kind)
    leaf_idx = _leaf_indices(r.root, ks.keys, r.layer2_size)
    pos = _lower_bound_positions(ks.keys)
    ids = np.arange(r.layer2_size, dtype=np.int64)
    starts = np.searchsorted(leaf_idx, ids, side="left")
    return _bounds_from_arrays(r.leaf_a, r.leaf_b, ks.keys, pos, leaf_idx, starts, kind)


def with_bound_kind(r: Rmi, ks: KeySet, kind: BoundKind) -> Rmi:
    """Same trained models, different bound kind (cheap relative to build)."""
    kind = BoundKind(kind)
    bounds = compute_bounds(r, ks, kind)
    return Rmi(
        root=r.root,
        leaf_a=r.leaf_a,
        leaf_b=r.leaf_b,
        n=r.n,
        bounds=bounds,
        config=replace(r.config, bound_kind=kind),
    )


def predict(r: Rmi, x: int) -> Prediction:
    """Estimate the position of `x` and the interval to search.

    The interval always contains the true lower-bound position of any key
    the index was trained on; the extra +1 on the upper end keeps it a
    half-open range.
    """
    j = get_model_index(x, r.root, r.layer2_size, r.n, scaled_targets=True)
    v = float(r.leaf_a[j]) * float(x) + float(r.leaf_b[j])
    est = math.floor(clamp(v, 0.0, float(r.n - 1)))
    lo, hi = _interval_scalar(r.bounds, est, j, r.n)
    return Prediction(est=est, lo=lo, hi=hi)


def _interval_scalar(bounds: ErrorBounds, est: int, j: int, n: int) -> tuple[int, int]:
    if isinstance(bounds, NoBounds):
        return 0, n
    if isinstance(bounds, GlobalAbsoluteBounds):
        over = under = bounds.err
    elif isinstance(bounds, GlobalIndividualBounds):
        over, under = bounds.err_over, bounds.err_under
    elif isinstance(bounds, LocalAbsoluteBounds):
        over = under = int(bounds.errs[j])
    else:
        over = int(bounds.err_over[j])
        under = int(bounds.err_under[j])
    return max(est - over, 0), min(est + under + 1, n)


def predict_batch(r: Rmi, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized predict: (est, lo, hi) int64 arrays for a query array."""
    qs = np.ascontiguousarray(queries, dtype=np.uint64)
    n = r.n
    leaf = _leaf_indices(r.root, qs, r.layer2_size)
    est = _estimate_batch(r.leaf_a, r.leaf_b, leaf, qs, n)
    bounds = r.bounds
    if isinstance(bounds, NoBounds):
        lo = np.zeros(est.shape[0], dtype=np.int64)
        hi = np.full(est.shape[0], n, dtype=np.int64)
        return est, lo, hi
    if isinstance(bounds, GlobalAbsoluteBounds):
        over = under = np.int64(bounds.err)
    elif isinstance(bounds, GlobalIndividualBounds):
        over, under = np.int64(bounds.err_over), np.int64(bounds.err_under)
    elif isinstance(bounds, LocalAbsoluteBounds):
        over = under = bounds.errs[leaf]
    else:
        over = bounds.err_over[leaf]
        under = bounds.err_under[leaf]
    lo = np.maximum(est - over, 0)
    hi = np.minimum(est + under + 1, n)
    return est, lo, hi


def _check_algo(bounds: ErrorBounds, algo: SearchAlgo) -> None:
    if SEARCH_SPECS[algo].requires_bounds and isinstance(bounds, NoBounds):
        raise ValueError(f"{algo} requires error bounds; this index stores none")


def lookup(r: Rmi, ks: KeySet, q: int, algo: SearchAlgo) -> int:
    """Lower-bound position of `q`, for present or absent keys.

    Stored bounds only cover keys the index was trained on. After a bounded
    search the lower-bound property is verified and, if an absent key fell
    outside its interval, an unbounded model-biased exponential search from
    the returned position corrects it.
    """
    algo = SearchAlgo(algo)
    _check_algo(r.bounds, algo)
    p = predict(r, q)
    if algo is SearchAlgo.MLIN:
        return model_biased_linear(ks, q, p.est)
    if algo is SearchAlgo.MEXP:
        return model_biased_exponential(ks, q, p.est)
    if algo is SearchAlgo.BIN:
        pos = binary_search(ks, q, p.lo, p.hi)
    else:
        pos = model_biased_binary(ks, q, p.lo, p.hi, p.est)
    keys = ks.keys
    n = ks.n
    ok = (pos == 0 or keys[pos - 1] < q) and (pos == n or keys[pos] >= q)
    if not ok:
        pos = model_biased_exponential(ks, q, min(max(pos, 0), n - 1))
    return pos


def lookup_batch(
    r: Rmi, ks: KeySet, queries: np.ndarray, algo: SearchAlgo, chunk_size: int = 1 << 16
) -> np.ndarray:
    """Vectorized lookup over a query array; equals scalar lookup per query.

    Queries are processed in chunks so per-chunk scratch arrays stay cache
    resident.
    """
    algo = SearchAlgo(algo)
    _check_algo(r.bounds, algo)
    qs = np.ascontiguousarray(queries, dtype=np.uint64)
    keys = ks.keys
    n = ks.n
    out = np.empty(qs.shape[0], dtype=np.int64)
    for lo_i in range(0, qs.shape[0], chunk_size):
        sl = slice(lo_i, min(lo_i + chunk_size, qs.shape[0]))
        q = qs[sl]
        est, lo, hi = predict_batch(r, q)
        if algo is SearchAlgo.MLIN:
            p = model_biased_linear_batch(keys, q, est)
        elif algo is SearchAlgo.MEXP:
            p = model_biased_exponential_batch(keys, q, est)
        elif algo is SearchAlgo.BIN:
            p = binary_search_batch(keys, q, lo, hi)
        else:
            p = model_biased_binary_batch(keys, q, lo, hi, est)
        if algo in (SearchAlgo.BIN, SearchAlgo.MBIN):
            bad = np.zeros(p.shape[0], dtype=bool)
            above0 = p > 0
            bad[above0] = keys[p[above0] - 1] >= q[above0]
            below_n = p < n
            bad[below_n] |= keys[p[below_n]] < q[below_n]
            fix = np.flatnonzero(bad)
            if fix.size:
                p[fix] = model_biased_exponential_batch(
                    keys, q[fix], np.clip(p[fix], 0, n - 1)
                )
        out[sl] = p
    return out


def size_bytes(r: Rmi) -> int:
    """Logical size: root parameters + 16 bytes per leaf + stored bounds."""
    return index_size_bytes(r.config.root_type, r.layer2_size, r.bounds.kind)


# ---------------------------------------------------------------------------
# Serialization
#
# Layout (all integers little-endian):
#   magic   4 bytes  b"RMI1"
#   version 1 byte   (currently 1)
#   config  4 bytes  root_type, leaf_type, bound_kind, log2(layer2_size)
#   n       8 bytes  unsigned key count
#   root    model parameters (LR/LS: a,b float64; CS: a,b,c,d float64;
#                             RX: left_shift, right_shift one byte each)
#   leaves  layer2_size * (a, b) float64 pairs
#   bounds  GAbs: err u64; GInd: err_over, err_under u64;
#           LAbs: layer2_size u64; LInd: layer2_size * (over, under) u64;
#           NB: nothing
# Trailing bytes, truncation, or invalid fields raise IndexFormatError.
# ---------------------------------------------------------------------------

MAGIC = b"RMI1"
FORMAT_VERSION = 1

_MODEL_CODE = {ModelKind.LR: 0, ModelKind.LS: 1, ModelKind.CS: 2, ModelKind.RX: 3}
_MODEL_FROM_CODE = {v: k for k, v in _MODEL_CODE.items()}
_BOUND_CODE = {
    BoundKind.NB: 0,
    BoundKind.GABS: 1,
    BoundKind.GIND: 2,
    BoundKind.LABS: 3,
    BoundKind.LIND: 4,
}
_BOUND_FROM_CODE = {v: k for k, v in _BOUND_CODE.items()}


def serialize_rmi(r: Rmi) -> bytes:
    cfg = r.config
    parts = [
        MAGIC,
        struct.pack(
            "<BBBBB",
            FORMAT_VERSION,
            _MODEL_CODE[cfg.root_type],
            _MODEL_CODE[cfg.leaf_type],
            _BOUND_CODE[cfg.bound_kind],
            cfg.layer2_size.bit_length() - 1,
        ),
        struct.pack("<Q", r.n),
    ]
    root = r.root
    if isinstance(root, RadixModel):
        parts.append(struct.pack("<BB", root.left_shift, root.right_shift))
    elif isinstance(root, CubicModel):
        parts.append(struct.pack("<dddd", root.a, root.b, root.c, root.d))
    else:
        parts.append(struct.pack("<dd", root.a, root.b))
    leaves = np.empty((r.layer2_size, 2), dtype="<f8")
    leaves[:, 0] = r.leaf_a
    leaves[:, 1] = r.leaf_b
    parts.append(leaves.tobytes())
    b = r.bounds
    if isinstance(b, GlobalAbsoluteBounds):
        parts.append(struct.pack("<Q", b.err))
    elif isinstance(b, GlobalIndividualBounds):
        parts.append(struct.pack("<QQ", b.err_over, b.err_under))
    elif isinstance(b, LocalAbsoluteBounds):
        parts.append(b.errs.astype("<u8").tobytes())
    elif isinstance(b, LocalIndividualBounds):
        both = np.empty((r.layer2_size, 2), dtype="<u8")
        both[:, 0] = b.err_over
        both[:, 1] = b.err_under
        parts.append(both.tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.data):
            raise IndexFormatError("truncated index data")
        out = self.data[self.pos : self.pos + count]
        self.pos += count
        return out

    def done(self) -> None:
        if self.pos != len(self.data):
            raise IndexFormatError(f"{len(self.data) - self.pos} trailing bytes")


def deserialize_rmi(data: bytes) -> Rmi:
    rd = _Reader(bytes(data))
    if rd.take(4) != MAGIC:
        raise IndexFormatError("bad magic bytes")
    version, root_c, leaf_c, bound_c, log2_size = struct.unpack("<BBBBB", rd.take(5))
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"unsupported format version {version}")
    try:
        root_type = _MODEL_FROM_CODE[root_c]
        leaf_type = _MODEL_FROM_CODE[leaf_c]
        bound_kind = _BOUND_FROM_CODE[bound_c]
    except KeyError as exc:
        raise IndexFormatError("unknown model or bound code") from exc
    (n,) = struct.unpack("<Q", rd.take(8))
    try:
        cfg = RmiConfig(root_type, leaf_type, 1 << log2_size, bound_kind)
    except ValueError as exc:
        raise IndexFormatError(str(exc)) from exc
    L = cfg.layer2_size

    if root_type is ModelKind.RX:
        left, right = struct.unpack("<BB", rd.take(2))
        if left > 64 or right > 63:
            raise IndexFormatError("radix shifts out of range")
        root: Model = RadixModel(left, right)
    elif root_type is ModelKind.CS:
        vals = struct.unpack("<dddd", rd.take(32))
        root = CubicModel(*vals)
    else:
        vals = struct.unpack("<dd", rd.take(16))
        root = LinearModel(*vals)

    leaves = np.frombuffer(rd.take(16 * L), dtype="<f8").reshape(L, 2)
    leaf_a = np.ascontiguousarray(leaves[:, 0], dtype=np.float64)
    leaf_b = np.ascontiguousarray(leaves[:, 1], dtype=np.float64)
    if not (np.all(np.isfinite(leaf_a)) and np.all(np.isfinite(leaf_b))):
        raise IndexFormatError("non-finite leaf parameters")

    if bound_kind is BoundKind.NB:
        bounds: ErrorBounds = NoBounds()
    elif bound_kind is BoundKind.GABS:
        (err,) = struct.unpack("<Q", rd.take(8))
        bounds = GlobalAbsoluteBounds(err=err)
    elif bound_kind is BoundKind.GIND:
        over, under = struct.unpack("<QQ", rd.take(16))
        bounds = GlobalIndividualBounds(err_over=over, err_under=under)
    elif bound_kind is BoundKind.LABS:
        errs = np.frombuffer(rd.take(8 * L), dtype="<u8").astype(np.int64)
        bounds = LocalAbsoluteBounds(errs=errs)
    else:
        both = np.frombuffer(rd.take(16 * L), dtype="<u8").reshape(L, 2)
        bounds = LocalIndividualBounds(
            err_over=both[:, 0].astype(np.int64), err_under=both[:, 1].astype(np.int64)
        )
    rd.done()
    if n < 1:
        raise IndexFormatError("key count must be at least 1")
    return Rmi(root=root, leaf_a=leaf_a, leaf_b=leaf_b, n=int(n), bounds=bounds, config=cfg)
