"""Model families for key-to-position regression: linear, cubic, radix.

Training keeps every model monotone non-decreasing over its training keys;
that property is what lets the index assign keys to contiguous second-layer
segments without copying them.

Numeric contract: sums inside linear-regression training are accumulated
strictly left to right (np.add.reduceat), and keys are centered on the first
key in exact uint64 arithmetic before any float conversion. The grouped
trainer in :mod:`rmindex.rmi` mirrors these operations element for element,
so training a segment in place is bit-identical to training it from a copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

_MASK64 = (1 << 64) - 1


class ModelKind(str, Enum):
    LR = "LR"  # linear regression, least squares over all pairs
    LS = "LS"  # linear spline through the two endpoint pairs
    CS = "CS"  # monotone cubic through the two endpoint pairs
    RX = "RX"  # radix: drop the shared key prefix, keep the top bits

    def __str__(self) -> str:  # argparse/CSV friendliness
        return self.value


@dataclass(frozen=True)
class LinearModel:
    a: float
    b: float

    def eval(self, x: int) -> float:
        return self.a * float(x) + self.b


@dataclass(frozen=True)
class CubicModel:
    a: float
    b: float
    c: float
    d: float

    def eval(self, x: int) -> float:
        xf = float(x)
        return ((self.a * xf + self.b) * xf + self.c) * xf + self.d


@dataclass(frozen=True)
class RadixModel:
    """f(x) = (x << left_shift) >> right_shift in 64-bit arithmetic.

    left_shift == 64 is the degenerate all-keys-equal case and evaluates to 0.
    """

    left_shift: int
    right_shift: int

    def eval(self, x: int) -> float:
        if self.left_shift >= 64:
            return 0.0
        return float(((int(x) << self.left_shift) & _MASK64) >> self.right_shift)


Model = Union[LinearModel, CubicModel, RadixModel]

MODEL_PARAM_BYTES = {ModelKind.LR: 16, ModelKind.LS: 16, ModelKind.CS: 32, ModelKind.RX: 2}


def model_kind_of(model: Model) -> ModelKind:
    if isinstance(model, CubicModel):
        return ModelKind.CS
    if isinstance(model, RadixModel):
        return ModelKind.RX
    return ModelKind.LR  # LR and LS share the parameter shape


def eval_model(model: Model, x: int) -> float:
    """Apply the model formula to one key."""
    return model.eval(x)


def eval_model_batch(model: Model, keys: np.ndarray) -> np.ndarray:
    """Apply the model formula to a uint64 key array, returning float64.

    Performs the same sequence of IEEE operations as the scalar ``eval`` so
    both paths produce identical bits.
    """
    if isinstance(model, RadixModel):
        if model.left_shift >= 64:
            return np.zeros(keys.shape[0], dtype=np.float64)
        shifted = np.left_shift(keys, np.uint64(model.left_shift))
        return np.right_shift(shifted, np.uint64(model.right_shift)).astype(np.float64)
    xf = keys.astype(np.float64)
    if isinstance(model, CubicModel):
        out = model.a * xf
        out += model.b
        out *= xf
        out += model.c
        out *= xf
        out += model.d
        return out
    out = model.a * xf
    out += model.b
    return out


def _as_training_arrays(keys, targets) -> tuple[np.ndarray, np.ndarray]:
    k = np.asarray(keys, dtype=np.uint64)
    t = np.asarray(targets, dtype=np.float64)
    if k.shape != t.shape:
        raise ValueError("keys and targets must have equal length")
    return k, t


def _seqsum(values: np.ndarray) -> float:
    # Left-to-right accumulation; np.sum's pairwise order would differ.
    return float(np.add.reduceat(values, [0])[0])


def train_linear_regression(keys, targets) -> LinearModel:
    """Ordinary least squares fit of target on key.

    Degenerate inputs yield constant models: no pairs give (0, 0), a single
    pair or all-equal keys give (0, mean target). A negative slope (possible
    only for non-monotone targets) is clamped to 0 with the mean target as
    intercept, preserving monotonicity.
    """
    k, t = _as_training_arrays(keys, targets)
    m = k.shape[0]
    if m == 0:
        return LinearModel(0.0, 0.0)
    my_all = _seqsum(t) / m
    if k[0] == k[-1]:
        return LinearModel(0.0, my_all)
    x0 = k[0]
    dx = (k - x0).astype(np.float64)  # exact: uint64 difference, then cast
    mdx = _seqsum(dx) / m
    u = dx - mdx
    v = t - my_all
    sxx = _seqsum(u * u)
    sxy = _seqsum(u * v)
    if sxx <= 0.0:
        return LinearModel(0.0, my_all)
    a = sxy / sxx
    if a < 0.0:
        return LinearModel(0.0, my_all)
    b = (my_all - a * mdx) - a * float(x0)
    return LinearModel(a, b)


def train_linear_spline(keys, targets) -> LinearModel:
    """Line through the first and last pair; interior pairs are ignored."""
    k, t = _as_training_arrays(keys, targets)
    m = k.shape[0]
    if m == 0:
        return LinearModel(0.0, 0.0)
    x0, x1 = k[0], k[-1]
    y0, y1 = float(t[0]), float(t[-1])
    if x0 == x1:
        return LinearModel(0.0, y0)
    a = (y1 - y0) / float(x1 - x0)
    b = y0 - a * float(x0)
    return LinearModel(a, b)


def train_cubic_spline(keys, targets) -> CubicModel:
    """Monotone cubic through the first and last pair.

    Endpoint derivatives are estimated from the secants to the second and
    second-to-last pairs and limited by the Fritsch-Carlson criterion, which
    keeps the segment non-decreasing. Fewer than four pairs fall back to the
    linear-spline coefficients.

    The returned power-basis coefficients apply to the raw key value; for
    key ranges with a huge offset and a tiny span the float64 expansion of
    that basis loses precision, which is inherent to the representation.
    """
    k, t = _as_training_arrays(keys, targets)
    m = k.shape[0]
    if m < 4 or k[0] == k[-1]:
        ls = train_linear_spline(k, t)
        return CubicModel(0.0, 0.0, ls.a, ls.b)
    x0, x1 = k[0], k[-1]
    y0, y1 = float(t[0]), float(t[-1])
    h = float(x1 - x0)
    delta = (y1 - y0) / h
    m0 = (float(t[1]) - y0) / float(k[1] - x0) if k[1] > x0 else delta
    m1 = (y1 - float(t[-2])) / float(x1 - k[-2]) if x1 > k[-2] else delta
    m0 = max(m0, 0.0)
    m1 = max(m1, 0.0)
    if delta <= 0.0:
        m0 = m1 = 0.0
    else:
        alpha = m0 / delta
        beta = m1 / delta
        s = alpha * alpha + beta * beta
        if s > 9.0:
            tau = 3.0 / math.sqrt(s)
            m0 = tau * alpha * delta
            m1 = tau * beta * delta
    # Hermite coefficients in u = x - x0, then expanded to the raw basis.
    c3 = (m0 + m1 - 2.0 * delta) / (h * h)
    c2 = (3.0 * delta - 2.0 * m0 - m1) / h
    c1 = m0
    c0 = y0
    xf = float(x0)
    a = c3
    b = c2 - 3.0 * c3 * xf
    c = c1 - 2.0 * c2 * xf + 3.0 * c3 * xf * xf
    d = c0 - c1 * xf + c2 * xf * xf - c3 * xf * xf * xf
    return CubicModel(a, b, c, d)


def train_radix(keys, out_range: int) -> RadixModel:
    """Shift-only model mapping keys into [0, out_range).

    left_shift drops the prefix bits shared by the first and last key;
    right_shift keeps the top log2(out_range) of what remains. out_range
    must be a power of two, at least 2.
    """
    k = np.asarray(keys, dtype=np.uint64)
    if k.shape[0] == 0:
        raise ValueError("train_radix requires at least one key")
    if out_range < 2 or out_range & (out_range - 1):
        raise ValueError("out_range must be a power of two >= 2")
    r = out_range.bit_length() - 1
    first, last = int(k[0]), int(k[-1])
    if first == last:
        left = 64
    else:
        left = 64 - (first ^ last).bit_length()
    return RadixModel(left_shift=left, right_shift=64 - r)
