"""Auto-configuration: pick a good index for a byte budget without enumeration.

Procedure: train LS->LR without bounds at the largest second-layer size the
budget allows, measure its mean log2 prediction error, and keep it with
model-biased exponential search if the error is at or below the threshold.
Otherwise train LS->LR with local absolute bounds (again at the largest
size its own accounting allows) and use plain binary search inside the
bounded interval. At most two indexes are ever trained.

The default threshold of 5.8 expresses where bound-free exponential search
stops paying off; it is hardware dependent. To recalibrate: sweep indexes of
both strategies across sizes on a representative dataset, record mean log2
error and measured lookup time per configuration, and set the threshold to
the error at which the two strategies' lookup times cross.
"""

from __future__ import annotations

from dataclasses import dataclass

from .keyset import KeySet
from .metrics import mean_log2_error
from .models import ModelKind
from .rmi import (
    MAX_LAYER2_SIZE,
    MIN_LAYER2_SIZE,
    BoundKind,
    Rmi,
    RmiConfig,
    build_rmi,
    index_size_bytes,
)
from .search import SearchAlgo

DEFAULT_THRESHOLD = 5.8


@dataclass(frozen=True)
class GuidelineInput:
    budget: int  # bytes
    threshold: float = DEFAULT_THRESHOLD
    min_layer2_size: int = MIN_LAYER2_SIZE
    max_layer2_size: int = MAX_LAYER2_SIZE

    def __post_init__(self) -> None:
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        for s in (self.min_layer2_size, self.max_layer2_size):
            if s & (s - 1) or not MIN_LAYER2_SIZE <= s <= MAX_LAYER2_SIZE:
                raise ValueError("layer size limits must be powers of two in [2**6, 2**25]")
        if self.min_layer2_size > self.max_layer2_size:
            raise ValueError("min_layer2_size exceeds max_layer2_size")


@dataclass(frozen=True)
class GuidelineOutcome:
    rmi: Rmi
    bound_kind: BoundKind
    search: SearchAlgo
    measured_mean_log2_error: float
    rmis_trained: int

    @property
    def strategy(self) -> str:
        return f"{self.bound_kind}+{self.search}"


def max_layer_size_within_budget(
    budget: int,
    bound_kind: BoundKind,
    root_type: ModelKind = ModelKind.LS,
    min_size: int = MIN_LAYER2_SIZE,
    max_size: int = MAX_LAYER2_SIZE,
) -> int:
    """Largest power-of-two second-layer size whose index fits the budget."""
    bound_kind = BoundKind(bound_kind)
    if index_size_bytes(root_type, min_size, bound_kind) > budget:
        raise ValueError(
            f"budget of {budget} bytes cannot fit the minimum configuration "
            f"({index_size_bytes(root_type, min_size, bound_kind)} bytes)"
        )
    size = min_size
    while size < max_size and index_size_bytes(root_type, size * 2, bound_kind) <= budget:
        size *= 2
    return size


def configure(ks: KeySet, inp: GuidelineInput) -> GuidelineOutcome:
    """Run the procedure on a dataset: returns the index and strategy to use."""
    size_nb = max_layer_size_within_budget(
        inp.budget, BoundKind.NB, min_size=inp.min_layer2_size, max_size=inp.max_layer2_size
    )
    candidate = build_rmi(ks, RmiConfig(ModelKind.LS, ModelKind.LR, size_nb, BoundKind.NB))
    err = mean_log2_error(candidate, ks)
    if err <= inp.threshold:
        return GuidelineOutcome(
            rmi=candidate,
            bound_kind=BoundKind.NB,
            search=SearchAlgo.MEXP,
            measured_mean_log2_error=err,
            rmis_trained=1,
        )
    size_labs = max_layer_size_within_budget(
        inp.budget, BoundKind.LABS, min_size=inp.min_layer2_size, max_size=inp.max_layer2_size
    )
    bounded = build_rmi(ks, RmiConfig(ModelKind.LS, ModelKind.LR, size_labs, BoundKind.LABS))
    return GuidelineOutcome(
        rmi=bounded,
        bound_kind=BoundKind.LABS,
        search=SearchAlgo.BIN,
        measured_mean_log2_error=err,
        rmis_trained=2,
    )
