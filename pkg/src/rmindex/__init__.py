"""Learned index over sorted 64-bit keys.

A trained index maps a key through a root model to one of many second-layer
linear models, takes that model's output as a position estimate, and
corrects the estimate with a search bounded by stored prediction-error
envelopes (or unbounded, starting from the estimate). Includes dataset
tooling, analysis metrics, an auto-configuration guideline, and a benchmark
CLI (``rmindex``).
"""

from .bench import (
    BenchmarkError,
    BenchResult,
    LookupTiming,
    Workload,
    baseline_result,
    bench_config,
    gen_workload,
    run_build_bench,
    run_lookup_bench,
    sweep,
    write_csv,
)
from .guideline import (
    DEFAULT_THRESHOLD,
    GuidelineInput,
    GuidelineOutcome,
    configure,
    max_layer_size_within_budget,
)
from .keyset import (
    KeyFileFormatError,
    KeySet,
    gen_clustered,
    gen_duplicates,
    gen_lognormal,
    gen_outliers,
    gen_uniform,
    load_keyset,
    lower_bound,
    save_keyset,
)
from .metrics import (
    ErrorStats,
    SegmentStats,
    error_stats,
    mean_log2_error,
    median_abs_error,
    median_interval_size,
    segment_stats,
)
from .models import (
    CubicModel,
    LinearModel,
    Model,
    ModelKind,
    RadixModel,
    eval_model,
    train_cubic_spline,
    train_linear_regression,
    train_linear_spline,
    train_radix,
)
from .rmi import (
    BoundKind,
    ErrorBounds,
    GlobalAbsoluteBounds,
    GlobalIndividualBounds,
    IndexFormatError,
    LocalAbsoluteBounds,
    LocalIndividualBounds,
    NoBounds,
    Prediction,
    Rmi,
    RmiConfig,
    SegmentationError,
    build_rmi,
    clamp,
    compute_bounds,
    deserialize_rmi,
    get_model_index,
    index_size_bytes,
    lookup,
    lookup_batch,
    predict,
    predict_batch,
    segment_boundaries,
    serialize_rmi,
    size_bytes,
    with_bound_kind,
)
from .search import (
    SearchAlgo,
    SearchSpec,
    binary_search,
    model_biased_binary,
    model_biased_exponential,
    model_biased_exponential_probes,
    model_biased_linear,
)

__version__ = "0.1.0"
