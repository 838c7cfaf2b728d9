"""Measurement harness: workloads, timed lookups and builds, config sweeps.

Protocol: queries are sampled uniformly at random (with replacement, fixed
seed) from the keys themselves. A lookup benchmark executes the whole query
array per run, accumulates a wrapping checksum of the returned positions,
and requires that checksum to equal the oracle's before any timing is
reported; reported time is the median run's total divided by the query
count. Timed loops are single-threaded.

CSV schema, one row per benchmarked configuration:
dataset,root,leaf,layer2_size,bounds,search,size_bytes,build_s,lookup_ns,
median_abs_err,mean_log2_err,empty_frac,largest_seg,median_interval
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable, IO, Iterable, Sequence

import numpy as np

from . import prng
from .keyset import KeySet
from .metrics import error_stats, segment_stats
from .rmi import Rmi, RmiConfig, build_rmi, lookup_batch, segment_boundaries, size_bytes
from .search import SearchAlgo

logger = logging.getLogger(__name__)

CSV_HEADER = (
    "dataset,root,leaf,layer2_size,bounds,search,size_bytes,build_s,lookup_ns,"
    "median_abs_err,mean_log2_err,empty_frac,largest_seg,median_interval"
)

Runner = Callable[[np.ndarray], np.ndarray]


class BenchmarkError(RuntimeError):
    """A benchmark produced wrong answers; its timings are meaningless."""


@dataclass(frozen=True)
class Workload:
    """Query keys sampled from a KeySet, reproducible from (keyset, seed, m)."""

    queries: np.ndarray
    seed: int
    m: int


def gen_workload(ks: KeySet, m: int, seed: int) -> Workload:
    """`m` present keys drawn uniformly with replacement."""
    if m < 1:
        raise ValueError("m must be at least 1")
    idx = prng.bounded_u64(seed, m, ks.n, stream=7)
    queries = ks.keys[idx]
    queries.setflags(write=False)
    return Workload(queries=queries, seed=seed, m=m)


def checksum_positions(positions: np.ndarray) -> int:
    """Wrapping 64-bit sum; defeats dead-code elimination, pins determinism."""
    return int(np.sum(positions.astype(np.uint64, copy=False), dtype=np.uint64))


@dataclass(frozen=True)
class LookupTiming:
    avg_lookup_ns: float  # median run total / query count
    checksum: int
    run_seconds: tuple[float, ...]


def run_lookup_bench(
    runner: Runner,
    ks: KeySet,
    workload: Workload,
    runs: int = 3,
    timer: Callable[[], float] = time.perf_counter,
    oracle_checksum: int | None = None,
) -> LookupTiming:
    """Time `runner` over the workload, gated on oracle correctness.

    `oracle_checksum` lets callers benchmarking many runners over one
    workload compute the oracle once; it must come from the same keyset and
    workload.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    if oracle_checksum is None:
        oracle_ck = checksum_positions(np.searchsorted(ks.keys, workload.queries))
    else:
        oracle_ck = oracle_checksum
    totals: list[float] = []
    checksums: list[int] = []
    for _ in range(runs):
        t0 = timer()
        positions = runner(workload.queries)
        t1 = timer()
        totals.append(t1 - t0)
        checksums.append(checksum_positions(np.asarray(positions)))
    if any(ck != oracle_ck for ck in checksums):
        raise BenchmarkError(
            f"checksum mismatch vs oracle: got {checksums}, expected {oracle_ck}"
        )
    median_total = float(np.median(totals))
    return LookupTiming(
        avg_lookup_ns=median_total / workload.m * 1e9,
        checksum=oracle_ck,
        run_seconds=tuple(totals),
    )


def run_build_bench(ks: KeySet, cfg: RmiConfig, repeats: int = 3) -> float:
    """Median wall-clock seconds to train the index (data already loaded)."""
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        build_rmi(ks, cfg)
        t1 = time.perf_counter()
        times.append(t1 - t0)
    return float(np.median(times))


def make_rmi_runner(r: Rmi, ks: KeySet, algo: SearchAlgo) -> Runner:
    def run(queries: np.ndarray) -> np.ndarray:
        return lookup_batch(r, ks, queries, algo)

    return run


def make_binary_search_runner(ks: KeySet) -> Runner:
    keys = ks.keys

    def run(queries: np.ndarray) -> np.ndarray:
        return np.searchsorted(keys, queries)

    return run


@dataclass(frozen=True)
class BenchResult:
    dataset: str
    root: str
    leaf: str
    layer2_size: int
    bounds: str
    search: str
    size_bytes: int
    build_s: float
    lookup_ns: float
    median_abs_err: float
    mean_log2_err: float
    empty_frac: float
    largest_seg: int
    median_interval: float

    def csv_row(self) -> str:
        return ",".join(
            (
                self.dataset,
                self.root,
                self.leaf,
                str(self.layer2_size),
                self.bounds,
                self.search,
                str(self.size_bytes),
                f"{self.build_s:.6f}",
                f"{self.lookup_ns:.1f}",
                f"{self.median_abs_err:.6g}",
                f"{self.mean_log2_err:.6g}",
                f"{self.empty_frac:.6g}",
                str(self.largest_seg),
                f"{self.median_interval:.6g}",
            )
        )


def bench_config(
    ks: KeySet,
    dataset: str,
    cfg: RmiConfig,
    search: SearchAlgo,
    workload: Workload,
    runs: int = 3,
) -> BenchResult:
    """Build, measure metrics, and time lookups for one configuration."""
    t0 = time.perf_counter()
    r = build_rmi(ks, cfg)
    build_s = time.perf_counter() - t0
    stats = error_stats(r, ks)
    seg = segment_stats(segment_boundaries(r.root, ks, cfg.layer2_size), ks.n)
    timing = run_lookup_bench(make_rmi_runner(r, ks, search), ks, workload, runs=runs)
    return BenchResult(
        dataset=dataset,
        root=str(cfg.root_type),
        leaf=str(cfg.leaf_type),
        layer2_size=cfg.layer2_size,
        bounds=str(cfg.bound_kind),
        search=str(search),
        size_bytes=size_bytes(r),
        build_s=build_s,
        lookup_ns=timing.avg_lookup_ns,
        median_abs_err=stats.median_abs_error,
        mean_log2_err=stats.mean_log2_error,
        empty_frac=seg.empty_fraction,
        largest_seg=seg.largest_segment,
        median_interval=stats.median_interval_size,
    )


def baseline_result(ks: KeySet, dataset: str, workload: Workload, runs: int = 3) -> BenchResult:
    """Binary search over the bare sorted array, as a schema-compatible row."""
    timing = run_lookup_bench(make_binary_search_runner(ks), ks, workload, runs=runs)
    return BenchResult(
        dataset=dataset,
        root="-",
        leaf="-",
        layer2_size=0,
        bounds="-",
        search="Bin",
        size_bytes=0,
        build_s=0.0,
        lookup_ns=timing.avg_lookup_ns,
        median_abs_err=float("nan"),
        mean_log2_err=float("nan"),
        empty_frac=float("nan"),
        largest_seg=0,
        median_interval=float(ks.n),
    )


def sweep(
    ks: KeySet,
    dataset: str,
    configs: Sequence[RmiConfig],
    search: SearchAlgo,
    workload: Workload,
    runs: int = 3,
) -> tuple[list[BenchResult], list[tuple[RmiConfig, Exception]]]:
    """Benchmark a grid of configurations; failures are recorded, not fatal.

    Rows come back sorted by (root, leaf, layer2_size).
    """
    ordered = sorted(configs, key=lambda c: (str(c.root_type), str(c.leaf_type), c.layer2_size))
    rows: list[BenchResult] = []
    failures: list[tuple[RmiConfig, Exception]] = []
    for cfg in ordered:
        try:
            rows.append(bench_config(ks, dataset, cfg, search, workload, runs=runs))
        except Exception as exc:  # per-row isolation is the contract
            logger.warning("sweep row %s failed: %s", cfg.describe(), exc)
            failures.append((cfg, exc))
    return rows, failures


def write_csv(rows: Iterable[BenchResult], out: IO[str]) -> None:
    out.write(CSV_HEADER + "\n")
    for row in rows:
        out.write(row.csv_row() + "\n")
