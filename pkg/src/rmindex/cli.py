"""Command-line interface.

Subcommands: gen (synthetic datasets), build (train and serialize an index),
lookup (benchmark one index), sweep (benchmark a config grid), guideline
(auto-configure within a budget), baseline (binary search). Benchmark
commands print CSV to stdout or --out; informational lines go to stderr.
Exits non-zero on any correctness failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import keyset as kset
from .bench import (
    baseline_result,
    bench_config,
    gen_workload,
    sweep,
    write_csv,
)
from .guideline import DEFAULT_THRESHOLD, GuidelineInput, configure
from .keyset import load_keyset, save_keyset
from .models import ModelKind
from .rmi import BoundKind, RmiConfig, deserialize_rmi, serialize_rmi, build_rmi, size_bytes
from .search import SearchAlgo


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _open_out(path: str | None):
    return open(path, "w") if path else sys.stdout


def _add_workload_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--queries", type=int, default=1_000_000, help="lookups per run")
    p.add_argument("--seed", type=int, default=42, help="workload sampling seed")
    p.add_argument("--runs", type=int, default=3, help="timed runs (median is reported)")
    p.add_argument("--out", help="write CSV here instead of stdout")


def _parse_sizes(text: str) -> list[int]:
    sizes = []
    for part in text.split(","):
        part = part.strip()
        sizes.append(1 << int(part[2:]) if part.startswith("2^") else int(part))
    return sizes


def cmd_gen(args: argparse.Namespace) -> int:
    kind = args.dataset
    if kind not in kset.GENERATORS:
        _info(f"unknown dataset kind {kind!r}; choose from {sorted(kset.GENERATORS)}")
        return 2
    if kind == "uniform":
        ks = kset.gen_uniform(args.n, args.seed, args.lo, args.hi)
    elif kind == "lognormal":
        ks = kset.gen_lognormal(args.n, args.seed, args.mu, args.sigma)
    elif kind == "clustered":
        ks = kset.gen_clustered(args.n, args.seed, args.clusters, args.spread)
    elif kind == "outliers":
        ks = kset.gen_outliers(args.n, args.seed, args.outlier_fraction, args.magnitude_shift)
    else:
        ks = kset.gen_duplicates(args.n, args.seed, args.distinct)
    save_keyset(ks, args.out)
    _info(f"wrote {ks.n} {kind} keys to {args.out}")
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    ks = load_keyset(args.dataset)
    cfg = RmiConfig(ModelKind(args.root), ModelKind(args.leaf), args.size, BoundKind(args.bounds))
    t0 = time.perf_counter()
    r = build_rmi(ks, cfg)
    build_s = time.perf_counter() - t0
    Path(args.out).write_bytes(serialize_rmi(r))
    _info(
        f"built {cfg.describe()} on {ks.n} keys in {build_s:.3f}s, "
        f"{size_bytes(r)} bytes -> {args.out}"
    )
    return 0


def cmd_lookup(args: argparse.Namespace) -> int:
    ks = load_keyset(args.dataset)
    workload = gen_workload(ks, args.queries, args.seed)
    search = SearchAlgo(args.search)
    if args.index:
        r = deserialize_rmi(Path(args.index).read_bytes())
        cfg = r.config
        from .bench import make_rmi_runner, run_lookup_bench
        from .metrics import error_stats, segment_stats
        from .rmi import segment_boundaries
        from .bench import BenchResult

        timing = run_lookup_bench(make_rmi_runner(r, ks, search), ks, workload, runs=args.runs)
        stats = error_stats(r, ks)
        seg = segment_stats(segment_boundaries(r.root, ks, cfg.layer2_size), ks.n)
        row = BenchResult(
            dataset=args.dataset,
            root=str(cfg.root_type),
            leaf=str(cfg.leaf_type),
            layer2_size=cfg.layer2_size,
            bounds=str(cfg.bound_kind),
            search=str(search),
            size_bytes=size_bytes(r),
            build_s=0.0,
            lookup_ns=timing.avg_lookup_ns,
            median_abs_err=stats.median_abs_error,
            mean_log2_err=stats.mean_log2_error,
            empty_frac=seg.empty_fraction,
            largest_seg=seg.largest_segment,
            median_interval=stats.median_interval_size,
        )
    else:
        cfg = RmiConfig(ModelKind(args.root), ModelKind(args.leaf), args.size, BoundKind(args.bounds))
        row = bench_config(ks, args.dataset, cfg, search, workload, runs=args.runs)
    with _open_out(args.out) as out:
        write_csv([row], out)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    ks = load_keyset(args.dataset)
    workload = gen_workload(ks, args.queries, args.seed)
    roots = [ModelKind(v.strip()) for v in args.root.split(",")]
    leaves = [ModelKind(v.strip()) for v in args.leaf.split(",")]
    sizes = _parse_sizes(args.size)
    bounds = BoundKind(args.bounds)
    configs = [
        RmiConfig(root, leaf, size, bounds) for root in roots for leaf in leaves for size in sizes
    ]
    rows, failures = sweep(ks, args.dataset, configs, SearchAlgo(args.search), workload, runs=args.runs)
    with _open_out(args.out) as out:
        write_csv(rows, out)
    for cfg, exc in failures:
        _info(f"FAILED {cfg.describe()}: {exc}")
    return 1 if failures else 0


def cmd_guideline(args: argparse.Namespace) -> int:
    ks = load_keyset(args.dataset)
    outcome = configure(ks, GuidelineInput(budget=args.budget, threshold=args.threshold))
    _info(
        f"guideline: {outcome.strategy} at layer2_size {outcome.rmi.layer2_size}, "
        f"mean log2 error {outcome.measured_mean_log2_error:.3f}, "
        f"{outcome.rmis_trained} index(es) trained, {size_bytes(outcome.rmi)} bytes"
    )
    workload = gen_workload(ks, args.queries, args.seed)
    row = bench_config(ks, args.dataset, outcome.rmi.config, outcome.search, workload, runs=args.runs)
    with _open_out(args.out) as out:
        write_csv([row], out)
    return 0


def cmd_baseline(args: argparse.Namespace) -> int:
    ks = load_keyset(args.dataset)
    workload = gen_workload(ks, args.queries, args.seed)
    row = baseline_result(ks, args.dataset, workload, runs=args.runs)
    with _open_out(args.out) as out:
        write_csv([row], out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmindex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--dataset", required=True, help="uniform|lognormal|clustered|outliers|duplicates")
    p.add_argument("--n", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output key file")
    p.add_argument("--lo", type=int, default=0)
    p.add_argument("--hi", type=int, default=kset.KEY_SPACE - 1)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--clusters", type=int, default=100)
    p.add_argument("--spread", type=int, default=1 << 32)
    p.add_argument("--outlier-fraction", type=float, default=1e-4)
    p.add_argument("--magnitude-shift", type=int, default=40)
    p.add_argument("--distinct", type=int, default=1000)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="train an index and write it to disk")
    p.add_argument("--dataset", required=True, help="key file")
    p.add_argument("--root", default="LS", help="LR|LS|CS|RX")
    p.add_argument("--leaf", default="LR", help="LR|LS")
    p.add_argument("--size", type=int, required=True, help="second-layer size (power of two)")
    p.add_argument("--bounds", default="NB", help="NB|GAbs|GInd|LAbs|LInd")
    p.add_argument("--out", required=True, help="output index file")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("lookup", help="benchmark lookups for one configuration")
    p.add_argument("--dataset", required=True, help="key file")
    p.add_argument("--index", help="serialized index file (otherwise build from flags)")
    p.add_argument("--root", default="LS")
    p.add_argument("--leaf", default="LR")
    p.add_argument("--size", type=int, default=1 << 10)
    p.add_argument("--bounds", default="NB")
    p.add_argument("--search", default="MExp", help="Bin|MBin|MLin|MExp")
    _add_workload_flags(p)
    p.set_defaults(func=cmd_lookup)

    p = sub.add_parser("sweep", help="benchmark a grid of configurations")
    p.add_argument("--dataset", required=True, help="key file")
    p.add_argument("--root", default="LR,LS,CS,RX", help="comma-separated root types")
    p.add_argument("--leaf", default="LR,LS", help="comma-separated leaf types")
    p.add_argument("--size", default="2^6,2^8,2^10,2^12,2^14,2^16,2^18", help="comma-separated sizes (accepts 2^k)")
    p.add_argument("--bounds", default="LAbs")
    p.add_argument("--search", default="Bin")
    _add_workload_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("guideline", help="auto-configure an index within a byte budget")
    p.add_argument("--dataset", required=True, help="key file")
    p.add_argument("--budget", type=int, required=True, help="index size budget in bytes")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    _add_workload_flags(p)
    p.set_defaults(func=cmd_guideline)

    p = sub.add_parser("baseline", help="benchmark binary search without an index")
    p.add_argument("--dataset", required=True, help="key file")
    _add_workload_flags(p)
    p.set_defaults(func=cmd_baseline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # correctness failures surface as non-zero exit
        _info(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
