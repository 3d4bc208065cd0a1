"""Command line interface: gen, bench, sweep, inspect.

Exit codes: 0 on success, 2 on parameter or input errors, 3 when a sweep
finished with at least one failed row.

The default output directory comes from CENTERSPACE_OUT_DIR (falling back
to the current directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .bench import (
    BenchConfig,
    STRATEGY_CHOICES,
    SYSTEM_CHOICES,
    generate_dataset,
    run_bench,
    sweep,
    write_csv,
    write_json,
)
from .errors import InputError, ParameterError, StoreError
from .store import (
    EMB_MAGIC,
    LABELS_MAGIC,
    MAP_MAGIC,
    _read_emb_header,
    load_labels,
    load_map,
)

OUT_DIR_ENV = "CENTERSPACE_OUT_DIR"


def _default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV, ".")


def _add_dataset_flags(p: argparse.ArgumentParser, classes_list: bool = False) -> None:
    if classes_list:
        p.add_argument("--n-classes", required=True,
                       help="comma-separated list of labeled-center counts")
    else:
        p.add_argument("--n-classes", type=int, required=True,
                       help="number of labeled centers")
    p.add_argument("--m", type=int, default=2, help="+1 entries per center")
    p.add_argument("--k", type=int, default=2, help="-1 entries per center")
    p.add_argument("--dim", type=int, default=None,
                   help="latent dimension (default: smallest that fits n-classes)")
    p.add_argument("--queries", type=int, default=10_000, help="query embeddings to draw")
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--noise-sigma", type=float, default=0.1,
                   help="stddev of Gaussian noise added around each center")
    p.add_argument("--system", choices=SYSTEM_CHOICES, default="plain")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=_default_out_dir())
    p.add_argument("--prefix", default="bench", help="filename prefix for outputs")


def _add_bench_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=STRATEGY_CHOICES, default="alg1",
                   help="alg1 may return -1; others resolve to the closest labeled center")
    p.add_argument("--reps", type=int, default=3, help="timed repetitions per stage")
    p.add_argument("--warmup", type=int, default=1, help="untimed rounds per stage")
    p.add_argument("--tf-seconds", type=float, default=0.0,
                   help="constant stand-in for model forward time")
    p.add_argument("--mem-budget", type=int, default=2 << 30,
                   help="bytes allowed for the cosine baseline's prototype matrix")
    p.add_argument("--parallel", type=int, default=0,
                   help="worker threads for the separately reported throughput mode")
    p.add_argument("--monitor-threshold", type=int, default=None,
                   help="alert after this many hits on one unlabeled center")
    p.add_argument("--monitor-window", type=int, default=None,
                   help="sliding window length (in predictions) for monitor counts")
    p.add_argument("--out", choices=("csv", "json"), default="json")
    p.add_argument("--out-path", default=None, help="report destination (default stdout)")


def _config_from_args(args, n_classes: int | None = None) -> BenchConfig:
    return BenchConfig(
        n_classes=n_classes if n_classes is not None else args.n_classes,
        m=args.m,
        k=args.k,
        n=args.dim,
        query_count=args.queries,
        batch_size=args.batch_size,
        noise_sigma=args.noise_sigma,
        strategy=getattr(args, "strategy", "alg1"),
        system=args.system,
        repetitions=getattr(args, "reps", 3),
        warmup=getattr(args, "warmup", 1),
        seed=args.seed,
        tf_seconds=getattr(args, "tf_seconds", 0.0),
        mem_budget_bytes=getattr(args, "mem_budget", 2 << 30),
        parallel=getattr(args, "parallel", 0),
        monitor_threshold=getattr(args, "monitor_threshold", None),
        monitor_window=getattr(args, "monitor_window", None),
    )


def _emit(rows, args) -> None:
    writer = write_csv if args.out == "csv" else write_json
    if args.out_path is None:
        writer(rows, sys.stdout)
        return
    with open(args.out_path, "w") as fh:
        writer(rows, fh)


def _cmd_gen(args) -> int:
    config = _config_from_args(args)
    data = generate_dataset(config, args.out_dir, args.prefix)
    info = {
        "n": data.n,
        "maps": [str(p) for p in data.map_paths],
        "embeddings": str(data.emb_path),
        "truth": str(data.truth_path),
    }
    json.dump(info, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_bench(args) -> int:
    from .bench import SweepRow

    config = _config_from_args(args)
    report = run_bench(config, workdir=args.out_dir, alert_stream=sys.stderr)
    _emit([SweepRow(config, report)], args)
    return 0


def _cmd_sweep(args) -> int:
    sizes = [int(tok) for tok in str(args.n_classes).split(",") if tok]
    if not sizes:
        raise ParameterError("--n-classes must list at least one size")
    base = _config_from_args(args, n_classes=sizes[0])
    configs = [replace(base, n_classes=s) for s in sizes]
    rows = sweep(configs, workdir=args.out_dir, alert_stream=sys.stderr)
    _emit(rows, args)
    return 3 if any(r.report is None for r in rows) else 0


def _cmd_inspect(args) -> int:
    path = Path(args.path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        fh.seek(0)
        if magic == MAP_MAGIC:
            label_map = load_map(fh)
            info = {
                "kind": "label_map",
                "n": label_map.params.n,
                "m": label_map.params.m,
                "k": label_map.params.k,
                "n_classes": label_map.n_classes,
                "n_system": label_map.n_system,
                "unlabeled": label_map.unlabeled_count,
                "label_fraction": float(label_map.label_fraction),
            }
        elif magic == EMB_MAGIC:
            n, rows = _read_emb_header(fh)
            info = {"kind": "embeddings", "n": n, "rows": rows, "dtype": "float32"}
        elif magic == LABELS_MAGIC:
            labels = load_labels(fh)
            info = {
                "kind": "labels",
                "rows": int(labels.shape[0]),
                "distinct": int(len(set(labels.tolist()))),
            }
        else:
            raise InputError(f"unrecognized file signature {magic!r}")
    json.dump(info, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="centerspace",
        description="Closest-center label prediction benchmarks and datasets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a dataset (map, embeddings, truth)")
    _add_dataset_flags(p_gen)
    p_gen.set_defaults(fn=_cmd_gen)

    p_bench = sub.add_parser("bench", help="time one configuration")
    _add_dataset_flags(p_bench)
    _add_bench_flags(p_bench)
    p_bench.set_defaults(fn=_cmd_bench)

    p_sweep = sub.add_parser("sweep", help="time several class counts")
    _add_dataset_flags(p_sweep, classes_list=True)
    _add_bench_flags(p_sweep)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_inspect = sub.add_parser("inspect", help="describe a stored file")
    p_inspect.add_argument("path")
    p_inspect.set_defaults(fn=_cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParameterError, InputError, StoreError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
