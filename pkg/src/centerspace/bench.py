"""Benchmark harness: synthetic datasets, staged timings, speedup reports.

The pipeline is timed in four stages per run: t_d (streaming batches off
disk and decoding them), t_f (a user-supplied constant standing in for
model forward time, default 0), t_c (the exhaustive cosine-scan baseline),
and t_n (the index-pattern search). Both search stages consume identical
decoded batches in identical order. Each stage runs fixed warmup rounds
and then ``repetitions`` timed rounds on a monotonic clock; medians with
median absolute deviation are reported, and the speedup coefficients are
derived as k_s = t_c / t_n and k_t = (t_d + t_f + t_c) / (t_d + t_f + t_n).

When the baseline's prototype matrix would not fit the configured memory
budget, t_c and both coefficients go unmeasured (reported as dashes) while
t_n still runs; the pattern search needs no such matrix.
"""

from __future__ import annotations

import json
import math
import platform
import statistics
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import islice
from pathlib import Path
from typing import Callable, Optional, Sequence, TextIO

import numpy as np

from . import __version__
from .classifier import (
    LabelMap,
    label_map_from_codes,
    predict,
    predict_labels,
)
from .errors import ParameterError
from .exact import CenterMatrix, cossim_argmax
from .graph_search import closest_labeled, resolve_unlabeled
from .monitor import UnlabeledMonitor
from .projection import predict_union, project
from .store import BatchWriter, load_labels, save_labels, save_map, stream_batches
from .systems import SystemParams, choose_min_dim, count_vectors, enumerate_codes

GENERATOR_ID = "numpy.random.default_rng(PCG64)"

STRATEGY_CHOICES = ("alg1", "bruteforce", "bestfirst", "dfs")
_STRATEGY_IMPL = {"bruteforce": "brute_force", "bestfirst": "best_first", "dfs": "dfs_paper"}
SYSTEM_CHOICES = ("plain", "projected")


@dataclass
class BenchConfig:
    """One experiment row: system shape, dataset size, measurement protocol."""

    n_classes: int
    m: int = 2
    k: int = 2
    n: Optional[int] = None  # None picks the smallest dimension that fits
    query_count: int = 10_000
    batch_size: int = 256
    noise_sigma: float = 0.1
    strategy: str = "alg1"
    system: str = "plain"
    repetitions: int = 3
    warmup: int = 1
    seed: int = 0
    tf_seconds: float = 0.0
    mem_budget_bytes: int = 2 << 30
    oracle_dtype: str = "float32"
    parallel: int = 0
    monitor_threshold: Optional[int] = None
    monitor_window: Optional[int] = None

    def __post_init__(self):
        if self.query_count < 1:
            raise ParameterError("query_count must be at least 1")
        if self.repetitions < 1:
            raise ParameterError("repetitions must be at least 1")
        if self.warmup < 0:
            raise ParameterError("warmup must be non-negative")
        if self.batch_size < 1:
            raise ParameterError("batch_size must be positive")
        if self.noise_sigma < 0:
            raise ParameterError("noise_sigma must be non-negative")
        if self.strategy not in STRATEGY_CHOICES:
            raise ParameterError(f"strategy must be one of {STRATEGY_CHOICES}")
        if self.system not in SYSTEM_CHOICES:
            raise ParameterError(f"system must be one of {SYSTEM_CHOICES}")
        if self.tf_seconds < 0:
            raise ParameterError("tf_seconds must be non-negative")

    def resolve_dimension(self) -> int:
        """Dimension actually used, honoring the minimum-size rule."""
        auto = choose_min_dim(self.n_classes, self.m, self.k)
        if self.system == "projected":
            # union capacity at dimension n equals the base count at n + 1
            auto -= 1
        if self.n is None:
            return auto
        if self.n < auto:
            raise ParameterError(
                f"dimension {self.n} holds fewer than {self.n_classes} centers "
                f"(minimum is {auto})"
            )
        return self.n


@dataclass
class GeneratedData:
    """Handles to one generated dataset on disk."""

    maps: list[LabelMap]
    map_paths: list[Path]
    emb_path: Path
    truth_path: Path
    n: int


@dataclass
class BenchReport:
    """Measured stage times and derived speedups for one experiment."""

    config: dict
    n: int
    t_d: Optional[float] = None
    t_f: Optional[float] = None
    t_c: Optional[float] = None
    t_n: Optional[float] = None
    mad_t_d: Optional[float] = None
    mad_t_c: Optional[float] = None
    mad_t_n: Optional[float] = None
    k_s: Optional[float] = None
    k_t: Optional[float] = None
    t_n_parallel: Optional[float] = None
    accuracy: Optional[float] = None
    alert_count: int = 0
    notes: str = ""
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def speedup_coefficients(t_d, t_f, t_c, t_n):
    """Search and total speedup ratios from the four stage times."""
    k_s = t_c / t_n
    k_t = (t_d + t_f + t_c) / (t_d + t_f + t_n)
    return k_s, k_t


def estimate_oracle_bytes(n_rows: int, n: int) -> int:
    """Up-front size estimate of the baseline's prototype matrix and norms."""
    return n_rows * n * 4 + n_rows * 8


def _median_mad(values: Sequence[float]):
    med = statistics.median(values)
    mad = statistics.median([abs(v - med) for v in values])
    return med, mad


def _time_stage(fn: Callable[[], None], warmup: int, reps: int):
    for _ in range(warmup):
        fn()
    raw = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        raw.append(time.perf_counter() - t0)
    med, mad = _median_mad(raw)
    return med, mad, raw


def _subsystem_center_arrays(params: SystemParams, first: int):
    """Index arrays for the first ``first`` canonical codes of a system."""
    maxes = np.empty((first, params.m), dtype=np.int64)
    mins = np.empty((first, params.k), dtype=np.int64)
    for i, code in enumerate(islice(enumerate_codes(params), first)):
        maxes[i] = code.maxes
        mins[i] = code.mins
    return maxes, mins


def generate_dataset(
    config: BenchConfig, out_dir, prefix: str = "bench"
) -> GeneratedData:
    """Write a label map, a query embedding file, and ground-truth labels.

    Labels go to the first n_classes centers in canonical order. Each query
    is a uniformly drawn labeled center plus Gaussian noise, normalized.
    The same seed reproduces the files byte for byte.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n = config.resolve_dimension()

    if config.system == "plain":
        params = SystemParams(n, config.m, config.k)
        if count_vectors(params) < config.n_classes:
            raise ParameterError(
                f"system {params} holds {count_vectors(params)} centers, "
                f"fewer than n_classes={config.n_classes}"
            )
        subsystems = [params]
    else:
        pp = project(SystemParams(n + 1, config.m, config.k))
        if pp.total < config.n_classes:
            raise ParameterError(
                f"projected union at dimension {n} holds {pp.total} centers, "
                f"fewer than n_classes={config.n_classes}"
            )
        subsystems = list(pp.subsystems)

    # canonical label order: subsystems in precedence order, codes lexicographic
    remaining = config.n_classes
    sub_sizes = []
    for sp in subsystems:
        take = min(remaining, count_vectors(sp))
        sub_sizes.append(take)
        remaining -= take
    maps: list[LabelMap] = []
    arrays = []
    offset = 0
    for sp, take in zip(subsystems, sub_sizes):
        codes = islice(enumerate_codes(sp), take)
        maps.append(label_map_from_codes(codes, range(offset, offset + take), sp))
        arrays.append(_subsystem_center_arrays(sp, take))
        offset += take

    map_paths = []
    for i, mp in enumerate(maps):
        suffix = f".map{i}" if len(maps) > 1 else ".map"
        path = out_dir / f"{prefix}{suffix}"
        with open(path, "wb") as fh:
            save_map(mp, fh)
        map_paths.append(path)

    rng = np.random.default_rng(config.seed)
    truth = rng.integers(0, config.n_classes, size=config.query_count, dtype=np.int64)
    bounds = np.cumsum([0] + sub_sizes)

    emb_path = out_dir / f"{prefix}.emb"
    norms_by_sub = [math.sqrt(sp.m + sp.k) for sp in subsystems]
    with open(emb_path, "wb") as fh:
        writer = BatchWriter(fh, n)
        for start in range(0, config.query_count, config.batch_size):
            t = truth[start : start + config.batch_size]
            b = t.shape[0]
            rows = np.zeros((b, n), dtype=np.float64)
            r_idx = np.arange(b)[:, None]
            for s, (maxes, mins) in enumerate(arrays):
                inside = (t >= bounds[s]) & (t < bounds[s + 1])
                if not inside.any():
                    continue
                local = t[inside] - bounds[s]
                sel = np.flatnonzero(inside)[:, None]
                if maxes.shape[1]:
                    rows[sel, maxes[local]] = 1.0
                if mins.shape[1]:
                    rows[sel, mins[local]] = -1.0
            if config.noise_sigma:
                rows += config.noise_sigma * rng.standard_normal((b, n))
            norm = np.linalg.norm(rows, axis=1, keepdims=True)
            if not norm.all():  # vanishing only for pathological noise draws
                norm[norm == 0] = 1.0
            writer.append((rows / norm).astype(np.float32))
        writer.close()

    truth_path = out_dir / f"{prefix}.truth"
    with open(truth_path, "wb") as fh:
        save_labels(truth, fh)
    return GeneratedData(maps, map_paths, emb_path, truth_path, n)


def _drain_stream(path: Path, batch_size: int) -> int:
    count = 0
    with open(path, "rb") as fh:
        for batch in stream_batches(fh, batch_size, str(path)):
            count += len(batch)
    return count


def _load_all_batches(path: Path, batch_size: int):
    with open(path, "rb") as fh:
        return list(stream_batches(fh, batch_size, str(path)))


def _resolve_union_unlabeled(rows, labels, maps, strategy):
    out = labels.copy()
    for r in np.flatnonzero(labels < 0):
        best_sim, best_label = -np.inf, -1
        for mp in maps:
            if mp.n_classes == 0:
                continue
            p = closest_labeled(rows[r], mp, strategy)
            sim = (
                rows[r][list(p.code.maxes)].sum() - rows[r][list(p.code.mins)].sum()
            ) / mp.params.norm
            if sim > best_sim:
                best_sim, best_label = sim, p.label
        out[r] = best_label
    return out


def run_bench(
    config: BenchConfig,
    data: Optional[GeneratedData] = None,
    workdir=None,
    alert_stream: Optional[TextIO] = None,
) -> BenchReport:
    """Measure every stage for one configuration and derive the speedups."""
    own_tmp = None
    if data is None:
        if workdir is None:
            own_tmp = tempfile.TemporaryDirectory(prefix="centerspace-bench-")
            workdir = own_tmp.name
        data = generate_dataset(config, workdir)
    try:
        return _run_bench_on(config, data, alert_stream)
    finally:
        if own_tmp is not None:
            own_tmp.cleanup()


def _run_bench_on(
    config: BenchConfig, data: GeneratedData, alert_stream: Optional[TextIO]
) -> BenchReport:
    maps = data.maps
    report = BenchReport(
        config=asdict(config),
        n=data.n,
        meta={
            "generator": GENERATOR_ID,
            "package": f"centerspace {__version__}",
            "python": platform.python_version(),
            "numpy": np.__version__,
            "machine": platform.machine(),
        },
    )
    notes = []

    # stage 1: data loading and decoding
    report.t_d, report.mad_t_d, _ = _time_stage(
        lambda: _drain_stream(data.emb_path, config.batch_size),
        config.warmup,
        config.repetitions,
    )
    # stage 2: stand-in forward time (constant, no model runs here)
    report.t_f = float(config.tf_seconds)

    batches = _load_all_batches(data.emb_path, config.batch_size)

    # stage 3: exhaustive cosine baseline, guarded by the memory budget
    total_centers = sum(mp.n_classes for mp in maps)
    oracle_bytes = estimate_oracle_bytes(total_centers, data.n)
    dtype = np.float32 if config.oracle_dtype == "float32" else np.float64
    if oracle_bytes > config.mem_budget_bytes:
        notes.append(
            f"cosine baseline skipped: needs ~{oracle_bytes} bytes, "
            f"budget {config.mem_budget_bytes}"
        )
    else:
        from .classifier import map_code_arrays

        parts = []
        for mp in maps:
            maxes, mins, _ = map_code_arrays(mp)
            parts.append(
                CenterMatrix.from_code_arrays(maxes, mins, data.n).matrix
            )
        centers = CenterMatrix.from_rows(np.vstack(parts))

        def scan_all():
            for batch in batches:
                cossim_argmax(batch.rows, centers, dtype=dtype)

        report.t_c, report.mad_t_c, _ = _time_stage(
            scan_all, config.warmup, config.repetitions
        )

    # stage 4: index-pattern search
    strategy = _STRATEGY_IMPL.get(config.strategy)

    def predict_plain_batch(rows):
        labels = predict_labels(rows, maps[0])
        if strategy is not None:
            labels = resolve_unlabeled(
                rows.astype(np.float64, copy=False), labels, maps[0], strategy
            )
        return labels

    def predict_union_batch(rows):
        labels, _, _ = predict_union(rows, maps)
        if strategy is not None:
            labels = _resolve_union_unlabeled(
                rows.astype(np.float64, copy=False), labels, maps, strategy
            )
        return labels

    predict_batch = (
        predict_plain_batch if config.system == "plain" else predict_union_batch
    )

    def search_all():
        for batch in batches:
            predict_batch(batch.rows)

    report.t_n, report.mad_t_n, _ = _time_stage(
        search_all, config.warmup, config.repetitions
    )

    if config.parallel > 0:
        def search_parallel():
            with ThreadPoolExecutor(max_workers=config.parallel) as pool:
                list(pool.map(lambda b: predict_batch(b.rows), batches))

        report.t_n_parallel, _, _ = _time_stage(
            search_parallel, config.warmup, config.repetitions
        )

    if report.t_c is not None:
        report.k_s, report.k_t = speedup_coefficients(
            report.t_d, report.t_f, report.t_c, report.t_n
        )

    predictions = np.concatenate([predict_batch(b.rows) for b in batches])
    with open(data.truth_path, "rb") as fh:
        truth = load_labels(fh)
    report.accuracy = float((predictions == truth).mean())

    if config.monitor_threshold is not None and config.system == "plain":
        mon = UnlabeledMonitor(
            maps[0], config.monitor_threshold, config.monitor_window
        )
        for batch in batches:
            for alert in mon.observe_all(predict(batch.rows, maps[0])):
                report.alert_count += 1
                if alert_stream is not None:
                    alert_stream.write(alert.to_json() + "\n")

    report.notes = "; ".join(notes)
    return report


@dataclass
class SweepRow:
    config: BenchConfig
    report: Optional[BenchReport]
    error: str = ""


def sweep(
    configs: Sequence[BenchConfig],
    workdir=None,
    alert_stream: Optional[TextIO] = None,
) -> list[SweepRow]:
    """Run every configuration, recording failures per row and continuing."""
    if not configs:
        raise ParameterError("sweep needs at least one configuration")
    rows = []
    for config in configs:
        try:
            rows.append(SweepRow(config, run_bench(config, workdir=workdir,
                                                   alert_stream=alert_stream)))
        except Exception as exc:  # keep sweeping; the row records the failure
            rows.append(SweepRow(config, None, f"{type(exc).__name__}: {exc}"))
    return rows


CSV_COLUMNS = [
    "exp",
    "n_classes",
    "n_dim",
    "batch_size",
    "t_d",
    "t_f",
    "t_c",
    "t_n",
    "K_s",
    "K_t",
    "accuracy",
    "notes",
]


def _fmt(value, digits=6) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def write_csv(rows: Sequence[SweepRow], out: TextIO) -> None:
    """Wide table, one experiment per line, dashes for unmeasured cells."""
    out.write(",".join(CSV_COLUMNS) + "\n")
    for i, row in enumerate(rows, start=1):
        if row.report is None:
            cells = [str(i), str(row.config.n_classes)] + ["-"] * 9 + [row.error]
        else:
            r = row.report
            cells = [
                str(i),
                str(row.config.n_classes),
                str(r.n),
                str(row.config.batch_size),
                _fmt(r.t_d),
                _fmt(r.t_f),
                _fmt(r.t_c),
                _fmt(r.t_n),
                _fmt(r.k_s),
                _fmt(r.k_t),
                _fmt(r.accuracy),
                r.notes,
            ]
        out.write(",".join(c.replace(",", ";") for c in cells) + "\n")


def write_long_csv(rows: Sequence[SweepRow], out: TextIO) -> None:
    """Plot-ready long format: one (experiment, metric, value) per line."""
    out.write("exp,n_classes,metric,value\n")
    for i, row in enumerate(rows, start=1):
        if row.report is None:
            out.write(f"{i},{row.config.n_classes},error,1\n")
            continue
        r = row.report
        for metric, value in [
            ("t_d", r.t_d),
            ("t_f", r.t_f),
            ("t_c", r.t_c),
            ("t_n", r.t_n),
            ("K_s", r.k_s),
            ("K_t", r.k_t),
            ("accuracy", r.accuracy),
        ]:
            if value is not None:
                out.write(f"{i},{row.config.n_classes},{metric},{value!r}\n")


def write_json(rows: Sequence[SweepRow], out: TextIO) -> None:
    payload = []
    for row in rows:
        payload.append(
            {
                "config": asdict(row.config),
                "report": row.report.to_dict() if row.report else None,
                "error": row.error,
            }
        )
    json.dump(payload, out, indent=2)
    out.write("\n")
