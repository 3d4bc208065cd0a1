"""Bit-exact persistence for label maps and embedding batches.

Two little-endian formats, stable across platforms:

Label map ("LSCD", version 1)
    magic 4s | version u8 | n u16 | m u8 | k u8 | entry_count u64,
    then entry_count records of (m + k) u16 coordinate indexes (maxes then
    mins, each ascending) followed by a u64 label. Records are sorted by
    packed code key, so identical maps serialize to identical bytes.

Embedding file ("LSCE", version 1)
    magic 4s | version u8 | n u16 | row_count u64 | dtype tag u8 (1 = f32),
    then row-major little-endian float32 values. Storage is norm-agnostic;
    zero rows only fail later, at predict time.
"""

from __future__ import annotations

import struct
from typing import BinaryIO, Iterator

import numpy as np

from .classifier import EmbeddingBatch, LabelMap
from .errors import (
    BadMagicError,
    BadVersionError,
    IntegrityError,
    ParameterError,
    TruncatedError,
)
from .systems import CenterCode, SystemParams, check_code, pack_code, unpack_code

MAP_MAGIC = b"LSCD"
EMB_MAGIC = b"LSCE"
LABELS_MAGIC = b"LSCL"
VERSION = 1
DTYPE_F32 = 1

_MAP_HEADER = struct.Struct("<4sBHBBQ")
_EMB_HEADER = struct.Struct("<4sBHQB")
_LABELS_HEADER = struct.Struct("<4sBQ")


def _read_exact(source: BinaryIO, size: int, what: str) -> bytes:
    data = source.read(size)
    if len(data) != size:
        raise TruncatedError(f"stream ended while reading {what}")
    return data


def save_map(label_map: LabelMap, sink: BinaryIO) -> None:
    params = label_map.params
    sink.write(
        _MAP_HEADER.pack(
            MAP_MAGIC, VERSION, params.n, params.m, params.k, label_map.n_classes
        )
    )
    entry = struct.Struct(f"<{params.m + params.k}HQ")
    for key in sorted(label_map.entries):
        code = unpack_code(key, params)
        sink.write(entry.pack(*code.maxes, *code.mins, label_map.entries[key]))


def load_map(source: BinaryIO) -> LabelMap:
    raw = _read_exact(source, _MAP_HEADER.size, "map header")
    magic, version, n, m, k, entry_count = _MAP_HEADER.unpack(raw)
    if magic != MAP_MAGIC:
        raise BadMagicError(f"expected {MAP_MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise BadVersionError(f"unsupported map version {version}")
    try:
        params = SystemParams(n, m, k)
    except ParameterError as exc:
        raise IntegrityError(f"header violates system constraints: {exc}") from exc
    entry = struct.Struct(f"<{m + k}HQ")
    entries: dict[int, int] = {}
    labels_seen: set[int] = set()
    for _ in range(entry_count):
        fields = entry.unpack(_read_exact(source, entry.size, "map entry"))
        code = CenterCode(tuple(fields[:m]), tuple(fields[m : m + k]))
        try:
            check_code(code, params)
        except ParameterError as exc:
            raise IntegrityError(f"corrupt entry {code}: {exc}") from exc
        key = pack_code(code)
        if key in entries:
            raise IntegrityError(f"duplicate center {code}")
        label = fields[-1]
        if label in labels_seen:
            raise IntegrityError(f"duplicate label id {label}")
        labels_seen.add(label)
        entries[key] = label
    try:
        return LabelMap(params, entries)
    except ParameterError as exc:
        raise IntegrityError(str(exc)) from exc


def save_batch(rows: np.ndarray, sink: BinaryIO) -> None:
    A = np.asarray(rows)
    if A.ndim != 2:
        raise ParameterError(f"rows must be 2-D, got shape {A.shape}")
    sink.write(_EMB_HEADER.pack(EMB_MAGIC, VERSION, A.shape[1], A.shape[0], DTYPE_F32))
    sink.write(np.ascontiguousarray(A, dtype="<f4").tobytes())


class BatchWriter:
    """Incremental embedding-file writer for streams too large to hold."""

    def __init__(self, sink: BinaryIO, n: int):
        self._sink = sink
        self._n = n
        self._rows = 0
        self._header_at = sink.tell()
        sink.write(_EMB_HEADER.pack(EMB_MAGIC, VERSION, n, 0, DTYPE_F32))

    def append(self, rows: np.ndarray) -> None:
        A = np.asarray(rows)
        if A.ndim != 2 or A.shape[1] != self._n:
            raise ParameterError(f"chunk shape {A.shape} does not match n={self._n}")
        self._sink.write(np.ascontiguousarray(A, dtype="<f4").tobytes())
        self._rows += A.shape[0]

    def close(self) -> None:
        end = self._sink.tell()
        self._sink.seek(self._header_at)
        self._sink.write(_EMB_HEADER.pack(EMB_MAGIC, VERSION, self._n, self._rows, DTYPE_F32))
        self._sink.seek(end)


def _read_emb_header(source: BinaryIO):
    raw = _read_exact(source, _EMB_HEADER.size, "embedding header")
    magic, version, n, row_count, dtype_tag = _EMB_HEADER.unpack(raw)
    if magic != EMB_MAGIC:
        raise BadMagicError(f"expected {EMB_MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise BadVersionError(f"unsupported embedding version {version}")
    if dtype_tag != DTYPE_F32:
        raise IntegrityError(f"unknown dtype tag {dtype_tag}")
    return n, row_count


def load_batch(source: BinaryIO, source_name: str = "stream") -> EmbeddingBatch:
    n, row_count = _read_emb_header(source)
    payload = _read_exact(source, row_count * n * 4, "embedding payload")
    rows = np.frombuffer(payload, dtype="<f4").reshape(row_count, n)
    return EmbeddingBatch(rows.astype(np.float32), source_name)


def save_labels(labels: np.ndarray, sink: BinaryIO) -> None:
    """Ground-truth sidecar ("LSCL"): header then little-endian int64 ids."""
    arr = np.asarray(labels, dtype="<i8")
    if arr.ndim != 1:
        raise ParameterError("labels must be 1-D")
    sink.write(_LABELS_HEADER.pack(LABELS_MAGIC, VERSION, arr.shape[0]))
    sink.write(arr.tobytes())


def load_labels(source: BinaryIO) -> np.ndarray:
    raw = _read_exact(source, _LABELS_HEADER.size, "labels header")
    magic, version, count = _LABELS_HEADER.unpack(raw)
    if magic != LABELS_MAGIC:
        raise BadMagicError(f"expected {LABELS_MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise BadVersionError(f"unsupported labels version {version}")
    payload = _read_exact(source, count * 8, "labels payload")
    return np.frombuffer(payload, dtype="<i8").astype(np.int64)


def stream_batches(
    source: BinaryIO, batch_size: int, source_name: str = "stream"
) -> Iterator[EmbeddingBatch]:
    """Yield batches of at most ``batch_size`` rows, in file order."""
    if batch_size < 1:
        raise ParameterError("batch_size must be positive")
    n, row_count = _read_emb_header(source)
    remaining = row_count
    while remaining:
        take = min(batch_size, remaining)
        payload = _read_exact(source, take * n * 4, "embedding payload")
        rows = np.frombuffer(payload, dtype="<f4").reshape(take, n)
        yield EmbeddingBatch(rows.astype(np.float32), source_name)
        remaining -= take
