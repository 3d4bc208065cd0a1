"""Closest-center search and label prediction via index-pattern hashing.

The closest system vector to a query is obtained by reading off the indexes
of its m largest and k smallest coordinates; looking that index pattern up
in a hash map keyed by packed codes yields the label in time independent of
the number of classes. Per row the work is two partial selections over n
values plus one dictionary probe.

Ties (zero gap at either selection threshold) are detected and flagged, not
silently resolved: among equal values the lower coordinate index wins, and
on degenerate rows where the two selections would collide the minima are
drawn from the coordinates left over after the maxima are fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from ._validation import check_embedding_batch, check_row
from .errors import InputError, ParameterError
from .systems import (
    INDEX_BITS,
    CenterCode,
    SystemParams,
    count_vectors,
    decode,
    encode,
    pack_code,
)


_HASH_MULT = np.uint64(0x9E3779B97F4A7C15)
_EMPTY_SLOT = np.uint64(0xFFFFFFFFFFFFFFFF)  # unreachable: indexes stay < 0xFFFF


class _PackedKeyTable:
    """Flat open-addressing hash table over packed codes, probed in bulk.

    Complements the Python dict: same expected O(1) probes, but raw uint64
    compares against a compact array instead of boxed-object dereferences,
    so batched lookups stay cache-friendly even at millions of entries.
    Linear probing with a Fibonacci multiplier, load factor <= 0.5.
    """

    __slots__ = ("keys", "values", "mask", "shift")

    def __init__(self, entries: dict[int, int]):
        n_slots = 1 << max(3, (2 * len(entries)).bit_length())
        self.keys = np.full(n_slots, _EMPTY_SLOT, dtype=np.uint64)
        self.values = np.empty(n_slots, dtype=np.int64)
        self.mask = np.int64(n_slots - 1)
        self.shift = np.uint64(64 - (n_slots.bit_length() - 1))
        mask = int(self.mask)
        shift = int(self.shift)
        keys_arr = self.keys
        vals_arr = self.values
        for key, value in entries.items():
            slot = ((key * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF) >> shift
            while keys_arr[slot] != _EMPTY_SLOT:
                slot = (slot + 1) & mask
            keys_arr[slot] = key
            vals_arr[slot] = value

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        """Labels for a uint64 key array, -1 where absent."""
        out = np.full(keys.shape[0], -1, dtype=np.int64)
        slots = ((keys * _HASH_MULT) >> self.shift).astype(np.int64)
        pending = np.arange(keys.shape[0])
        while pending.size:
            found = self.keys[slots[pending]]
            hit = found == keys[pending]
            if hit.any():
                rows = pending[hit]
                out[rows] = self.values[slots[rows]]
            pending = pending[~(hit | (found == _EMPTY_SLOT))]
            slots[pending] = (slots[pending] + 1) & self.mask
        return out


@dataclass(frozen=True)
class LabelMap:
    """Immutable mapping from packed center codes to label ids.

    entries maps pack_code(code) -> label. Treat as read-only after
    construction; it is then safe to share across threads (the lazily built
    probe table is idempotent, so a racy double build is harmless).
    """

    params: SystemParams
    entries: dict[int, int]
    n_system: int = field(default=0)  # total vectors in the ambient system

    def __post_init__(self):
        if self.n_system == 0:
            object.__setattr__(self, "n_system", count_vectors(self.params))
        if len(self.entries) > self.n_system:
            raise ParameterError(
                f"{len(self.entries)} labels exceed the {self.n_system} system vectors"
            )

    def _key_table(self) -> _PackedKeyTable:
        table = getattr(self, "_table", None)
        if table is None:
            table = _PackedKeyTable(self.entries)
            object.__setattr__(self, "_table", table)
        return table

    @property
    def n_classes(self) -> int:
        return len(self.entries)

    @property
    def unlabeled_count(self) -> int:
        return self.n_system - self.n_classes

    @property
    def label_fraction(self) -> Fraction:
        """Fraction of system vectors that carry a label, in (0, 1]."""
        return Fraction(self.n_classes, self.n_system)

    def label_of(self, code: CenterCode) -> int:
        """Label for a code, or -1 when the center is unlabeled."""
        return self.entries.get(pack_code(code), -1)


@dataclass(frozen=True)
class EmbeddingBatch:
    """Row-major batch of query embeddings with a provenance tag."""

    rows: np.ndarray
    source: str = "memory"

    def __post_init__(self):
        if self.rows.ndim != 2:
            raise InputError(f"batch must be 2-D, got shape {self.rows.shape}")

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class Prediction:
    """Outcome of one closest-center query.

    label is -1 when the nearest center carries no label; on_tie_boundary
    marks rows whose selection thresholds had a zero gap.
    """

    label: int
    code: CenterCode
    on_tie_boundary: bool


def build_label_map(
    centers: Iterable, labels: Iterable[int], params: SystemParams
) -> LabelMap:
    """Build the hash map from parallel streams of center vectors and labels.

    Raises on duplicate centers, duplicate labels, length mismatch, or more
    labels than the system holds.
    """
    entries: dict[int, int] = {}
    seen_labels: set[int] = set()
    count = 0
    centers = iter(centers)
    labels_it = iter(labels)
    while True:
        center = next(centers, None)
        label = next(labels_it, None)
        if center is None or label is None:
            if center is not None or label is not None:
                raise ParameterError("centers and labels streams differ in length")
            break
        code = center if isinstance(center, CenterCode) else encode(center, params)
        key = pack_code(code)
        if key in entries:
            raise ParameterError(f"duplicate center {code}")
        label = int(label)
        if label < 0:
            raise ParameterError(f"label ids must be non-negative, got {label}")
        if label in seen_labels:
            raise ParameterError(f"duplicate label id {label}")
        seen_labels.add(label)
        entries[key] = label
        count += 1
    return LabelMap(params, entries)


def label_map_from_codes(
    codes: Iterable[CenterCode], labels: Iterable[int], params: SystemParams
) -> LabelMap:
    """Like :func:`build_label_map` but skips dense-vector decoding."""
    return build_label_map(codes, labels, params)


def _select_extremes(Z: np.ndarray, count: int, largest: bool):
    """Vectorized selection of the ``count`` largest or smallest entries per row.

    Returns (idx, tie) where idx is (rows, count) ascending coordinate
    indexes (lower index preferred among equal values) and tie flags a zero
    gap at the selection threshold.
    """
    rows, n = Z.shape
    if count == 0:
        return np.empty((rows, 0), dtype=np.int64), np.zeros(rows, dtype=bool)
    if largest:
        thresh = np.partition(Z, n - count, axis=1)[:, n - count]
        strict = Z > thresh[:, None]
    else:
        thresh = np.partition(Z, count - 1, axis=1)[:, count - 1]
        strict = Z < thresh[:, None]
    equal = Z == thresh[:, None]
    need = count - strict.sum(axis=1)
    # keep the first `need` equal-valued coordinates of each row
    rank = np.cumsum(equal, axis=1)
    chosen = strict | (equal & (rank <= need[:, None]))
    idx = np.nonzero(chosen)[1].reshape(rows, count)
    tie = equal.sum(axis=1) > need
    return idx, tie


def batch_codes(Z: np.ndarray, params: SystemParams):
    """Index patterns for every row of a validated batch.

    Returns (maxes, mins, tie): (b, m) and (b, k) ascending index arrays and
    a boolean tie-boundary flag per row.
    """
    m, k = params.m, params.k
    maxes, tie_hi = _select_extremes(Z, m, largest=True)
    mins, tie_lo = _select_extremes(Z, k, largest=False)
    tie = tie_hi | tie_lo
    if m and k:
        # degenerate rows (flat value plateaus) can select the same index on
        # both sides; redo the minima over the remaining coordinates
        overlap = (maxes[:, :, None] == mins[:, None, :]).any(axis=(1, 2))
        for r in np.flatnonzero(overlap):
            rest = np.setdiff1d(np.arange(params.n), maxes[r])
            order = np.argsort(Z[r, rest], kind="stable")
            mins[r] = np.sort(rest[order[:k]])
            tie[r] = True
    return maxes, mins, tie


def pack_rows(maxes: np.ndarray, mins: np.ndarray) -> np.ndarray:
    """Vectorized :func:`systems.pack_code` over row index arrays.

    Keys fit in uint64 for m + k <= 4 (the primary family); wider systems
    fall back to object dtype holding Python ints.
    """
    idx = np.concatenate([maxes, mins], axis=1)
    fields = idx.shape[1]
    if fields * INDEX_BITS <= 64:
        keys = np.zeros(idx.shape[0], dtype=np.uint64)
        for j in range(fields):
            shift = np.uint64(INDEX_BITS * (fields - 1 - j))
            keys |= idx[:, j].astype(np.uint64) << shift
        return keys
    keys = np.empty(idx.shape[0], dtype=object)
    for r in range(idx.shape[0]):
        key = 0
        for j in range(fields):
            key = (key << INDEX_BITS) | int(idx[r, j])
        keys[r] = key
    return keys


def closest_code(w, params: SystemParams) -> tuple[CenterCode, bool]:
    """Code of the closest system vector to one query row.

    On rows with strict gaps at both thresholds this is the unique
    cosine-similarity argmax over the whole system; otherwise the returned
    flag is True and the documented lowest-index preference applies.
    """
    v = check_row(w, params.n)
    maxes, mins, tie = batch_codes(v[None, :], params)
    code = CenterCode(tuple(int(i) for i in maxes[0]), tuple(int(i) for i in mins[0]))
    return code, bool(tie[0])


def lookup_keys(keys: np.ndarray, label_map: LabelMap) -> np.ndarray:
    """Labels for packed keys, -1 where absent; bulk probe when keys fit u64."""
    if keys.dtype == np.uint64:
        return label_map._key_table().lookup(keys)
    get = label_map.entries.get
    return np.fromiter(
        (get(int(key), -1) for key in keys), dtype=np.int64, count=len(keys)
    )


def predict_labels(Z, label_map: LabelMap) -> np.ndarray:
    """Labels for a batch as an int64 array, -1 marking unlabeled centers.

    This is the timed fast path: selection, packing, and one hash probe per
    row, with no per-row objects.
    """
    A = check_embedding_batch(Z, label_map.params.n)
    maxes, mins, _ = batch_codes(A, label_map.params)
    keys = pack_rows(maxes, mins)
    return lookup_keys(keys, label_map)


def predict(batch, label_map: LabelMap) -> list[Prediction]:
    """Per-row predictions, in input order."""
    rows = batch.rows if isinstance(batch, EmbeddingBatch) else batch
    A = check_embedding_batch(rows, label_map.params.n)
    maxes, mins, ties = batch_codes(A, label_map.params)
    labels = lookup_keys(pack_rows(maxes, mins), label_map)
    out = []
    for r in range(A.shape[0]):
        code = CenterCode(
            tuple(int(i) for i in maxes[r]), tuple(int(i) for i in mins[r])
        )
        out.append(Prediction(int(labels[r]), code, bool(ties[r])))
    return out


def reconstruct_center(p: Prediction, params: SystemParams) -> np.ndarray:
    """Dense center vector named by a prediction."""
    return decode(p.code, params)


def labeled_center_matrix(label_map: LabelMap, dtype=np.float32) -> np.ndarray:
    """Dense (n_classes, n) matrix with row i equal to the center of label i.

    Requires the map's label ids to be exactly 0 .. n_classes-1.
    """
    from .systems import unpack_code

    n_classes = label_map.n_classes
    labels = np.fromiter(label_map.entries.values(), dtype=np.int64, count=n_classes)
    if n_classes and (labels.min() != 0 or labels.max() != n_classes - 1):
        raise ParameterError("label ids must be contiguous 0..n_classes-1")
    M = np.zeros((n_classes, label_map.params.n), dtype=dtype)
    for key, label in label_map.entries.items():
        code = unpack_code(key, label_map.params)
        M[label, list(code.maxes)] = 1
        M[label, list(code.mins)] = -1
    return M


def map_code_arrays(label_map: LabelMap):
    """Entry codes of a map as ((e, m), (e, k)) index arrays plus labels.

    Rows follow the map's canonical ascending packed-key order.
    """
    params = label_map.params
    e = label_map.n_classes
    maxes = np.empty((e, params.m), dtype=np.int64)
    mins = np.empty((e, params.k), dtype=np.int64)
    labels = np.empty(e, dtype=np.int64)
    from .systems import unpack_code

    for r, key in enumerate(sorted(label_map.entries)):
        code = unpack_code(key, params)
        maxes[r] = code.maxes
        mins[r] = code.mins
        labels[r] = label_map.entries[key]
    return maxes, mins, labels
