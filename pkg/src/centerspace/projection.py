"""Combined systems obtained by dropping the last coordinate.

Dropping coordinate n+1 from every vector of the (n+1, m, k) system yields,
at dimension n, the disjoint union of the (m, k), (m-1, k), and (m, k-1)
systems (a dropped 0 keeps both sign counts, a dropped +1 or -1 loses one).
Searching the union runs the index-pattern search once per subsystem and
compares the candidates by true cosine similarity, so the cost stays
independent of the number of classes. Subsystem norms differ, which is why
raw inner products must not be compared across subsystems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._validation import check_embedding_batch, check_row
from .classifier import LabelMap, Prediction, batch_codes, lookup_keys, pack_rows
from .errors import InputError, ParameterError
from .systems import CenterCode, SystemParams, count_vectors


@dataclass(frozen=True)
class ProjectedParams:
    """Base system plus the subsystems its projection unions into.

    Subsystems are listed in precedence order: (m, k) first, then (m-1, k),
    then (m, k-1); precedence breaks exact cross-subsystem ties.
    """

    base: SystemParams
    subsystems: tuple[SystemParams, ...]

    @property
    def n(self) -> int:
        return self.base.n - 1

    @property
    def total(self) -> int:
        return count_vectors(self.base)


def project(params_base: SystemParams) -> ProjectedParams:
    """Describe the union produced by dropping the last base coordinate."""
    n = params_base.n - 1
    m, k = params_base.m, params_base.k
    subs = []
    for sm, sk in ((m, k), (m - 1, k), (m, k - 1)):
        if sm < 0 or sk < 0 or sm + sk < 1 or sm + sk > n:
            continue  # degenerate bases drop the impossible branch
        subs.append(SystemParams(n, sm, sk))
    if not subs:
        raise ParameterError(f"base {params_base} projects to an empty union")
    pp = ProjectedParams(params_base, tuple(subs))
    if sum(count_vectors(s) for s in subs) != pp.total:
        raise ParameterError(
            f"projected subsystems of {params_base} do not partition the base system"
        )
    return pp


def project_vector(v: np.ndarray) -> np.ndarray:
    """Drop the last coordinate of one base-system vector."""
    return np.asarray(v)[:-1]


def _check_union_maps(maps: Sequence[LabelMap]) -> int:
    if not maps:
        raise ParameterError("projected search needs at least one subsystem map")
    n = maps[0].params.n
    if any(mp.params.n != n for mp in maps):
        raise InputError("subsystem maps disagree on dimension")
    return n


def closest_in_union(w, maps: Sequence[LabelMap]) -> Prediction:
    """Closest center across subsystem maps, compared by cosine similarity."""
    n = _check_union_maps(maps)
    v = check_row(w, n)
    labels, codes, ties = predict_union(v[None, :], maps)
    return Prediction(int(labels[0]), codes[0], bool(ties[0]))


def predict_union(Z, maps: Sequence[LabelMap]):
    """Batch union search.

    Returns (labels, codes, ties); candidates are scored as inner product
    divided by the subsystem norm (the common query norm cannot move the
    argmax), and exact score ties fall to the earliest subsystem.
    """
    n = _check_union_maps(maps)
    A = check_embedding_batch(Z, n)
    b = A.shape[0]
    sims = np.empty((len(maps), b), dtype=np.float64)
    all_labels = np.empty((len(maps), b), dtype=np.int64)
    all_codes = []
    sub_ties = np.empty((len(maps), b), dtype=bool)
    for s, mp in enumerate(maps):
        params = mp.params
        maxes, mins, tie = batch_codes(A, params)
        ip = A[np.arange(b)[:, None], maxes].sum(axis=1)
        if params.k:
            ip = ip - A[np.arange(b)[:, None], mins].sum(axis=1)
        sims[s] = ip / math.sqrt(params.m + params.k)
        sub_ties[s] = tie
        all_labels[s] = lookup_keys(pack_rows(maxes, mins), mp)
        all_codes.append((maxes, mins))
    winner = sims.argmax(axis=0)  # first max wins: subsystem precedence
    rows = np.arange(b)
    cross_tie = (sims == sims[winner, rows]).sum(axis=0) > 1
    labels = all_labels[winner, rows]
    ties = sub_ties[winner, rows] | cross_tie
    codes: list[CenterCode] = []
    for r in range(b):
        maxes, mins = all_codes[int(winner[r])]
        codes.append(
            CenterCode(tuple(int(i) for i in maxes[r]), tuple(int(i) for i in mins[r]))
        )
    return labels, codes, ties


def split_union_rows(X, y, pp: ProjectedParams):
    """Partition labeled union vectors into per-subsystem label maps.

    Every row must belong to exactly one subsystem of ``pp``; label ids are
    shared across the whole union.
    """
    from .classifier import build_label_map

    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != pp.n:
        raise ParameterError(f"expected union vectors of dimension {pp.n}")
    by_counts = {(s.m, s.k): s for s in pp.subsystems}
    buckets: dict[tuple[int, int], tuple[list, list]] = {
        key: ([], []) for key in by_counts
    }
    for row, label in zip(X, y):
        counts = (int((row == 1).sum()), int((row == -1).sum()))
        if counts not in buckets or np.count_nonzero(row) != sum(counts):
            raise ParameterError(
                f"row with sign counts {counts} belongs to no subsystem of {pp.base}"
            )
        buckets[counts][0].append(row)
        buckets[counts][1].append(int(label))
    return [
        build_label_map(buckets[(s.m, s.k)][0], buckets[(s.m, s.k)][1], s)
        for s in pp.subsystems
    ]
