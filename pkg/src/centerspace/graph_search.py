"""Closest labeled center via the adjacent-swap permutation graph.

When the nearest system vector to a query is unlabeled, the nearest labeled
one can be found without scanning the whole labeled set. Arrange the query
values in non-increasing order; the closest pattern overall places +1 on the
first m sorted positions and -1 on the last k. Each basic permutation (a -1
swapped one step left, or a +1 swapped one step right) lowers the inner
product with the sorted query by a nonnegative amount, and the drop along
any path between two patterns telescopes to the inner-product difference,
independent of the route. Walking the graph from the top pattern therefore
visits candidates in non-increasing similarity, and the first labeled
pattern encountered by a best-first walk is the answer.

Three strategies share one contract and must agree on tie-free queries:

- ``brute_force``: vectorized scan of every labeled center (the oracle).
- ``best_first``: priority-queue walk; expected cost grows with the local
  density of unlabeled centers, not with the number of classes.
- ``dfs_paper``: depth-first walk that prunes at labeled hits and collects
  them as candidates, memoizing visited patterns so revisits cannot blow up.

Exact similarity ties are flagged and resolved to the lowest canonical code.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ._validation import check_row
from .classifier import LabelMap, Prediction
from .errors import ParameterError
from .systems import CenterCode, SystemParams, pack_code

STRATEGIES = ("brute_force", "dfs_paper", "best_first")


@dataclass(frozen=True)
class SortedQuery:
    """A query rearranged so its values ascend.

    x is non-decreasing, perm satisfies w[perm] = x, and x_prime holds the
    consecutive differences x[i] - x[i+1] (all <= 0). The reversed view is
    what the graph walk aligns against.
    """

    x: np.ndarray
    perm: np.ndarray
    x_prime: np.ndarray

    def restore(self) -> np.ndarray:
        """Undo the permutation, returning the original query."""
        w = np.empty_like(self.x)
        w[self.perm] = self.x
        return w

    @property
    def values_desc(self) -> np.ndarray:
        return self.x[::-1]

    @property
    def perm_desc(self) -> np.ndarray:
        return self.perm[::-1]


def sort_query(w) -> SortedQuery:
    v = check_row(w)
    perm = np.argsort(v, kind="stable")
    x = v[perm]
    return SortedQuery(x, perm, x[:-1] - x[1:])


def start_vertex(params: SystemParams) -> np.ndarray:
    """Top pattern of the walk: +1s first, then zeros, then -1s.

    Against a non-increasing value arrangement this is the pattern with the
    maximal inner product, i.e. the unconstrained closest center.
    """
    v = np.zeros(params.n, dtype=np.int8)
    v[: params.m] = 1
    v[params.n - params.k :] = -1
    return v


def sink_vertex(params: SystemParams) -> np.ndarray:
    """The unique pattern with no outgoing edge: -1s first, +1s last."""
    v = np.zeros(params.n, dtype=np.int8)
    v[: params.k] = -1
    v[params.n - params.m :] = 1
    return v


def basic_successors(v: np.ndarray) -> list[np.ndarray]:
    """Patterns one basic permutation away from ``v``.

    A -1 swaps with a differing predecessor, or a +1 swaps with a differing
    successor; a -1/+1 adjacency yields the same swap from both rules and is
    emitted once. Empty only for the sink pattern.
    """
    v = np.asarray(v)
    n = v.shape[0]
    swaps = set()
    for i in range(n):
        if v[i] == -1 and i > 0 and v[i - 1] != -1:
            swaps.add(i - 1)
        elif v[i] == 1 and i < n - 1 and v[i + 1] != 1:
            swaps.add(i)
    out = []
    for i in sorted(swaps):
        nxt = v.copy()
        nxt[i], nxt[i + 1] = nxt[i + 1], nxt[i]
        out.append(nxt)
    return out


@dataclass(frozen=True)
class PermGraphEdge:
    """One basic-permutation edge, weighted against a sorted query."""

    frm: np.ndarray
    to: np.ndarray
    weight: float


def successor_edges(v: np.ndarray, values_desc: np.ndarray) -> list[PermGraphEdge]:
    """Outgoing edges of ``v`` with weights <values, frm - to>.

    Weights are nonnegative whenever ``values_desc`` is non-increasing.
    """
    y = np.asarray(values_desc, dtype=np.float64)
    edges = []
    for nxt in basic_successors(v):
        w = float(y @ (np.asarray(v, dtype=np.float64) - nxt))
        edges.append(PermGraphEdge(np.asarray(v), nxt, w))
    return edges


def _vertex_ip(vhat: np.ndarray, y: np.ndarray) -> float:
    return float(y[vhat == 1].sum() - y[vhat == -1].sum())


def _orig_code(vhat: np.ndarray, perm_desc: np.ndarray) -> CenterCode:
    maxes = np.sort(perm_desc[vhat == 1])
    mins = np.sort(perm_desc[vhat == -1])
    return CenterCode(tuple(int(i) for i in maxes), tuple(int(i) for i in mins))


def _finish(hits: list[tuple[float, CenterCode]], label_map: LabelMap) -> Prediction:
    top = max(ip for ip, _ in hits)
    tied = sorted(code for ip, code in hits if ip == top)
    return Prediction(label_map.label_of(tied[0]), tied[0], len(tied) > 1)


def _brute_force(w: np.ndarray, label_map: LabelMap) -> Prediction:
    from .classifier import map_code_arrays

    maxes, mins, labels = map_code_arrays(label_map)
    ips = w[maxes].sum(axis=1) - w[mins].sum(axis=1)
    top = ips.max()
    tied_rows = np.flatnonzero(ips == top)
    # rows are in ascending packed-key order, which is the canonical order
    r = int(tied_rows[0])
    code = CenterCode(tuple(int(i) for i in maxes[r]), tuple(int(i) for i in mins[r]))
    return Prediction(int(labels[r]), code, len(tied_rows) > 1)


def _best_first(w: np.ndarray, label_map: LabelMap) -> Prediction:
    params = label_map.params
    perm_desc = np.argsort(-w, kind="stable")
    y = w[perm_desc]
    start = start_vertex(params)
    seen = {start.tobytes()}
    code0 = _orig_code(start, perm_desc)
    heap = [(-_vertex_ip(start, y), code0, start)]
    hits: list[tuple[float, CenterCode]] = []
    best: float | None = None
    while heap:
        neg, code, vhat = heapq.heappop(heap)
        ip = -neg
        if best is not None and ip < best:
            break
        if pack_code(code) in label_map.entries:
            hits.append((ip, code))
            best = ip if best is None else best
        # keep expanding through the equal-similarity plateau so ties surface
        for nxt in basic_successors(vhat):
            key = nxt.tobytes()
            if key not in seen:
                seen.add(key)
                heapq.heappush(
                    heap, (-_vertex_ip(nxt, y), _orig_code(nxt, perm_desc), nxt)
                )
    if not hits:
        raise RuntimeError("walk exhausted without reaching a labeled center")
    return _finish(hits, label_map)


def _dfs_paper(w: np.ndarray, label_map: LabelMap) -> Prediction:
    params = label_map.params
    perm_desc = np.argsort(-w, kind="stable")
    y = w[perm_desc]
    sink = sink_vertex(params).tobytes()
    start = start_vertex(params)
    stack = [start]
    visited: set[bytes] = set()
    hits: list[tuple[float, CenterCode]] = []
    while stack:
        vhat = stack.pop()
        key = vhat.tobytes()
        if key in visited:
            continue
        visited.add(key)
        code = _orig_code(vhat, perm_desc)
        if pack_code(code) in label_map.entries:
            hits.append((_vertex_ip(vhat, y), code))
            continue  # prune below labeled hits
        if key == sink:
            continue  # unlabeled sink terminates the branch, never a candidate
        stack.extend(reversed(basic_successors(vhat)))
    if not hits:
        raise RuntimeError("walk exhausted without reaching a labeled center")
    return _finish(hits, label_map)


def closest_labeled(
    w, label_map: LabelMap, strategy: str = "best_first"
) -> Prediction:
    """Labeled center maximizing cosine similarity with ``w``.

    All strategies return the same center on tie-free queries; exact ties
    are flagged and resolved to the lowest canonical code. The label is
    always >= 0.
    """
    if label_map.n_classes == 0:
        raise ParameterError("label map is empty, no labeled center exists")
    if strategy not in STRATEGIES:
        raise ParameterError(f"unknown strategy {strategy!r}, pick one of {STRATEGIES}")
    v = check_row(w, label_map.params.n)
    if strategy == "brute_force":
        return _brute_force(v, label_map)
    if strategy == "dfs_paper":
        return _dfs_paper(v, label_map)
    return _best_first(v, label_map)


def resolve_unlabeled(
    rows: np.ndarray,
    labels: np.ndarray,
    label_map: LabelMap,
    strategy: str = "best_first",
) -> np.ndarray:
    """Replace -1 sentinels in a batch prediction with nearest labeled hits."""
    out = labels.copy()
    for r in np.flatnonzero(labels < 0):
        out[r] = closest_labeled(rows[r], label_map, strategy).label
    return out
