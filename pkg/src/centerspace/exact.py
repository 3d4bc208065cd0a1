"""Exact reference classifiers: full cosine scan and raw inner-product head.

These are the ground truth the fast path is checked against, and the
baseline the benchmark times. The scan visits every prototype row for every
query (cost proportional to the number of classes) using blocked matrix
products; scores accumulate in float64 by default so near-boundary
comparisons keep headroom. Ties resolve to the lowest label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_embedding_batch
from .classifier import LabelMap, labeled_center_matrix
from .errors import InputError, ParameterError

DEFAULT_BLOCK_ROWS = 512
DEFAULT_BLOCK_COLS = 4096


@dataclass(frozen=True)
class CenterMatrix:
    """Dense prototype matrix; row i is the center carrying label i."""

    matrix: np.ndarray
    norms: np.ndarray

    @classmethod
    def from_rows(cls, rows) -> "CenterMatrix":
        M = np.asarray(rows, dtype=np.float32)
        if M.ndim != 2 or M.shape[0] == 0:
            raise ParameterError("center matrix must be 2-D and nonempty")
        norms = np.linalg.norm(M.astype(np.float64), axis=1)
        if not norms.all():
            raise ParameterError("center rows must have nonzero norm")
        return cls(M, norms)

    @classmethod
    def from_label_map(cls, label_map: LabelMap) -> "CenterMatrix":
        return cls.from_rows(labeled_center_matrix(label_map))

    @classmethod
    def from_code_arrays(cls, maxes: np.ndarray, mins: np.ndarray, n: int) -> "CenterMatrix":
        """Build from (e, m) / (e, k) coordinate index arrays, row order kept."""
        e = maxes.shape[0]
        M = np.zeros((e, n), dtype=np.float32)
        rows = np.arange(e)[:, None]
        if maxes.shape[1]:
            M[rows, maxes] = 1.0
        if mins.shape[1]:
            M[rows, mins] = -1.0
        return cls.from_rows(M)

    @property
    def n_classes(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


def _blocked_argmax(
    Z: np.ndarray,
    centers: CenterMatrix,
    normalize: bool,
    block_rows: int,
    block_cols: int,
    dtype,
) -> np.ndarray:
    nq = Z.shape[0]
    best_val = np.full(nq, -np.inf, dtype=np.float64)
    best_idx = np.zeros(nq, dtype=np.int64)
    Zt = Z.astype(dtype, copy=False)
    for c0 in range(0, centers.n_classes, block_cols):
        c1 = min(c0 + block_cols, centers.n_classes)
        block = centers.matrix[c0:c1].astype(dtype)
        if normalize:
            block /= centers.norms[c0:c1, None].astype(dtype)
        blockT = block.T
        for q0 in range(0, nq, block_rows):
            q1 = min(q0 + block_rows, nq)
            scores = Zt[q0:q1] @ blockT
            loc = scores.argmax(axis=1)
            val = scores[np.arange(q1 - q0), loc].astype(np.float64)
            # strict improvement keeps the lowest label on exact ties
            better = val > best_val[q0:q1]
            best_val[q0:q1][better] = val[better]
            best_idx[q0:q1][better] = loc[better] + c0
    return best_idx


def cossim_argmax(
    batch,
    centers: CenterMatrix,
    block_rows: int = DEFAULT_BLOCK_ROWS,
    block_cols: int = DEFAULT_BLOCK_COLS,
    dtype=np.float64,
) -> np.ndarray:
    """Label of the maximum cosine-similarity center for every row.

    Query norms are positive scalars per row and cannot move an argmax, so
    only center rows are normalized.
    """
    rows = batch.rows if hasattr(batch, "rows") else batch
    Z = check_embedding_batch(rows)
    if Z.shape[1] != centers.n:
        raise InputError(f"batch has {Z.shape[1]} columns, centers have {centers.n}")
    return _blocked_argmax(Z, centers, True, block_rows, block_cols, dtype)


def matmul_head_argmax(
    batch,
    centers: CenterMatrix,
    block_rows: int = DEFAULT_BLOCK_ROWS,
    block_cols: int = DEFAULT_BLOCK_COLS,
    dtype=np.float64,
) -> np.ndarray:
    """Argmax over raw inner products, as a fully connected head would score.

    Coincides with :func:`cossim_argmax` whenever all center rows share one
    norm; mixed-norm prototype sets can disagree.
    """
    rows = batch.rows if hasattr(batch, "rows") else batch
    Z = check_embedding_batch(rows)
    if Z.shape[1] != centers.n:
        raise InputError(f"batch has {Z.shape[1]} columns, centers have {centers.n}")
    return _blocked_argmax(Z, centers, False, block_rows, block_cols, dtype)
