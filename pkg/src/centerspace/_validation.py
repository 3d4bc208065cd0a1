"""Input validation helpers used by the functional API and the estimators."""

from __future__ import annotations

import numpy as np

from .errors import InputError


def as_float_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array without copying when possible."""
    A = np.asarray(X)
    if A.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.issubdtype(A.dtype, np.floating):
        A = A.astype(np.float64)
    return A


def check_embedding_batch(X, n: int | None = None, name: str = "X") -> np.ndarray:
    """Validate a batch of query embeddings.

    Rows must be finite and have nonzero norm; the column count must match
    ``n`` when given.
    """
    A = as_float_matrix(X, name)
    if n is not None and A.shape[1] != n:
        raise InputError(f"{name} has {A.shape[1]} columns, expected {n}")
    if not np.isfinite(A).all():
        raise InputError(f"{name} contains non-finite values")
    if A.shape[0] and not np.abs(A).max(axis=1).all():
        bad = int(np.flatnonzero(np.abs(A).max(axis=1) == 0)[0])
        raise InputError(f"{name} row {bad} has zero norm")
    return A


def check_row(w, n: int | None = None, name: str = "w") -> np.ndarray:
    """Validate a single query vector (finite, nonzero norm)."""
    v = np.asarray(w, dtype=np.float64)
    if v.ndim != 1:
        raise InputError(f"{name} must be 1-D, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise InputError(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.isfinite(v).all():
        raise InputError(f"{name} contains non-finite values")
    if v.shape[0] == 0 or not np.abs(v).max():
        raise InputError(f"{name} has zero norm")
    return v


def check_labels(y, n_rows: int, name: str = "y") -> np.ndarray:
    """Validate an integer label vector aligned with ``n_rows`` samples."""
    arr = np.asarray(y)
    if arr.ndim != 1 or arr.shape[0] != n_rows:
        raise InputError(f"{name} must be 1-D with {n_rows} entries")
    if not np.issubdtype(arr.dtype, np.integer):
        cast = arr.astype(np.int64)
        if not np.array_equal(cast, arr):
            raise InputError(f"{name} must contain integers")
        arr = cast
    if arr.shape[0] and arr.min() < 0:
        raise InputError(f"{name} must be non-negative")
    return arr.astype(np.int64)
