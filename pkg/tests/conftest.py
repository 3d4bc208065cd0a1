"""Shared fixtures and independent reference oracles.

The helpers here deliberately avoid the package's own enumeration and
search paths: membership is checked by exhaustive generation over
{-1, 0, 1}^n and similarity by a plain per-center loop, so they can serve
as ground truth for the fast implementations.
"""

from __future__ import annotations

from itertools import product

import numpy as np
import pytest


def all_sign_vectors(n: int, m: int, k: int) -> list[tuple[int, ...]]:
    """Every {-1, 0, 1} vector with exactly m ones and k negative ones."""
    out = []
    for tup in product((-1, 0, 1), repeat=n):
        if tup.count(1) == m and tup.count(-1) == k:
            out.append(tup)
    return out


def ref_cosine_argmax(w, centers) -> int:
    """Index of the max-cosine center by direct looping (lowest index wins)."""
    w = np.asarray(w, dtype=np.float64)
    wn = np.linalg.norm(w)
    best, best_sim = 0, -np.inf
    for i, c in enumerate(centers):
        c = np.asarray(c, dtype=np.float64)
        sim = float(w @ c) / (wn * np.linalg.norm(c))
        if sim > best_sim:
            best, best_sim = i, sim
    return best


def ref_cosine_scores(w, centers) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    wn = np.linalg.norm(w)
    return np.array(
        [float(w @ np.asarray(c, float)) / (wn * np.linalg.norm(c)) for c in centers]
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
