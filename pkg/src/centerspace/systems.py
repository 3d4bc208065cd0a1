"""Sign-pattern vector systems.

A system ``(n, m, k)`` is the set of all n-dimensional vectors with exactly
``m`` entries equal to +1, ``k`` entries equal to -1, and zeros elsewhere.
Every member is identified by its code: the sorted index tuples of its +1
and -1 positions. This module owns counting, dimension selection, canonical
enumeration, and the vector <-> code codec. Everything here is pure and
stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ParameterError

INDEX_BITS = 16
INDEX_MASK = (1 << INDEX_BITS) - 1
MAX_DIM = INDEX_MASK  # coordinate indexes are packed as 16-bit fields


@dataclass(frozen=True)
class SystemParams:
    """Defining triple of one sign-pattern system.

    n is the ambient dimension, m the number of +1 entries, k the number
    of -1 entries. Requires 1 <= m + k <= n (m or k may be zero).
    """

    n: int
    m: int
    k: int

    def __post_init__(self):
        if self.n < 1 or self.n > MAX_DIM:
            raise ParameterError(f"dimension n={self.n} out of range [1, {MAX_DIM}]")
        if self.m < 0 or self.k < 0:
            raise ParameterError(f"sign counts must be non-negative, got m={self.m}, k={self.k}")
        if self.m + self.k < 1:
            raise ParameterError("m + k must be at least 1")
        if self.m + self.k > self.n:
            raise ParameterError(f"m + k = {self.m + self.k} exceeds dimension n = {self.n}")

    @property
    def norm(self) -> float:
        """Euclidean norm shared by every vector in the system."""
        return math.sqrt(self.m + self.k)


class CenterCode(NamedTuple):
    """Canonical identity of one system vector.

    maxes and mins are strictly ascending, disjoint coordinate index tuples
    (the +1 and -1 positions). Tuple ordering doubles as the canonical
    lexicographic order used for enumeration and tie-breaking.
    """

    maxes: tuple[int, ...]
    mins: tuple[int, ...]


def count_vectors(params: SystemParams) -> int:
    """Number of vectors in the system, as an exact integer.

    C(n, m) * C(n - m, k); for m = k = 2 this is n(n-1)(n-2)(n-3)/4.
    """
    return math.comb(params.n, params.m) * math.comb(params.n - params.m, params.k)


def choose_min_dim(n_classes: int, m: int = 2, k: int = 2) -> int:
    """Smallest dimension whose system holds at least ``n_classes`` vectors.

    Scans upward from m + k; the count is monotone in n so the scan is cheap.
    """
    if n_classes < 1:
        raise ParameterError(f"n_classes must be positive, got {n_classes}")
    n = max(m + k, 1)
    while count_vectors(SystemParams(n, m, k)) < n_classes:
        n += 1
    return n


def enumerate_codes(params: SystemParams) -> Iterator[CenterCode]:
    """Yield every code once, in lexicographic (maxes, mins) order."""
    n, m, k = params.n, params.m, params.k
    idx = range(n)
    for maxes in combinations(idx, m):
        taken = set(maxes)
        rest = [i for i in idx if i not in taken]
        for mins in combinations(rest, k):
            yield CenterCode(maxes, mins)


def enumerate_centers(params: SystemParams) -> Iterator[np.ndarray]:
    """Yield every system vector once, in the canonical code order."""
    for code in enumerate_codes(params):
        yield decode(code, params)


def encode(v, params: SystemParams) -> CenterCode:
    """Code of a system vector; raises if ``v`` is not a member."""
    arr = np.asarray(v)
    if arr.shape != (params.n,):
        raise ParameterError(f"vector has shape {arr.shape}, expected ({params.n},)")
    maxes = tuple(int(i) for i in np.flatnonzero(arr == 1))
    mins = tuple(int(i) for i in np.flatnonzero(arr == -1))
    if len(maxes) != params.m or len(mins) != params.k:
        raise ParameterError(
            f"vector has {len(maxes)} ones and {len(mins)} negative ones, "
            f"expected {params.m} and {params.k}"
        )
    if np.count_nonzero(arr) != params.m + params.k:
        raise ParameterError("vector entries must be in {-1, 0, 1}")
    return CenterCode(maxes, mins)


def decode(code: CenterCode, params: SystemParams) -> np.ndarray:
    """Dense int8 vector for a code; inverse of :func:`encode`."""
    check_code(code, params)
    v = np.zeros(params.n, dtype=np.int8)
    v[list(code.maxes)] = 1
    v[list(code.mins)] = -1
    return v


def check_code(code: CenterCode, params: SystemParams) -> None:
    """Validate index counts, ordering, range, and disjointness."""
    maxes, mins = code
    if len(maxes) != params.m or len(mins) != params.k:
        raise ParameterError(
            f"code has {len(maxes)}+{len(mins)} indexes, expected {params.m}+{params.k}"
        )
    for name, part in (("maxes", maxes), ("mins", mins)):
        if any(i < 0 or i >= params.n for i in part):
            raise ParameterError(f"{name} indexes out of range [0, {params.n})")
        if any(a >= b for a, b in zip(part, part[1:])):
            raise ParameterError(f"{name} indexes must be strictly ascending")
    if set(maxes) & set(mins):
        raise ParameterError("maxes and mins must be disjoint")


def pack_code(code: CenterCode) -> int:
    """Pack a code into one integer hash key.

    Each index occupies a fixed 16-bit field, maxes first then mins. The
    packing is order-preserving for the canonical code order at fixed m, k.
    """
    key = 0
    for i in code.maxes:
        key = (key << INDEX_BITS) | i
    for i in code.mins:
        key = (key << INDEX_BITS) | i
    return key


def unpack_code(key: int, params: SystemParams) -> CenterCode:
    """Inverse of :func:`pack_code` for the given system shape."""
    total = params.m + params.k
    idxs = []
    for _ in range(total):
        idxs.append(key & INDEX_MASK)
        key >>= INDEX_BITS
    if key:
        raise ParameterError("packed key has more index fields than m + k")
    idxs.reverse()
    return CenterCode(tuple(idxs[: params.m]), tuple(idxs[params.m :]))
