"""Bit-vector helpers and restrictions over the Boolean hypercube {0,1}^d.

Points are rows of uint8 matrices.  Coordinates are 0-based.  A point's
integer *code* has bit ``j`` equal to coordinate ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DataError, DomainError, ParameterError

__all__ = [
    "MAX_ENUM_DIM",
    "Restriction",
    "all_points",
    "codes",
    "flip",
    "pack",
    "unpack",
]

MAX_ENUM_DIM = 20


def all_points(d: int) -> np.ndarray:
    """All 2^d points, row ``c`` being the point with code ``c``."""
    if not 0 <= d <= MAX_ENUM_DIM:
        raise ParameterError(f"refusing to enumerate {{0,1}}^{d}; limit is d <= {MAX_ENUM_DIM}")
    c = np.arange(1 << d, dtype=np.int64)
    return ((c[:, None] >> np.arange(d)) & 1).astype(np.uint8)


def codes(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.int64))
    return X @ (np.int64(1) << np.arange(X.shape[1], dtype=np.int64))


def flip(X: np.ndarray, i: int) -> np.ndarray:
    Y = np.array(X, dtype=np.uint8, copy=True)
    Y[..., i] ^= 1
    return Y


def pack(bits) -> int:
    """Bit sequence to an int (bit ``j`` of the result is ``bits[j]``)."""
    out = 0
    for j, b in enumerate(np.asarray(bits, dtype=np.uint8).ravel()):
        if b:
            out |= 1 << j
    return out


def unpack(value: int, d: int) -> np.ndarray:
    return np.array([(value >> j) & 1 for j in range(d)], dtype=np.uint8)


@dataclass(frozen=True)
class Restriction:
    """Partial assignment of coordinates, kept sorted by coordinate index."""

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(i), int(b)) for i, b in self.pairs))
        coords = [i for i, _ in pairs]
        if len(set(coords)) != len(coords):
            raise DomainError(f"restriction fixes a coordinate twice: {pairs}")
        if any(b not in (0, 1) for _, b in pairs) or any(i < 0 for i in coords):
            raise DataError(f"malformed restriction {pairs}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, int]] = ()) -> "Restriction":
        return cls(tuple(pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def coords(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.pairs)

    def fixes(self, i: int) -> bool:
        return any(j == i for j, _ in self.pairs)

    def extend(self, i: int, b: int) -> "Restriction":
        return Restriction(self.pairs + ((i, b),))

    @property
    def key(self) -> str:
        """Canonical text form, used for stream labels and memo keys."""
        return ",".join(f"x{i}={b}" for i, b in self.pairs)

    def __str__(self) -> str:
        return "{" + self.key + "}"

    def matches(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        mask = np.ones(len(X), dtype=bool)
        for i, b in self.pairs:
            mask &= X[:, i] == b
        return mask

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Copy of ``X`` with the restricted coordinates overwritten."""
        Y = np.array(np.atleast_2d(X), dtype=np.uint8, copy=True)
        for i, b in self.pairs:
            Y[:, i] = b
        return Y

    def check(self, d: int) -> None:
        if any(i >= d for i, _ in self.pairs):
            raise DataError(f"restriction {self} does not fit dimension {d}")
