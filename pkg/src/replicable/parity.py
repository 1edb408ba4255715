"""Affine parities over GF(2) and the learners for them.

Bit vectors are stored as Python ints (bit ``j`` is coordinate ``j``) so that
row operations are single XORs on arbitrarily wide words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InconsistentSystemError, InsufficientRankError, ParameterError
from .hypercube import MAX_ENUM_DIM, Restriction, all_points, pack, unpack
from .hypotheses import Hypothesis, UniformLearnerSpec
from .sampling import ConditionalSampleOracle, HypercubeDistribution, Sample
from .seedstream import SeedStream

__all__ = [
    "AffineParityHypothesis",
    "Gf2System",
    "ProductDistribution",
    "aff_parity_sample_size",
    "affine_parity_learner",
    "gaussian_solve",
    "naive_parity_learner",
    "r_aff_parity",
    "r_aff_parity_from_sample",
    "skewed_parity_distribution",
]


def bits_to_hex(value: int, d: int) -> str:
    return format(value, "x").zfill(max(1, -(-d // 4)))


def row_ints(X) -> list[int]:
    """Rows of a 0/1 matrix as ints."""
    X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
    if X.shape[1] == 0:
        return [0] * len(X)
    packed = np.packbits(X, axis=1, bitorder="little")
    return [int.from_bytes(r.tobytes(), "little") for r in packed]


# -- linear systems -----------------------------------------------------------


@dataclass
class Gf2System:
    """Equations ``<row, u> = rhs`` over GF(2) in ``n`` unknowns.

    Rows are reduced as they arrive against an echelon basis keyed by each
    row's lowest set bit, so rank and consistency are always current.
    """

    n: int
    basis: dict = field(default_factory=dict)
    n_rows: int = 0
    conflict: int | None = None

    def add(self, row: int, rhs: int) -> bool:
        """Insert one equation; returns True if it raised the rank."""
        index = self.n_rows
        self.n_rows += 1
        rhs &= 1
        while row:
            p = (row & -row).bit_length() - 1
            hit = self.basis.get(p)
            if hit is None:
                self.basis[p] = (row, rhs)
                return True
            row ^= hit[0]
            rhs ^= hit[1]
        if rhs and self.conflict is None:
            self.conflict = index
        return False

    def extend(self, rows, rhs) -> "Gf2System":
        for r, y in zip(rows, rhs):
            self.add(r, int(y))
        return self

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def consistent(self) -> bool:
        return self.conflict is None

    @property
    def free_vars(self) -> list[int]:
        return [j for j in range(self.n) if j not in self.basis]

    def solve(self, free_values: int = 0) -> int:
        """Solution with free variables taken from the bits of ``free_values``."""
        if not self.consistent:
            raise InconsistentSystemError(
                f"row {self.conflict} contradicts the earlier equations", row=self.conflict
            )
        free_mask = 0
        for j in self.free_vars:
            free_mask |= 1 << j
        u = free_values & free_mask
        # each pivot row only involves its pivot and higher columns
        for p in sorted(self.basis, reverse=True):
            row, rhs = self.basis[p]
            rest = (row ^ (1 << p)) & u
            if (rhs ^ (rest.bit_count() & 1)) & 1:
                u |= 1 << p
        return u


def gaussian_solve(rows, rhs, n: int) -> tuple[int, list[int]]:
    """Particular solution (free variables 0) and the free-variable indices.

    ``rows`` are ints or a 0/1 matrix.  Raises :class:`InconsistentSystemError`
    when no solution exists.
    """
    if isinstance(rows, np.ndarray):
        rows = row_ints(rows)
    rows = list(rows)
    if not rows:
        raise ParameterError("empty system")
    system = Gf2System(n).extend(rows, rhs)
    return system.solve(0), system.free_vars


# -- hypotheses ---------------------------------------------------------------


class AffineParityHypothesis(Hypothesis):
    """``x -> b + <w, x>`` over GF(2)."""

    def __init__(self, w, b: int, d: int | None = None):
        if isinstance(w, (int, np.integer)):
            if d is None:
                raise ParameterError("dimension required when w is given as an int")
            self.w = unpack(int(w), d)
        else:
            self.w = np.asarray(w, dtype=np.uint8).copy()
        self.b = int(b) & 1
        self.d = len(self.w)

    @property
    def w_int(self) -> int:
        return pack(self.w)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
        if X.shape[1] != self.d:
            raise DataError(f"expected inputs of dimension {self.d}, got {X.shape[1]}")
        return ((X.astype(np.int64) @ self.w.astype(np.int64) + self.b) & 1).astype(np.uint8)

    def serialize(self) -> str:
        return f"w={bits_to_hex(self.w_int, self.d)};b={self.b}"

    def restrict(self, i: int, bit: int) -> "AffineParityHypothesis":
        """The parity with ``x_i`` fixed to ``bit``; again an affine parity."""
        w = self.w.copy()
        b = self.b ^ (int(bit) & int(w[i]))
        w[i] = 0
        return AffineParityHypothesis(w, b)

    def restrict_all(self, restriction: Restriction) -> "AffineParityHypothesis":
        h = self
        for i, bit in restriction:
            h = h.restrict(i, bit)
        return h


# -- learners -----------------------------------------------------------------


def _explicit_rows(sample: Sample):
    if sample.labels is None:
        raise DataError("parity learners need labelled samples")
    s = sample.nonzero()
    return s.points, s.labels


def naive_parity_learner(sample: Sample, randomness) -> AffineParityHypothesis:
    """Gaussian elimination returning some affine parity consistent with ``sample``.

    Unknowns are ``(w_0 .. w_{d-1}, b)`` with ``b`` last.  Free variables are
    filled from ``randomness``: a :class:`SeedStream` (shared) or a numpy
    ``Generator`` (private to this execution).
    """
    X, y = _explicit_rows(sample)
    d = X.shape[1]
    rows = [r | (1 << d) for r in row_ints(X)]
    system = Gf2System(d + 1).extend(rows, y)
    if not system.consistent:
        raise InconsistentSystemError(
            f"labelled sample is not realizable by an affine parity (row {system.conflict})",
            row=system.conflict,
        )
    if isinstance(randomness, SeedStream):
        coins = pack(randomness.random_bits(d + 1))
    else:
        coins = pack(randomness.integers(0, 2, size=d + 1))
    u = system.solve(coins)
    return AffineParityHypothesis(u & ((1 << d) - 1), (u >> d) & 1, d)


def aff_parity_sample_size(d: int, rho: float, beta: float) -> int:
    """Labelled draws used by :func:`r_aff_parity`: one anchor plus the offset budget."""
    if not (0 < rho < 1 and 0 < beta < 1):
        raise ParameterError("rho and beta must lie in (0, 1)")
    if d == 0:
        return 1
    return 1 + math.ceil(4 * d * math.log(4 * d / (rho * beta)))


def r_aff_parity_from_sample(sample: Sample) -> AffineParityHypothesis:
    """Exact affine-parity recovery from an explicit labelled sample.

    The first draw is the anchor ``x0``; offsets ``x + x0`` of the remaining
    draws must span GF(2)^d.  No shared randomness is needed because the
    solution is unique whenever it is found.
    """
    X, y = sample.points, sample.labels
    if y is None:
        raise DataError("parity learners need labelled samples")
    if not np.all(sample.counts == 1):
        raise DataError("r_aff_parity needs an explicit ordered sample")
    if len(X) == 0:
        raise ParameterError("empty sample")
    d = X.shape[1]
    rows = row_ints(X)
    x0, y0 = rows[0], int(y[0])
    system = Gf2System(d)
    for r, label in zip(rows[1:], y[1:]):
        system.add(r ^ x0, int(label) ^ y0)
        if system.rank == d:
            break
    if system.rank < d:
        raise InsufficientRankError(f"offsets reached rank {system.rank} < {d}")
    if not system.consistent:
        raise InconsistentSystemError(
            "labelled sample is not realizable by an affine parity", row=system.conflict
        )
    w = system.solve(0)
    b = y0 ^ ((w & x0).bit_count() & 1)
    return AffineParityHypothesis(w, b, d)


def r_aff_parity(source, beta: float, rho: float, stream: SeedStream | None, rng: np.random.Generator):
    """Replicable affine-parity learner for uniform marginals.

    Draws :func:`aff_parity_sample_size` labelled examples from ``source`` with
    the data generator ``rng``.  ``stream`` is accepted for interface
    uniformity; the learner uses no shared randomness.
    """
    d = source.dim
    sample = source.draw(aff_parity_sample_size(d, rho, beta), rng)
    return r_aff_parity_from_sample(sample)


def affine_parity_learner() -> UniformLearnerSpec:
    """:func:`r_aff_parity` packaged for boosting and lifting."""

    def learn(sample, alpha, rho, beta, stream):
        return r_aff_parity_from_sample(sample)

    def size(alpha, rho, beta, d):
        return aff_parity_sample_size(d, rho, beta)

    return UniformLearnerSpec("r_aff_parity", learn, size, restriction_closed=True)


# -- product distributions ------------------------------------------------------


class ProductDistribution(ConditionalSampleOracle):
    """Independent bits with ``Pr[x_i = 1] = p[i]``, optionally labelled by a concept."""

    def __init__(self, p, concept: Hypothesis | None = None):
        p = np.asarray(p, dtype=np.float64)
        if p.ndim != 1 or np.any(p < 0) or np.any(p > 1):
            raise DataError("product marginals must be probabilities")
        self.p = p
        self.dim = len(p)
        self.concept = concept
        self._cube = None

    @property
    def enumerable(self) -> bool:
        return self.dim <= MAX_ENUM_DIM

    @property
    def monotone(self) -> bool:
        return bool(np.all(self.p >= 0.5))

    def labeled_by(self, concept: Hypothesis) -> "ProductDistribution":
        return ProductDistribution(self.p, concept)

    def _labels(self, X):
        return None if self.concept is None else self.concept.predict(X)

    def draw(self, n: int, rng: np.random.Generator) -> Sample:
        X = (rng.random((int(n), self.dim)) < self.p).astype(np.uint8)
        return Sample(X, np.ones(int(n), dtype=np.int64), self._labels(X))

    def hypercube(self) -> HypercubeDistribution:
        """The same distribution as an explicit probability table."""
        if self._cube is None:
            X = all_points(self.dim)
            probs = np.prod(np.where(X == 1, self.p, 1.0 - self.p), axis=1)
            self._cube = HypercubeDistribution(probs, self._labels(X))
        return self._cube

    def draw_counts(self, n, rng):
        if self.enumerable:
            return self.hypercube().draw_counts(n, rng)
        return super().draw_counts(n, rng)

    def pmf(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.prod(np.where(X == 1, self.p, 1.0 - self.p), axis=1)

    def error(self, hypothesis) -> float:
        return self.hypercube().error(hypothesis)

    def draw_conditional(self, restriction: Restriction, n, rng):
        restriction.check(self.dim)
        for i, b in restriction:
            if (self.p[i] if b else 1 - self.p[i]) == 0:
                raise DataError(f"conditioning on a null subcube {restriction}")
        X = restriction.apply((rng.random((int(n), self.dim)) < self.p).astype(np.uint8))
        return Sample(X, np.ones(int(n), dtype=np.int64), self._labels(X))

    def pair_fractions(self, X, i, k, rng):
        X = np.atleast_2d(X)
        q = np.where(X[:, i] == 1, self.p[i], 1.0 - self.p[i])
        return rng.binomial(int(k), q) / float(k)


def skewed_parity_distribution(d: int, n: int, concept: Hypothesis | None = None) -> ProductDistribution:
    """Uniform bits except the last, which is 1 with probability ``(1/2)**(1/n)``.

    A sample of size ``n`` then has all last coordinates equal to 1 with
    probability exactly 1/2.
    """
    if d < 1 or n < 1:
        raise ParameterError("need d >= 1 and n >= 1")
    p = np.full(d, 0.5)
    p[-1] = 0.5 ** (1.0 / n)
    return ProductDistribution(p, concept)
