"""Sample containers and data sources.

Every statistic the learners compute is a function of the empirical
distribution of their sample, so a sample is stored as a list of distinct
points with multiplicities.  Explicit i.i.d. draws simply have all counts equal
to one.  For sources with an enumerable support, :meth:`draw_counts` draws the
multiplicity vector directly from the multinomial law, which is an exact
simulation of ``n`` i.i.d. draws and lets the algorithms run at their
worst-case sample sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DataError, ParameterError
from .hypercube import Restriction, all_points, codes, flip

__all__ = [
    "MAX_EXPLICIT_DRAWS",
    "ConditionalSampleOracle",
    "FiniteDistribution",
    "HypercubeDistribution",
    "Sample",
    "SampleOracle",
    "multinomial",
]

MAX_EXPLICIT_DRAWS = 50_000_000
_CHUNK = 1 << 62
_MAX_CHUNKS = 4096


def multinomial(n: int, probs, rng: np.random.Generator) -> np.ndarray:
    """Multinomial counts for arbitrarily large ``n``.

    Counts are int64 while ``n <= 2**62``; beyond that the draw is a sum of
    independent chunked multinomials held as Python ints (object dtype).
    """
    n = int(n)
    if n < 0:
        raise ParameterError("sample size must be non-negative")
    p = np.asarray(probs, dtype=np.float64)
    p = p / p.sum()
    if n <= _CHUNK:
        return rng.multinomial(n, p)
    q, r = divmod(n, _CHUNK)
    if q > _MAX_CHUNKS:
        raise BudgetError(f"sample size {n:.3e} exceeds the multinomial simulation limit")
    bulk = rng.multinomial(_CHUNK, p, size=q).astype(object).sum(axis=0)
    return bulk + rng.multinomial(r, p).astype(object)


@dataclass(frozen=True, eq=False)
class Sample:
    """Distinct points with multiplicities and optional labels."""

    points: np.ndarray
    counts: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        if len(self.points) != len(self.counts):
            raise DataError("points and counts differ in length")
        if self.labels is not None and len(self.labels) != len(self.points):
            raise DataError("points and labels differ in length")

    @classmethod
    def from_points(cls, points, labels=None) -> "Sample":
        points = np.asarray(points)
        counts = np.ones(len(points), dtype=np.int64)
        if labels is not None:
            labels = np.asarray(labels, dtype=np.uint8)
        return cls(points, counts, labels)

    @property
    def n(self) -> int:
        return int(sum(int(c) for c in self.counts)) if self.counts.dtype == object else int(self.counts.sum())

    def __len__(self) -> int:
        return self.n

    @property
    def weights(self) -> np.ndarray:
        return self.counts.astype(np.float64)

    def mean(self, values) -> float:
        """Empirical mean of per-point ``values``."""
        w = self.weights
        total = w.sum()
        if total == 0:
            raise ParameterError("empty sample")
        return float(np.dot(w, np.asarray(values, dtype=np.float64)) / total)

    def subset(self, mask) -> "Sample":
        mask = np.asarray(mask, dtype=bool)
        labels = None if self.labels is None else self.labels[mask]
        return Sample(self.points[mask], self.counts[mask], labels)

    def nonzero(self) -> "Sample":
        return self.subset(self.counts != 0)

    def head(self, m: int) -> "Sample":
        """First ``m`` draws of an explicit sample."""
        if not np.all(self.counts == 1):
            raise DataError("head() needs an explicit (unaggregated) sample")
        labels = None if self.labels is None else self.labels[:m]
        return Sample(self.points[:m], self.counts[:m], labels)


class SampleOracle:
    """Source of i.i.d. draws.  Subclasses implement :meth:`draw`."""

    dim: int | None = None
    enumerable = False

    def draw(self, n: int, rng: np.random.Generator) -> Sample:
        raise NotImplementedError

    def draw_counts(self, n: int, rng: np.random.Generator) -> Sample:
        """Aggregated sample; falls back to explicit draws when not enumerable."""
        if n > MAX_EXPLICIT_DRAWS:
            raise BudgetError(
                f"{n:.3e} draws requested from a non-enumerable source "
                f"(limit {MAX_EXPLICIT_DRAWS:.1e})"
            )
        return self.draw(n, rng)


class ConditionalSampleOracle(SampleOracle):
    """Source that can also sample conditionally on a subcube."""

    def draw_conditional(self, restriction: Restriction, n: int, rng: np.random.Generator) -> Sample:
        raise NotImplementedError

    def pair_fractions(self, X: np.ndarray, i: int, k: int, rng: np.random.Generator) -> np.ndarray:
        """For each row ``x``: fraction of ``k`` draws from D(. | {x, x^~i}) that equal ``x``.

        The default issues one conditional query per row.
        """
        out = np.empty(len(X))
        for r, x in enumerate(np.atleast_2d(X)):
            pairs = [(j, int(x[j])) for j in range(len(x)) if j != i]
            s = self.draw_conditional(Restriction.of(pairs), k, rng)
            same = s.points[:, i] == x[i]
            out[r] = float(s.counts[same].sum()) / k
        return out


class FiniteDistribution(SampleOracle):
    """Distribution with an explicit finite support (optionally labelled)."""

    enumerable = True

    def __init__(self, points, probs, labels=None):
        points = np.asarray(points)
        probs = np.asarray(probs, dtype=np.float64)
        if len(points) != len(probs) or len(points) == 0:
            raise DataError("support and probability vector must be non-empty and aligned")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise DataError("probabilities must be finite and non-negative")
        total = probs.sum()
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"probabilities sum to {total}, not 1")
        self.points = points
        self.probs = probs / total
        self.labels = None if labels is None else np.asarray(labels, dtype=np.uint8)
        if points.ndim == 2 and points.dtype == np.uint8:
            self.dim = points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def with_labels(self, labels) -> "FiniteDistribution":
        return FiniteDistribution(self.points, self.probs, labels)

    def labeled_by(self, concept) -> "FiniteDistribution":
        return self.with_labels(concept.predict(self.points))

    def draw(self, n: int, rng: np.random.Generator) -> Sample:
        if n > MAX_EXPLICIT_DRAWS:
            raise BudgetError(f"{n:.3e} explicit draws requested; use draw_counts")
        idx = rng.choice(len(self.probs), size=int(n), p=self.probs)
        labels = None if self.labels is None else self.labels[idx]
        return Sample(self.points[idx], np.ones(int(n), dtype=np.int64), labels)

    def draw_counts(self, n: int, rng: np.random.Generator) -> Sample:
        counts = multinomial(n, self.probs, rng)
        return Sample(self.points, counts, self.labels)

    def mass(self, mask) -> float:
        return float(self.probs[np.asarray(mask, dtype=bool)].sum())

    def error(self, hypothesis) -> float:
        """Exact misclassification probability of ``hypothesis`` against the labels."""
        if self.labels is None:
            raise DataError("distribution carries no labels")
        wrong = np.asarray(hypothesis.predict(self.points), dtype=np.uint8) != self.labels
        return float(self.probs[wrong].sum())


class HypercubeDistribution(FiniteDistribution, ConditionalSampleOracle):
    """Distribution over all of {0,1}^d given by its full probability table."""

    def __init__(self, probs, labels=None):
        probs = np.asarray(probs, dtype=np.float64)
        d = int(round(np.log2(len(probs))))
        if len(probs) != 1 << d:
            raise DataError("probability table length must be a power of two")
        super().__init__(all_points(d), probs, labels)
        self.dim = d

    @property
    def d(self) -> int:
        return self.dim

    def with_labels(self, labels) -> "HypercubeDistribution":
        return HypercubeDistribution(self.probs, labels)

    def pmf(self, X) -> np.ndarray:
        return self.probs[codes(X)]

    def draw_conditional(self, restriction: Restriction, n: int, rng: np.random.Generator) -> Sample:
        restriction.check(self.d)
        mask = restriction.matches(self.points)
        p = np.where(mask, self.probs, 0.0)
        total = p.sum()
        if total <= 0:
            raise DataError(f"conditioning on a null subcube {restriction}")
        idx = rng.choice(len(p), size=int(n), p=p / total)
        labels = None if self.labels is None else self.labels[idx]
        return Sample(self.points[idx], np.ones(int(n), dtype=np.int64), labels)

    def pair_fractions(self, X, i, k, rng):
        X = np.atleast_2d(X)
        px = self.pmf(X)
        py = self.pmf(flip(X, i))
        denom = px + py
        if np.any(denom <= 0):
            raise DataError("pair subcube has zero mass")
        return rng.binomial(int(k), px / denom) / float(k)
