"""Replicable estimation of bounded statistics by randomized-grid rounding.

Both executions of a replicable algorithm draw the same grid offset from the
shared stream, so two estimates that are close to each other land in the same
grid cell (and are rounded to the same midpoint) unless a cell boundary
happens to fall between them.
"""

from __future__ import annotations

import contextvars
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, ParameterError
from .seedstream import SeedStream

__all__ = [
    "BudgetLedger",
    "RoundingGrid",
    "charge",
    "finite_distr_sample_size",
    "mean_sample_size",
    "project_to_simplex",
    "r_estimate",
    "r_finite_distr_est",
    "r_mean",
    "r_round",
    "raw_accuracy",
]


# -- replicability budget accounting ------------------------------------------

_LEDGER: contextvars.ContextVar = contextvars.ContextVar("replicability_ledger", default=None)


@dataclass
class BudgetLedger:
    """Records every replicability charge made while it is active.

    Use as a context manager; nested ledgers each see the charges made inside
    them.  With ``propagate=False`` the charges stay local, which lets a
    caller replace a callee's own accounting with a declared budget.
    """

    entries: list = field(default_factory=list)
    propagate: bool = True

    def __enter__(self) -> "BudgetLedger":
        self._parent = _LEDGER.get()
        self._token = _LEDGER.set(self)
        return self

    def __exit__(self, *exc):
        _LEDGER.reset(self._token)
        if self._parent is not None and self.propagate:
            self._parent.entries.extend(self.entries)
        return False

    @property
    def total(self) -> float:
        return math.fsum(rho for _, rho in self.entries)

    def by_prefix(self) -> dict:
        out: dict[str, float] = {}
        for label, rho in self.entries:
            head = label.split("/", 1)[0]
            out[head] = out.get(head, 0.0) + rho
        return out


def charge(label: str, rho: float) -> None:
    ledger = _LEDGER.get()
    if ledger is not None:
        ledger.entries.append((label, float(rho)))


# -- rounding -----------------------------------------------------------------


def _check_unit(name: str, value: float, *, open_right: bool = True) -> None:
    if not (0.0 < value < 1.0 if open_right else 0.0 < value <= 1.0):
        raise ParameterError(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True)
class RoundingGrid:
    """Grid of cells ``[k*width + offset, (k+1)*width + offset)``."""

    width: float
    offset: float

    @classmethod
    def build(cls, alpha: float, rho: float, stream: SeedStream) -> "RoundingGrid":
        if not alpha > 0:
            raise ParameterError(f"accuracy must be positive, got {alpha}")
        _check_unit("rho", rho, open_right=False)
        width = 6.0 * alpha / rho
        return cls(width, stream.uniform_unit() * width)

    def cell(self, values) -> np.ndarray:
        return np.floor((np.asarray(values, dtype=np.float64) - self.offset) / self.width)

    def round(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise DomainError("cannot round non-finite values")
        return self.offset + (self.cell(v) + 0.5) * self.width


def r_round(values, alpha: float, rho: float, stream: SeedStream, *, label: str = "r_round"):
    """Round each value to the midpoint of its cell on a shared random grid.

    The grid has width ``6*alpha/rho``.  When every input is within ``alpha`` of
    its target, each rounded value is replicable except with probability
    ``rho``; the single offset is shared by all values, so a vector of ``T``
    values is charged ``T*rho``.  Returns a float for scalar input.
    """
    scalar = np.ndim(values) == 0
    v = np.atleast_1d(np.asarray(values, dtype=np.float64))
    grid = RoundingGrid.build(alpha, rho, stream)
    out = grid.round(v)
    charge(label, rho * len(v))
    return float(out[0]) if scalar else out


# -- bounded means --------------------------------------------------------------


def mean_sample_size(alpha: float, beta: float, width: float = 1.0) -> int:
    """Hoeffding sample size for raw accuracy ``alpha`` at confidence ``beta``."""
    if not alpha > 0:
        raise ParameterError("accuracy must be positive")
    _check_unit("beta", beta)
    return math.ceil(width * width / (2.0 * alpha * alpha) * math.log(2.0 / beta))


def raw_accuracy(accuracy: float, rho: float) -> float:
    """Raw accuracy whose rounded output is ``accuracy``-accurate."""
    return accuracy * rho / 4.0


def _weighted_mean(values, counts):
    v = np.asarray(values, dtype=np.float64)
    if counts is None:
        n = len(v)
        if n == 0:
            raise ParameterError("empty sample")
        return math.fsum(v) / n, n
    c = np.asarray(counts)
    if len(c) != len(v):
        raise DataError("values and counts differ in length")
    n = int(sum(int(x) for x in c)) if c.dtype == object else int(c.sum())
    if n == 0:
        raise ParameterError("empty sample")
    w = c.astype(np.float64)
    return float(np.dot(w, v) / w.sum()), n


def r_mean(
    values,
    alpha: float,
    rho: float,
    beta: float,
    stream: SeedStream,
    *,
    counts=None,
    bounds: tuple[float, float] = (0.0, 1.0),
    label: str = "r_mean",
) -> float:
    """Replicable mean of a bounded sample.

    ``alpha`` is the raw (Hoeffding) accuracy; the output is within
    ``4*alpha/rho`` of the true mean with probability ``1 - beta``.  ``counts``
    gives optional multiplicities for ``values``.
    """
    _check_unit("rho", rho)
    _check_unit("beta", beta)
    lo, hi = bounds
    if not hi > lo:
        raise ParameterError("bounds must satisfy lo < hi")
    v = np.asarray(values, dtype=np.float64)
    if v.size and (not np.all(np.isfinite(v)) or v.min() < lo or v.max() > hi):
        raise DataError(f"sample values must lie in [{lo}, {hi}]")
    mu, n = _weighted_mean(v, counts)
    need = mean_sample_size(alpha, beta, hi - lo)
    if n < need:
        raise ParameterError(f"r_mean needs at least {need} samples, got {n}")
    return r_round(mu, alpha, rho, stream, label=label)


def r_estimate(values, accuracy, rho, beta, stream, *, counts=None, bounds=(0.0, 1.0), label="r_mean"):
    """:func:`r_mean` parametrised by the accuracy of its output."""
    return r_mean(
        values, raw_accuracy(accuracy, rho), rho, beta, stream,
        counts=counts, bounds=bounds, label=label,
    )


# -- finite distributions -------------------------------------------------------


def finite_distr_sample_size(N: int, alpha: float, beta: float, rho: float) -> int:
    """Samples needed by :func:`r_finite_distr_est` (grows like N^2)."""
    raw = raw_accuracy(alpha / 3.0, rho / N)
    return mean_sample_size(raw, beta / N)


def project_to_simplex(p) -> np.ndarray:
    """Clip negatives, then spread the residual mass uniformly with re-clipping."""
    p = np.clip(np.asarray(p, dtype=np.float64), 0.0, None)
    N = len(p)
    for _ in range(N + 1):
        residual = 1.0 - math.fsum(p)
        if residual >= 0:
            p = p + residual / N
            break
        active = p > 0
        p = np.where(active, p + residual / int(active.sum()), 0.0)
        if np.all(p >= 0):
            break
        p = np.clip(p, 0.0, None)
    # absorb accumulated rounding into the largest entry
    j = int(np.argmax(p))
    p[j] += 1.0 - math.fsum(p)
    return p


def r_finite_distr_est(
    samples,
    N: int,
    alpha: float,
    beta: float,
    rho: float,
    stream: SeedStream,
    *,
    counts=None,
    label: str = "r_finite_distr_est",
) -> np.ndarray:
    """Replicable estimate of a distribution over categories ``0..N-1``.

    Pass either the category index of each draw in ``samples`` or, with
    ``samples=None``, the per-category ``counts``.  Each coordinate is rounded
    at replicability ``rho/N`` to accuracy ``alpha/3`` and the result is
    projected back onto the simplex.
    """
    if N < 1:
        raise ParameterError("support size must be at least 1")
    _check_unit("rho", rho)
    _check_unit("beta", beta)
    if samples is not None:
        s = np.asarray(samples)
        if s.size and (s.min() < 0 or s.max() >= N):
            raise DataError(f"category index outside [0, {N})")
        counts = np.bincount(s.astype(np.int64), minlength=N)
    elif counts is None:
        raise ParameterError("provide samples or counts")
    counts = np.asarray(counts)
    if len(counts) != N:
        raise DataError("counts vector must have length N")
    n = int(sum(int(c) for c in counts))
    need = finite_distr_sample_size(N, alpha, beta, rho)
    if n < need:
        raise ParameterError(f"r_finite_distr_est needs at least {need} samples, got {n}")
    freq = counts.astype(np.float64) / float(n)
    raw = raw_accuracy(alpha / 3.0, rho / N)
    rounded = r_round(freq, raw, rho / N, stream, label=label)
    return project_to_simplex(rounded)
