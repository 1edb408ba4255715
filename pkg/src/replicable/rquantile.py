"""Replicable quantile estimation over a finite ordered support ``[R] = {1..R}``.

A binary search on the empirical CDF where every comparison is made on a
replicably rounded CDF value.  Each midpoint has its own derived stream, so
two executions that reach the same midpoint round on the same grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParameterError
from .rstat import r_round
from .seedstream import SeedStream

__all__ = ["EmpiricalCdf", "quantile_sample_size", "r_quantile_est"]


def _padded(R: int) -> tuple[int, int]:
    """Smallest power of two >= R and its log."""
    depth = max(0, (int(R) - 1).bit_length())
    return 1 << depth, depth


def quantile_sample_size(R: int, alpha: float, rho: float, beta: float) -> int:
    """Samples needed for :func:`r_quantile_est` on a support of size ``R``."""
    _, depth = _padded(R)
    if depth == 0:
        return 1
    return math.ceil(16 * depth**2 / (2 * alpha**2 * rho**2) * math.log(2 / beta))


@dataclass(frozen=True)
class EmpiricalCdf:
    """Cumulative counts of a sample over ``[R]``; ``counts[i-1]`` is #{x <= i}."""

    R: int
    cumulative: np.ndarray
    n: int

    @classmethod
    def from_counts(cls, counts) -> "EmpiricalCdf":
        c = np.asarray(counts)
        cum = np.cumsum(c.astype(object) if c.dtype == object else c.astype(np.int64))
        n = int(cum[-1]) if len(cum) else 0
        return cls(len(c), cum, n)

    @classmethod
    def from_samples(cls, samples, R: int) -> "EmpiricalCdf":
        s = np.asarray(samples, dtype=np.int64)
        if s.size and (s.min() < 1 or s.max() > R):
            raise DataError(f"sample values must lie in [1, {R}]")
        return cls.from_counts(np.bincount(s - 1, minlength=R)[:R])

    def __call__(self, i: int) -> float:
        """F_n(i) as a fraction; F_n(0) = 0 and F_n(i) = 1 for i >= R."""
        if i <= 0:
            return 0.0
        if i >= self.R:
            return 1.0
        return float(self.cumulative[i - 1]) / float(self.n)


def r_quantile_est(
    samples,
    R: int,
    q: float,
    alpha: float,
    rho: float,
    beta: float,
    stream: SeedStream,
    *,
    counts=None,
    trace=None,
    check_size: bool = True,
) -> int:
    """Replicable ``q``-quantile of a sample over ``[R]``.

    With enough samples the result ``x`` satisfies ``F(x) >= q - alpha`` and
    ``F(x-1) < q + alpha`` with probability ``1 - beta``.  Supply either the
    raw ``samples`` or per-value ``counts`` (length ``R``).  ``trace`` is called
    as ``trace(lo, hi, mid, rounded)`` once per iteration.
    """
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"quantile level must lie in [0, 1], got {q}")
    if R < 1:
        raise ParameterError("support size must be positive")
    if samples is not None:
        cdf = EmpiricalCdf.from_samples(samples, R)
    elif counts is not None:
        if len(counts) != R:
            raise DataError("counts must have length R")
        cdf = EmpiricalCdf.from_counts(counts)
    else:
        raise ParameterError("provide samples or counts")
    if cdf.n == 0:
        raise ParameterError("empty sample")
    padded, depth = _padded(R)
    if check_size:
        need = quantile_sample_size(R, alpha, rho, beta)
        if cdf.n < need:
            raise ParameterError(f"r_quantile_est needs at least {need} samples, got {cdf.n}")
    if depth == 0:
        return 1

    step_alpha = alpha * rho / (4 * depth)
    step_rho = rho / depth
    lo, hi = 0, padded
    while lo < hi - 1:
        mid = (lo + hi) // 2
        rounded = r_round(cdf(mid), step_alpha, step_rho, stream.derive(f"mid/{mid}"), label="r_quantile_est")
        if trace is not None:
            trace(lo, hi, mid, rounded)
        if rounded >= q:
            hi = mid
        else:
            lo = mid
    # padding values carry no mass, so the answer can be clamped back into [R]
    return min(hi, R)
