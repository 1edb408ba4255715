from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from replicable import (
    DataError,
    EmpiricalCdf,
    ParameterError,
    SeedStream,
    multinomial,
    quantile_sample_size,
    r_quantile_est,
)


def test_sample_size_formula():
    assert quantile_sample_size(2, 1.0, 1.0, 2 / math.e) == 8


def test_point_mass():
    R, n = 8, quantile_sample_size(8, 0.1, 0.5, 0.05)
    counts = np.zeros(R, dtype=np.int64)
    counts[4] = n
    assert r_quantile_est(None, R, 0.5, 0.1, 0.5, 0.05, SeedStream(1), counts=counts) == 5


def test_uniform_median():
    R = 8
    n = quantile_sample_size(R, 0.1, 0.5, 0.05)
    rng = np.random.default_rng(2)
    for t in range(20):
        counts = multinomial(n, np.full(R, 1 / R), rng)
        assert r_quantile_est(None, R, 0.5, 0.1, 0.5, 0.05, SeedStream(t), counts=counts) in (4, 5)


def test_raw_samples_match_counts():
    samples = [1, 2, 2, 3, 8] * 3
    cdf = EmpiricalCdf.from_samples(samples, 8)
    assert math.isclose(cdf(2), 9 / 15)
    assert cdf(0) == 0 and cdf(8) == 1
    a = r_quantile_est(samples, 8, 0.5, 0.4, 0.9, 0.9, SeedStream(3), check_size=False)
    b = r_quantile_est(None, 8, 0.5, 0.4, 0.9, 0.9, SeedStream(3), counts=[3, 6, 3, 0, 0, 0, 0, 3], check_size=False)
    assert a == b


def test_errors():
    with pytest.raises(ParameterError):
        r_quantile_est([1, 2], 4, 1.5, 0.1, 0.5, 0.1, SeedStream(1))
    with pytest.raises(ParameterError):
        r_quantile_est([1, 2], 4, 0.5, 0.1, 0.5, 0.1, SeedStream(1))
    with pytest.raises(DataError):
        r_quantile_est([0, 5], 4, 0.5, 0.1, 0.5, 0.1, SeedStream(1), check_size=False)


@given(
    st.lists(st.integers(0, 40), min_size=2, max_size=40),
    st.floats(0.0, 1.0),
    st.integers(0, 2**32),
)
def test_loop_invariant_and_iteration_count(weights, q, seed):
    R = len(weights)
    if sum(weights) == 0:
        weights[0] = 1
    counts = np.array(weights, dtype=np.int64)
    cdf = EmpiricalCdf.from_counts(counts)
    alpha, rho = 0.2, 0.5
    steps = []

    def trace(lo, hi, mid, rounded):
        steps.append((lo, hi))
        # each rounding is within 3*alpha/4 of the empirical CDF
        assert abs(rounded - cdf(min(mid, R))) <= 0.75 * alpha + 1e-12

    x = r_quantile_est(None, R, q, alpha, rho, 0.5, SeedStream(seed), counts=counts, trace=trace, check_size=False)
    depth = math.ceil(math.log2(R))
    assert len(steps) == depth
    for lo, hi in steps:
        assert hi == 2**depth or cdf(min(hi, R)) >= q - alpha
        assert lo == 0 or cdf(lo) < q + alpha
    assert 1 <= x <= R
    assert cdf(x) >= q - alpha and cdf(x - 1) < q + alpha
