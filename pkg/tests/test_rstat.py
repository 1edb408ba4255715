from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from replicable import (
    BudgetLedger,
    DataError,
    DomainError,
    ParameterError,
    RoundingGrid,
    SeedStream,
    finite_distr_sample_size,
    mean_sample_size,
    project_to_simplex,
    r_finite_distr_est,
    r_mean,
    r_round,
)


def test_grid_width():
    g = RoundingGrid.build(0.05, 0.3, SeedStream(1))
    assert math.isclose(g.width, 1.0)
    assert 0 <= g.offset < g.width


def test_fixed_grid_midpoint():
    g = RoundingGrid(0.6, 0.25)
    assert math.isclose(float(g.round(0.5)), 0.55)
    # left-closed cells: the boundary belongs to the cell on its right
    assert math.isclose(float(g.round(0.85)), 1.15)


def test_same_cell_same_output():
    s = SeedStream(2)
    g = RoundingGrid.build(0.01, 0.1, s.copy())
    lo = g.offset + 3 * g.width
    a = r_round(lo + 0.1 * g.width, 0.01, 0.1, s.copy())
    b = r_round(lo + 0.9 * g.width, 0.01, 0.1, s.copy())
    assert a == b


def test_non_finite_rejected():
    with pytest.raises(DomainError):
        r_round(float("nan"), 0.1, 0.5, SeedStream(1))


@given(st.floats(-1e6, 1e6), st.floats(1e-4, 1.0), st.floats(0.01, 1.0), st.integers(0, 2**32))
def test_rounding_error_at_most_half_width(v, alpha, rho, seed):
    out = r_round(v, alpha, rho, SeedStream(seed))
    assert abs(out - v) <= 3 * alpha / rho * (1 + 1e-9) + 1e-9


def test_vector_charge():
    with BudgetLedger() as ledger:
        r_round([0.1, 0.2, 0.3], 0.01, 0.1, SeedStream(1), label="t")
    assert math.isclose(ledger.total, 0.3)


def test_nested_ledger_without_propagation():
    with BudgetLedger() as outer:
        with BudgetLedger(propagate=False) as inner:
            r_round(0.5, 0.01, 0.1, SeedStream(1))
    assert inner.total > 0 and outer.total == 0


def test_constant_sample_is_cell_midpoint():
    s = SeedStream(3)
    n = mean_sample_size(0.05, 0.1)
    out = r_mean(np.full(n, 0.37), 0.05, 0.5, 0.1, s.copy())
    g = RoundingGrid.build(0.05, 0.5, s.copy())
    assert math.isclose(out, float(g.round(0.37)))
    assert abs(out - 0.37) <= g.width / 2


def test_r_mean_preconditions():
    with pytest.raises(ParameterError):
        r_mean([0.5] * 3, 0.05, 0.5, 0.1, SeedStream(1))
    with pytest.raises(DataError):
        r_mean([2.0] * 10**4, 0.05, 0.5, 0.1, SeedStream(1))


def test_r_mean_bernoulli_accuracy():
    rng = np.random.default_rng(0)
    n = mean_sample_size(0.02, 0.01)
    ok = 0
    for t in range(1000):
        k = int(rng.binomial(n, 0.5))
        mu = r_mean([0.0, 1.0], 0.02, 0.2, 0.01, SeedStream(t), counts=[n - k, k])
        ok += abs(mu - 0.5) <= 0.4
    assert ok >= 990


def test_finite_distr_point_mass():
    N, alpha = 3, 0.1
    n = finite_distr_sample_size(N, alpha, 0.1, 0.5)
    p = r_finite_distr_est(None, N, alpha, 0.1, 0.5, SeedStream(4), counts=[n, 0, 0])
    assert math.isclose(p.sum(), 1.0) and np.all(p >= 0)
    assert np.max(np.abs(p - [1, 0, 0])) <= alpha


def test_finite_distr_bernoulli():
    # exact oracle: the category frequencies are (0.7, 0.3)
    rng = np.random.default_rng(5)
    n = finite_distr_sample_size(2, 0.05, 0.05, 0.5)
    hits = 0
    for t in range(50):
        k = int(rng.binomial(n, 0.3))
        p = r_finite_distr_est(None, 2, 0.05, 0.05, 0.5, SeedStream(t), counts=[n - k, k])
        hits += np.max(np.abs(p - [0.7, 0.3])) <= 0.05
    assert hits >= 47


def test_finite_distr_bad_category():
    with pytest.raises(DataError):
        r_finite_distr_est([0, 3], 3, 0.5, 0.5, 0.5, SeedStream(1))


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=12))
def test_simplex_projection(values):
    p = project_to_simplex(values)
    assert np.all(p >= 0)
    assert math.isclose(math.fsum(p), 1.0, abs_tol=1e-12)


@given(st.lists(st.integers(0, 50), min_size=2, max_size=6), st.integers(0, 2**32))
def test_finite_distr_output_is_distribution(counts, seed):
    counts = [c * 10**6 for c in counts]
    if sum(counts) == 0:
        counts[0] = 1
    N = len(counts)
    need = finite_distr_sample_size(N, 0.9, 0.9, 0.9)
    counts[0] += need
    p = r_finite_distr_est(None, N, 0.9, 0.9, 0.9, SeedStream(seed), counts=counts)
    assert np.all(p >= 0) and math.isclose(math.fsum(p), 1.0, abs_tol=1e-12)
