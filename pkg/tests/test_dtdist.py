from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from replicable import (
    BudgetError,
    BuildDtPlan,
    DataError,
    DecisionTreeDistribution,
    DomainError,
    Leaf,
    Node,
    ProductDistribution,
    Restriction,
    SeedStream,
    all_points,
    dt_pmf,
    dt_sample,
    influence_oracle,
    is_monotone,
    monotone_influence_sample_size,
    r_build_dt,
    r_infl_est_monotone,
    r_infl_est_subcube,
    random_monotone_tree,
    random_tree,
    total_influence,
    tv_exact,
)
from replicable.hypercube import codes


def depth1(d=1, lo=0.5, hi=1.5, coord=0):
    return DecisionTreeDistribution(d, Node(coord, Leaf(lo), Leaf(hi)))


def test_uniform_sampling():
    X = dt_sample(DecisionTreeDistribution.uniform(5), 10**5, np.random.default_rng(0))
    assert np.all(np.abs(X.mean(axis=0) - 0.5) < 0.01)


def test_depth1_sampling_and_leaf_consistency():
    D = DecisionTreeDistribution(3, Node(0, Leaf(0.5), Node(2, Leaf(1.0), Leaf(2.0))))
    X = dt_sample(D, 10**5, np.random.default_rng(1))
    assert abs(X[:, 0].mean() - 0.75) < 0.01
    route = D.route(X)
    for idx, (path, _) in enumerate(D.leaves()):
        assert np.all(path.matches(X[route == idx]))


def test_pmf_normalized_and_values():
    D = random_tree(6, 3, np.random.default_rng(2))
    assert math.isclose(D.pmf(all_points(6)).sum(), 1.0)
    assert math.isclose(dt_pmf(depth1(), [1]), 0.75)


def test_tv_examples():
    D = random_tree(4, 2, np.random.default_rng(3))
    assert tv_exact(D, D) == 0
    point = DecisionTreeDistribution(2, Node(0, Leaf(0.0), Node(1, Leaf(0.0), Leaf(4.0))))
    assert math.isclose(tv_exact(DecisionTreeDistribution.uniform(2), point), 0.75)


def test_invalid_trees():
    with pytest.raises(DataError):
        DecisionTreeDistribution(1, Node(0, Leaf(1.0), Leaf(2.0)))
    with pytest.raises(DataError):
        DecisionTreeDistribution(1, Node(0, Leaf(-1.0), Leaf(3.0)))
    with pytest.raises(DataError):
        DecisionTreeDistribution(1, Node(3, Leaf(1.0), Leaf(1.0)))


def test_parse_roundtrip():
    D = random_tree(5, 3, np.random.default_rng(4))
    E = DecisionTreeDistribution.parse(5, D.serialize())
    assert E.serialize() == D.serialize()


def test_influence_oracle_examples():
    for i in range(3):
        assert influence_oracle(DecisionTreeDistribution.uniform(3), Restriction(), i) == 0
    assert math.isclose(influence_oracle(depth1(), Restriction(), 0), 0.5)
    point = DecisionTreeDistribution(1, Node(0, Leaf(0.0), Leaf(2.0)))
    assert math.isclose(influence_oracle(point, Restriction(), 0), 1.0)
    with pytest.raises(DomainError):
        influence_oracle(depth1(2), Restriction.of([(0, 1)]), 0)


def test_monotone_closed_form():
    # canonical influence of a monotone distribution is 2 E[x_i] - 1
    D = ProductDistribution([0.5, 0.7, 0.9])
    for i, p in enumerate(D.p):
        assert math.isclose(influence_oracle(D, Restriction(), i), 2 * p - 1)
    assert math.isclose(influence_oracle(D, Restriction.of([(0, 1)]), 2), 0.8)


@given(st.integers(1, 6), st.integers(0, 3), st.integers(0, 2**32))
def test_total_influence_at_most_depth(d, depth, seed):
    D = random_tree(d, depth, np.random.default_rng(seed))
    assert total_influence(D) <= min(depth, d) + 1e-9


def _monotone_sample(D, depth, acc, rho, beta, rng):
    return D.draw_counts(monotone_influence_sample_size(depth, acc, rho, beta), rng).nonzero()


def test_monotone_estimator_examples(rng):
    acc = 0.05
    U = DecisionTreeDistribution.uniform(3)
    s = _monotone_sample(U, 0, acc, 0.5, 0.05, rng)
    assert abs(r_infl_est_monotone(s, Restriction(), 1, acc, 0.05, 0.5, SeedStream(1))) <= acc
    D = ProductDistribution([0.75])
    s = _monotone_sample(D, 0, acc, 0.5, 0.05, rng)
    assert abs(r_infl_est_monotone(s, Restriction(), 0, acc, 0.05, 0.5, SeedStream(2)) - 0.5) <= acc
    D = ProductDistribution([0.5, 0.5, 0.9])
    pi = Restriction.of([(0, 1)])
    s = _monotone_sample(D, 1, acc, 0.5, 0.05, rng)
    assert abs(r_infl_est_monotone(s, pi, 2, acc, 0.05, 0.5, SeedStream(3)) - 0.8) <= acc


def test_subcube_estimator_examples(rng):
    acc = 0.05
    U = DecisionTreeDistribution.uniform(3)
    assert abs(r_infl_est_subcube(U, Restriction(), 1, acc, 0.05, 0.5, SeedStream(1), rng)) <= acc
    D = ProductDistribution([0.75])
    assert abs(r_infl_est_subcube(D, Restriction(), 0, acc, 0.05, 0.5, SeedStream(2), rng) - 0.5) <= acc


def test_estimators_agree_on_monotone_products(rng):
    acc = 0.1
    for t in range(5):
        p = rng.uniform(0.5, 1.0, size=4)
        D = ProductDistribution(p)
        pi = Restriction.of([(0, 1)])
        s = _monotone_sample(D, 1, acc, 0.5, 0.05, rng)
        a = r_infl_est_monotone(s, pi, 2, acc, 0.05, 0.5, SeedStream(t))
        b = r_infl_est_subcube(D, pi, 2, acc, 0.05, 0.5, SeedStream(t), rng)
        assert abs(a - b) <= 2 * acc


def test_estimator_is_replayable(rng):
    D = ProductDistribution([0.6, 0.8])
    s = _monotone_sample(D, 0, 0.1, 0.5, 0.1, rng)
    a = r_infl_est_monotone(s, Restriction(), 1, 0.1, 0.1, 0.5, SeedStream(9))
    b = r_infl_est_monotone(s, Restriction(), 1, 0.1, 0.1, 0.5, SeedStream(9))
    assert a == b


def test_tau_default():
    assert math.isclose(BuildDtPlan().resolve(6, 2, 0.2).tau, 0.00625)


def test_call_cap():
    with pytest.raises(BudgetError):
        BuildDtPlan(call_cap=10).resolve(8, 2, 0.2)


def test_build_uniform_is_single_leaf(rng):
    for ell in (0, 1, 2):
        T = r_build_dt(DecisionTreeDistribution.uniform(4), ell, 0.2, 0.1, 0.5, SeedStream(ell), rng)
        assert T.depth == 0
        assert abs(T.leaves()[0][1] - 1.0) <= 0.1


def test_build_depth1_product(rng):
    D = ProductDistribution([0.75, 0.5])
    T = r_build_dt(D, 1, 0.2, 0.1, 0.5, SeedStream(5), rng)
    assert T.structure() == "(x0 [] [])"
    assert tv_exact(D, T) <= 0.2
    assert abs(T.leaves()[1][1] - 1.5) <= 0.1


def test_build_random_monotone(rng):
    D = random_monotone_tree(6, rng)
    assert is_monotone(D)
    for t in range(3):
        T = r_build_dt(D, 2, 0.2, 0.1, 0.5, SeedStream(t), rng)
        T.validate()
        assert tv_exact(D, T) <= 0.2


def test_build_replays_exactly():
    D = random_monotone_tree(5, np.random.default_rng(6))
    a = r_build_dt(D, 2, 0.2, 0.1, 0.5, SeedStream(1), np.random.default_rng(7))
    b = r_build_dt(D, 2, 0.2, 0.1, 0.5, SeedStream(1), np.random.default_rng(7))
    assert a.serialize() == b.serialize()


def test_build_subcube_with_desk_plan(rng):
    # theory budgets are far out of reach for the pair estimator; a loose plan exercises it
    D = random_tree(4, 1, rng)
    plan = BuildDtPlan(tau=0.2, influence_accuracy=0.05, max_calls=20, estimator="subcube")
    T = r_build_dt(D, 1, 0.2, 0.1, 0.5, SeedStream(3), rng, plan=plan)
    T.validate()
    assert tv_exact(D, T) <= 0.2


@given(st.integers(0, 2**32))
def test_build_output_always_valid(seed):
    rng = np.random.default_rng(seed)
    D = random_tree(4, 2, rng)
    plan = BuildDtPlan(tau=0.3, influence_accuracy=0.2, max_calls=40)
    T = r_build_dt(D, 2, 0.5, 0.5, 0.9, SeedStream(seed), rng, plan=plan)
    T.validate()
    assert T.depth <= 2
    assert math.isclose(T.pmf(all_points(4)).sum(), 1.0)


def test_route_covers_every_point():
    D = random_tree(5, 3, np.random.default_rng(8))
    X = all_points(5)
    r = D.route(X)
    assert set(r) == set(range(len(D.leaves())))
    assert np.array_equal(codes(X), np.arange(32))
