from __future__ import annotations

import math

import numpy as np
import pytest

from replicable import (
    AffineParityHypothesis,
    BudgetError,
    BudgetLedger,
    ConstantHypothesis,
    DecisionTreeDistribution,
    KeyedGuessHypothesis,
    LeafSource,
    LearnerFailure,
    Leaf,
    LiftedHypothesis,
    Node,
    ParameterError,
    ProductDistribution,
    Restriction,
    SeedStream,
    TableHypothesis,
    UniformLearnerSpec,
    affine_parity_learner,
    all_points,
    boost_runs,
    lift_end_to_end,
    r_boost,
    r_lift,
    skewed_parity_distribution,
)
from replicable.hypercube import codes


def uniform_labeled(d, concept):
    return ProductDistribution(np.full(d, 0.5), concept)


def constant_learner(h):
    return UniformLearnerSpec("const", lambda s, a, r, b, st: h, lambda a, r, b, d: 1, restriction_closed=True)


def coin_learner(good, bad):
    # returns the target on heads of a shared coin, an error-1/2 hypothesis otherwise
    def learn(sample, alpha, rho, beta, stream):
        return good if stream.uniform_unit() < 0.5 else bad

    return UniformLearnerSpec("coin", learn, lambda a, r, b, d: 1)


def memorizer(size=400):
    def learn(sample, alpha, rho, beta, stream):
        table = np.zeros(1 << sample.points.shape[1], dtype=np.uint8)
        table[codes(sample.points)] = sample.labels
        return TableHypothesis(table)

    return UniformLearnerSpec("memorize", learn, lambda a, r, b, d: size, restriction_closed=True)


def test_run_count():
    assert boost_runs(2 / math.e**8) == 64
    assert boost_runs(2 / math.e**9) == 72


def test_boost_constant_learner(rng):
    h = ConstantHypothesis(1)
    D = uniform_labeled(4, AffineParityHypothesis(0, 1, 4))
    assert r_boost(constant_learner(h), D, 0.1, 0.1, 0.5, SeedStream(1), rng) == h


def test_boost_amplifies_confidence(rng):
    d = 6
    f = AffineParityHypothesis(0b101101, 0, d)
    bad = AffineParityHypothesis(0b000001, 0, d)
    D = uniform_labeled(d, f)
    assert D.error(bad) == 0.5
    wins = sum(
        r_boost(coin_learner(f, bad), D, 0.1, 0.05, 0.5, SeedStream(t), rng) == f for t in range(30)
    )
    assert wins >= 27


def test_boost_all_runs_fail(rng):
    def learn(*args):
        raise LearnerFailure("nope")

    weak = UniformLearnerSpec("fail", learn, lambda a, r, b, d: 1)
    with pytest.raises(LearnerFailure):
        r_boost(weak, uniform_labeled(3, ConstantHypothesis(0)), 0.1, 0.1, 0.5, SeedStream(1), rng)


def test_leaf_source_budget(rng):
    D = uniform_labeled(3, ConstantHypothesis(0))
    src = LeafSource(D, Restriction.of([(0, 1)]), 10)
    src.draw(6, rng)
    with pytest.raises(BudgetError):
        src.draw(5, rng)


def test_leaf_source_rerandomizes_path_and_keeps_labels(rng):
    f = AffineParityHypothesis(0b011, 0, 3)
    D = ProductDistribution([0.9, 0.5, 0.5], f)
    path = Restriction.of([(0, 1)])
    src = LeafSource(D, path, 10**6)
    table = src.table()
    assert math.isclose(table.probs.sum(), 1.0)
    # path coordinate is uniform, the rest follow D conditioned on the leaf
    assert math.isclose(table.probs[table.points[:, 0] == 1].sum(), 0.5)
    assert np.array_equal(table.labels, f.predict(path.apply(table.points)))


def test_single_leaf_tree_reduces_to_boost(rng):
    f = AffineParityHypothesis(0b1011, 1, 4)
    D = uniform_labeled(4, f)
    tree = DecisionTreeDistribution.uniform(4)
    h = r_lift(tree, affine_parity_learner(), D, 0.25, 0.1, 0.5, SeedStream(2), rng)
    assert isinstance(h, LiftedHypothesis) and len(h.leaf_hypotheses) == 1
    assert D.error(h) == 0


def test_requires_restriction_closed(rng):
    weak = UniformLearnerSpec("open", lambda *a: None, lambda *a: 1)
    with pytest.raises(ParameterError):
        r_lift(DecisionTreeDistribution.uniform(2), weak, uniform_labeled(2, ConstantHypothesis(0)), 0.2, 0.1, 0.5, SeedStream(1), rng)


def test_gated_leaf_is_shared_guess():
    f = AffineParityHypothesis(0b111, 0, 3)
    D = ProductDistribution([0.999, 0.5, 0.5], f)
    tree = DecisionTreeDistribution(3, Node(0, Leaf(0.002), Leaf(1.998)))
    outs = []
    for seed in (10, 11):
        h = r_lift(tree, affine_parity_learner(), D, 0.25, 0.1, 0.5, SeedStream(5), np.random.default_rng(seed))
        outs.append(h)
    assert isinstance(outs[0].leaf_hypotheses[0], KeyedGuessHypothesis)
    assert outs[0].leaf_hypotheses[0].serialize() == outs[1].leaf_hypotheses[0].serialize()
    X = all_points(3)
    assert np.array_equal(outs[0].leaf_hypotheses[0].predict(X), outs[1].leaf_hypotheses[0].predict(X))


def test_lifted_error_decomposes_over_leaves(rng):
    d = 8
    f = AffineParityHypothesis(0b10110101, 1, d)
    D = skewed_parity_distribution(d, 200, f)
    h = lift_end_to_end(D, affine_parity_learner(), 1, 0.25, 0.1, 0.5, SeedStream(3), rng)
    cube = D.hypercube()
    total = 0.0
    for idx, (path, _) in enumerate(h.tree.leaves()):
        mask = path.matches(cube.points)
        mass = cube.probs[mask].sum()
        wrong = h.leaf_hypotheses[idx].predict(cube.points[mask]) != cube.labels[mask]
        total += float(np.dot(cube.probs[mask], wrong))
        assert mass >= 0
    assert math.isclose(D.error(h), total, abs_tol=1e-12)
    assert D.error(h) <= 0.25


def test_end_to_end_budget_ledger(rng):
    d = 8
    D = skewed_parity_distribution(d, 200, AffineParityHypothesis(0b01100011, 0, d))
    with BudgetLedger() as ledger:
        lift_end_to_end(D, affine_parity_learner(), 1, 0.25, 0.1, 0.5, SeedStream(4), rng)
    assert 0 < ledger.total <= 0.5


def test_end_to_end_uniform(rng):
    f = AffineParityHypothesis(0b110, 1, 3)
    D = uniform_labeled(3, f)
    h = lift_end_to_end(D, affine_parity_learner(), 1, 0.25, 0.1, 0.5, SeedStream(6), rng)
    assert h.tree.depth == 0
    assert D.error(h) == 0


def test_memorizer_on_depth1_distribution(rng):
    d = 6
    truth = rng.integers(0, 2, size=1 << d).astype(np.uint8)
    target = TableHypothesis(truth)
    tree = DecisionTreeDistribution(d, Node(2, Leaf(0.6), Leaf(1.4)), concept=target)
    h = lift_end_to_end(tree, memorizer(), 1, 0.25, 0.1, 0.5, SeedStream(7), rng)
    assert tree.error(h) == 0
