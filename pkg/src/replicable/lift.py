"""Confidence boosting and lifting of uniform-marginal learners.

:func:`r_lift` splits {0,1}^d along the leaves of a learned decision-tree
distribution.  Inside a leaf the distribution is close to uniform once the
coordinates fixed by the leaf's path are re-randomized, so a learner built for
uniform marginals can be run there and boosted to high confidence.
"""

from __future__ import annotations

import math

import numpy as np

from .dtdist import BuildDtPlan, DecisionTreeDistribution, r_build_dt
from .errors import BudgetError, DataError, LearnerFailure, ParameterError, ReplicableError
from .hypercube import Restriction, codes
from .hypotheses import Hypothesis, KeyedGuessHypothesis, UniformLearnerSpec
from .rstat import BudgetLedger, charge, finite_distr_sample_size, mean_sample_size, r_estimate, r_finite_distr_est, raw_accuracy
from .sampling import FiniteDistribution, Sample, SampleOracle
from .seedstream import SeedStream

__all__ = [
    "LeafSource",
    "LiftedHypothesis",
    "UniformLearnerSpec",
    "boost_runs",
    "boost_sample_size",
    "lift_end_to_end",
    "lift_sample_sizes",
    "r_boost",
    "r_lift",
]


# -- boosting ---------------------------------------------------------------------


def boost_runs(beta: float) -> int:
    return math.ceil(8 * math.log(2 / beta))


def _error_sample_size(alpha: float, beta: float, rho: float) -> int:
    n = boost_runs(beta)
    return mean_sample_size(raw_accuracy(alpha, rho / (2 * n)), beta / (2 * n))


def boost_sample_size(weak: UniformLearnerSpec, d: int, alpha: float, beta: float, rho: float, weak_beta: float = 0.5) -> int:
    """Draws consumed by :func:`r_boost`: all weak runs plus the error estimates."""
    n = boost_runs(beta)
    m = weak.sample_size(alpha, rho / (2 * n), weak_beta, d)
    return n * m + _error_sample_size(alpha, beta, rho)


def r_boost(
    weak: UniformLearnerSpec,
    source: SampleOracle,
    alpha: float,
    beta: float,
    rho: float,
    stream: SeedStream,
    rng: np.random.Generator,
    *,
    weak_beta: float = 0.5,
) -> Hypothesis:
    """Run the weak learner ``ceil(8 ln(2/beta))`` times and keep the best.

    Each run and each error estimate is ``rho/(2n)``-replicable; errors are
    estimated to accuracy ``alpha``.  Runs that raise count as candidates
    with infinite error; if every run fails, :class:`LearnerFailure` is raised.
    """
    if not (0 < alpha < 1 and 0 < beta < 1 and 0 < rho < 1):
        raise ParameterError("alpha, beta, rho must lie in (0, 1)")
    d = source.dim
    n = boost_runs(beta)
    rho_run = rho / (2 * n)
    m = weak.sample_size(alpha, rho_run, weak_beta, d)
    candidates: list[Hypothesis | None] = []
    for j in range(n):
        sample = source.draw(m, rng)
        with BudgetLedger(propagate=False):
            try:
                h = weak.learn(sample, alpha, rho_run, weak_beta, stream.derive(f"run/{j}"))
            except ReplicableError:
                h = None
        charge("boost/run", rho_run)
        candidates.append(h)
    if all(h is None for h in candidates):
        raise LearnerFailure(f"all {n} runs of {weak.name} failed")

    check = source.draw_counts(_error_sample_size(alpha, beta, rho), rng).nonzero()
    if check.labels is None:
        raise DataError("boosting needs labelled samples")
    errors = []
    for j, h in enumerate(candidates):
        if h is None:
            errors.append(math.inf)
            continue
        mistakes = (h.predict(check.points) != check.labels).astype(np.float64)
        errors.append(
            r_estimate(
                mistakes, alpha, rho_run, beta / (2 * n), stream.derive(f"error/{j}"),
                counts=check.counts, label="boost/error",
            )
        )
    best = int(np.argmin(errors))
    return candidates[best]


# -- lifting ----------------------------------------------------------------------


class LeafSource(SampleOracle):
    """Draws from ``D`` conditioned on a leaf, path coordinates re-randomized.

    Labels are those of the original (un-randomized) points.  At most
    ``budget`` draws may be taken, which models using only the ``budget``
    samples that actually reached the leaf.
    """

    def __init__(self, base: SampleOracle, path: Restriction, budget: int):
        self.base = base
        self.path = path
        self.dim = base.dim
        self.budget = int(budget)
        self.used = 0
        self.enumerable = getattr(base, "enumerable", False) and hasattr(base, "hypercube")
        self._table = None

    def _take(self, n: int) -> None:
        if self.used + n > self.budget:
            raise BudgetError(
                f"leaf {self.path} has {self.budget} samples; {self.used + n} requested",
                restriction=self.path,
            )
        self.used += n

    def table(self) -> FiniteDistribution:
        if self._table is None:
            cube = self.base.hypercube()
            if cube.labels is None:
                raise DataError("lifting needs a labelled distribution")
            X = cube.points
            source = self.path.apply(X)
            idx = codes(source)
            mass = cube.mass(self.path.matches(X))
            if mass <= 0:
                raise DataError(f"leaf {self.path} has zero mass")
            probs = cube.probs[idx] / mass * 2.0 ** -len(self.path)
            self._table = FiniteDistribution(X, probs, cube.labels[idx])
        return self._table

    def draw(self, n, rng):
        self._take(n)
        if self.enumerable:
            return self.table().draw(n, rng)
        s = self.base.draw_conditional(self.path, n, rng)
        X = s.points.copy()
        for i, _ in self.path:
            X[:, i] = rng.integers(0, 2, size=len(X), dtype=np.uint8)
        return Sample(X, s.counts, s.labels)

    def draw_counts(self, n, rng):
        if not self.enumerable:
            return super().draw_counts(n, rng)
        self._take(n)
        return self.table().draw_counts(n, rng)


class LiftedHypothesis(Hypothesis):
    """Routes ``x`` to its leaf and applies that leaf's hypothesis."""

    def __init__(self, tree: DecisionTreeDistribution, leaf_hypotheses: list[Hypothesis]):
        if len(leaf_hypotheses) != len(tree.leaves()):
            raise ParameterError("need exactly one hypothesis per leaf")
        self.tree = tree
        self.leaf_hypotheses = list(leaf_hypotheses)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
        route = self.tree.route(X)
        out = np.zeros(len(X), dtype=np.uint8)
        for idx, h in enumerate(self.leaf_hypotheses):
            rows = route == idx
            if np.any(rows):
                out[rows] = h.predict(X[rows])
        return out

    def serialize(self) -> str:
        return "|".join([self.tree.serialize()] + [h.serialize() for h in self.leaf_hypotheses])


def lift_sample_sizes(tree, learner, d, alpha, beta, rho) -> dict:
    """Sample sizes used by :func:`r_lift` (leaf masses, routed sample, per-leaf need)."""
    ell = tree.depth
    width = 2**ell
    n_leaves = len(tree.leaves())
    m1 = finite_distr_sample_size(n_leaves, alpha / (12 * width), beta / 2, rho / 3)
    per_leaf = boost_sample_size(learner, d, alpha / 6, beta / (2 * width), rho / (3 * width), 1 / 6)
    q = alpha / (6 * width)
    lam = 1 + math.log(2 * width / beta)
    m2 = math.ceil(lam * per_leaf / q)
    return {"leaf_masses": m1, "routed": m2, "per_leaf": per_leaf}


def r_lift(
    tree: DecisionTreeDistribution,
    learner: UniformLearnerSpec,
    source: SampleOracle,
    alpha: float,
    beta: float,
    rho: float,
    stream: SeedStream,
    rng: np.random.Generator,
) -> LiftedHypothesis:
    """Lift a uniform-marginal learner to ``source`` along ``tree``.

    Leaf masses are estimated replicably (``rho/3``); each leaf whose
    estimated mass clears ``alpha/(4*2^ell)`` gets a boosted run of the
    learner on its re-randomized samples (``rho/(3*2^ell)`` each), and the
    rest get a shared-randomness random function.
    """
    if not learner.restriction_closed:
        raise ParameterError(f"{learner.name} does not declare a restriction-closed concept class")
    if not (0 < alpha < 1 and 0 < beta < 1 and 0 < rho < 1):
        raise ParameterError("alpha, beta, rho must lie in (0, 1)")
    d = source.dim
    leaves = tree.leaves()
    width = 2**tree.depth
    sizes = lift_sample_sizes(tree, learner, d, alpha, beta, rho)

    first = source.draw_counts(sizes["leaf_masses"], rng).nonzero()
    leaf_counts = _int_leaf_counts(tree, first, len(leaves))
    masses = r_finite_distr_est(
        None, len(leaves), alpha / (12 * width), beta / 2, rho / 3,
        stream.derive("leaf-masses"), counts=leaf_counts,
    )

    routed = source.draw_counts(sizes["routed"], rng).nonzero()
    reach = _int_leaf_counts(tree, routed, len(leaves))
    gate = alpha / (4 * width)
    hypotheses = []
    for idx, (path, _) in enumerate(leaves):
        if masses[idx] >= gate:
            if reach[idx] < sizes["per_leaf"]:
                raise BudgetError(
                    f"leaf {path} received {reach[idx]} samples, needs {sizes['per_leaf']}",
                    restriction=path,
                )
            leaf_source = LeafSource(source, path, reach[idx])
            h = r_boost(
                learner, leaf_source, alpha / 6, beta / (2 * width), rho / (3 * width),
                stream.derive(f"leaf/{path}"), rng, weak_beta=1 / 6,
            )
        else:
            h = KeyedGuessHypothesis(stream.derive(f"guess/{path}"))
        hypotheses.append(h)
    return LiftedHypothesis(tree, hypotheses)


def _int_leaf_counts(tree, sample: Sample, n_leaves: int) -> list[int]:
    route = tree.route(sample.points)
    out = [0] * n_leaves
    for r, c in zip(route, sample.counts):
        out[int(r)] += int(c)
    return out


def lift_end_to_end(
    source: SampleOracle,
    learner: UniformLearnerSpec,
    ell: int,
    alpha: float,
    beta: float,
    rho: float,
    stream: SeedStream,
    rng: np.random.Generator,
    *,
    plan: BuildDtPlan | None = None,
) -> LiftedHypothesis:
    """Learn the tree at TV accuracy ``alpha/(18m)`` with half the budgets, then lift.

    ``m`` is the learner's per-run sample size inside the lifting step; the
    learner is then robust to a ``3m`` multiple of the TV error.
    """
    d = source.dim
    width = 2**ell
    rho_leaf = (rho / 2) / (3 * width)
    beta_leaf = (beta / 2) / (2 * width)
    n = boost_runs(beta_leaf)
    m = learner.sample_size(alpha / 6, rho_leaf / (2 * n), 1 / 6, d)
    tree = r_build_dt(source, ell, alpha / (18 * m), beta / 2, rho / 2, stream.derive("tree"), rng, plan=plan)
    return r_lift(tree, learner, source, alpha, beta / 2, rho / 2, stream.derive("lift"), rng)
