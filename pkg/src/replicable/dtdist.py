"""Decision-tree distributions over {0,1}^d and their replicable learner.

A distribution ``D`` is a decision-tree distribution when its scaled pmf
``f_D(x) = 2^d D(x)`` is computed by a decision tree.  Each leaf ``t`` stores
``p_t = 2^{|t|} Pr_D[x in t]``, and ``D`` is uniform inside every leaf.

Influences use the half-scaled convention
``I_i(f) = 1/2 E_{x~U} |f(x) - f(x with bit i flipped)|``.  Under it a monotone
``D`` has ``I_i(f_D) = 2 E_D[x_i] - 1`` and the pair-subcube statistic
``E_{x~D} |2p(x) - 1|`` equals ``I_i(f_D)`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, DataError, DomainError, ParameterError
from .hypercube import MAX_ENUM_DIM, Restriction, all_points, codes, flip
from .rstat import r_estimate
from .sampling import (
    ConditionalSampleOracle,
    HypercubeDistribution,
    Sample,
    SampleOracle,
    multinomial,
)
from .seedstream import SeedStream

__all__ = [
    "BuildDtPlan",
    "build_dt_sample_size",
    "DecisionTreeDistribution",
    "Leaf",
    "Node",
    "dt_pmf",
    "dt_sample",
    "influence_oracle",
    "is_monotone",
    "monotone_influence_sample_size",
    "r_build_dt",
    "r_infl_est_monotone",
    "r_infl_est_subcube",
    "random_monotone_tree",
    "random_tree",
    "total_influence",
    "tv_exact",
]

NORMALIZATION_TOL = 1e-9


# -- tree representation ---------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    value: float

    def serialize(self) -> str:
        return f"[p={float(self.value)!r}]"


@dataclass(frozen=True)
class Node:
    coord: int
    left: "Leaf | Node"
    right: "Leaf | Node"

    def serialize(self) -> str:
        return f"(x{self.coord} {self.left.serialize()} {self.right.serialize()})"


def _leaves(node, path: Restriction):
    if isinstance(node, Leaf):
        yield path, node
    else:
        yield from _leaves(node.left, path.extend(node.coord, 0))
        yield from _leaves(node.right, path.extend(node.coord, 1))


def _depth(node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(_depth(node.left), _depth(node.right))


class DecisionTreeDistribution(ConditionalSampleOracle):
    """A distribution on {0,1}^d whose scaled pmf is a decision tree.

    Leaves are visited left (bit 0) before right (bit 1); this depth-first
    order is the canonical leaf order.  ``concept``, if given, labels draws.
    """

    def __init__(self, d: int, root, *, concept=None, check: bool = True):
        self.dim = int(d)
        self.root = root
        self.concept = concept
        self._cube = None
        self._monotone = None
        if check:
            self.validate()

    @classmethod
    def uniform(cls, d: int) -> "DecisionTreeDistribution":
        return cls(d, Leaf(1.0))

    @classmethod
    def parse(cls, d: int, text: str) -> "DecisionTreeDistribution":
        """Inverse of :meth:`serialize`."""
        tokens = text.replace("(", " ( ").replace(")", " ) ").split()
        pos = 0

        def node():
            nonlocal pos
            tok = tokens[pos]
            pos += 1
            if tok.startswith("[p="):
                return Leaf(float(tok[3:-1]))
            if tok != "(":
                raise DataError(f"unexpected token {tok!r}")
            coord = int(tokens[pos][1:])
            pos += 1
            left, right = node(), node()
            if tokens[pos] != ")":
                raise DataError("unbalanced tree text")
            pos += 1
            return Node(coord, left, right)

        return cls(d, node())

    @property
    def d(self) -> int:
        return self.dim

    @property
    def depth(self) -> int:
        return _depth(self.root)

    @property
    def enumerable(self) -> bool:
        return self.dim <= MAX_ENUM_DIM

    @property
    def monotone(self) -> bool:
        if self._monotone is None:
            self._monotone = self.enumerable and is_monotone(self)
        return self._monotone

    def labeled_by(self, concept) -> "DecisionTreeDistribution":
        return DecisionTreeDistribution(self.dim, self.root, concept=concept, check=False)

    def leaves(self) -> list[tuple[Restriction, float]]:
        return [(path, leaf.value) for path, leaf in _leaves(self.root, Restriction())]

    def leaf_masses(self) -> np.ndarray:
        return np.array([2.0 ** -len(path) * v for path, v in self.leaves()])

    def validate(self) -> None:
        for path, value in self.leaves():
            if not (np.isfinite(value) and value >= 0):
                raise DataError(f"leaf {path} has invalid value {value}")
            path.check(self.dim)
        total = math.fsum(self.leaf_masses())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DataError(f"leaf masses sum to {total}, not 1")

    def serialize(self) -> str:
        return self.root.serialize()

    def structure(self) -> str:
        """Serialization with the leaf values dropped."""

        def walk(node):
            if isinstance(node, Leaf):
                return "[]"
            return f"(x{node.coord} {walk(node.left)} {walk(node.right)})"

        return walk(self.root)

    def __repr__(self) -> str:
        return f"DecisionTreeDistribution(d={self.dim}, {self.serialize()})"

    # -- evaluation -------------------------------------------------------------

    def route(self, X) -> np.ndarray:
        """Canonical leaf index of each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
        out = np.empty(len(X), dtype=np.int64)
        for idx, (path, _) in enumerate(self.leaves()):
            out[path.matches(X)] = idx
        return out

    def scaled(self, X) -> np.ndarray:
        values = np.array([v for _, v in self.leaves()])
        return values[self.route(X)]

    def pmf(self, X) -> np.ndarray:
        return self.scaled(X) * 2.0 ** -self.dim

    def hypercube(self) -> HypercubeDistribution:
        if self._cube is None:
            X = all_points(self.dim)
            labels = None if self.concept is None else self.concept.predict(X)
            self._cube = HypercubeDistribution(self.pmf(X), labels)
        return self._cube

    # -- sampling ---------------------------------------------------------------

    def _labels(self, X):
        return None if self.concept is None else self.concept.predict(X)

    def draw(self, n: int, rng: np.random.Generator) -> Sample:
        X = dt_sample(self, n, rng)
        return Sample(X, np.ones(len(X), dtype=np.int64), self._labels(X))

    def draw_counts(self, n, rng):
        if self.enumerable:
            return self.hypercube().draw_counts(n, rng)
        return super().draw_counts(n, rng)

    def draw_conditional(self, restriction, n, rng):
        return self.hypercube().draw_conditional(restriction, n, rng)

    def pair_fractions(self, X, i, k, rng):
        return self.hypercube().pair_fractions(X, i, k, rng)

    def error(self, hypothesis) -> float:
        return self.hypercube().error(hypothesis)


def dt_sample(D: DecisionTreeDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` exact draws: a leaf by its mass, then uniform free coordinates."""
    D.validate()
    leaves = D.leaves()
    masses = D.leaf_masses()
    which = rng.choice(len(leaves), size=int(n), p=masses / masses.sum())
    X = rng.integers(0, 2, size=(int(n), D.dim), dtype=np.uint8)
    for idx, (path, _) in enumerate(leaves):
        rows = which == idx
        for i, b in path:
            X[rows, i] = b
    return X


def dt_pmf(D: DecisionTreeDistribution, x) -> float:
    return float(D.pmf(np.atleast_2d(x))[0])


def _table(D) -> np.ndarray:
    """Full pmf table of a distribution-like object (tree, cube, or array)."""
    if isinstance(D, np.ndarray):
        return D.astype(np.float64)
    if isinstance(D, (DecisionTreeDistribution,)):
        return D.hypercube().probs
    if isinstance(D, HypercubeDistribution):
        return D.probs
    if hasattr(D, "hypercube"):
        return D.hypercube().probs
    raise DataError(f"cannot enumerate {type(D).__name__}")


def tv_exact(D1, D2) -> float:
    """Total variation distance by enumerating {0,1}^d."""
    p, q = _table(D1), _table(D2)
    if len(p) != len(q):
        raise DataError("dimension mismatch")
    return 0.5 * math.fsum(np.abs(p - q))


# -- influences -----------------------------------------------------------------


def influence_oracle(D, restriction: Restriction, i: int) -> float:
    """Exact half-scaled influence of coordinate ``i`` on ``(f_D)_restriction``."""
    probs = _table(D)
    d = int(round(math.log2(len(probs))))
    restriction.check(d)
    if restriction.fixes(i):
        raise DomainError(f"coordinate {i} is fixed by {restriction}")
    if not 0 <= i < d:
        raise DataError(f"coordinate {i} outside [0, {d})")
    X = restriction.apply(all_points(d))
    f = probs[codes(X)] * 2.0**d
    g = probs[codes(flip(X, i))] * 2.0**d
    return 0.5 * float(np.mean(np.abs(f - g)))


def total_influence(D, restriction: Restriction = Restriction()) -> float:
    d = int(round(math.log2(len(_table(D)))))
    return math.fsum(
        influence_oracle(D, restriction, i) for i in range(d) if not restriction.fixes(i)
    )


def monotone_influence_sample_size(depth: int, accuracy: float, rho: float, beta: float) -> int:
    """Samples for :func:`r_infl_est_monotone` at restriction size ``depth``."""
    width = 2.0 ** (depth + 1)
    raw = accuracy * rho / 4.0
    return math.ceil(width * width / (2 * raw * raw) * math.log(2 / beta))


def _restricted_query(sample: Sample, restriction: Restriction, i: int) -> np.ndarray:
    scale = 2.0 ** len(restriction)
    sign = 2.0 * sample.points[:, i].astype(np.float64) - 1.0
    return scale * restriction.matches(sample.points) * sign


def r_infl_est_monotone(
    sample: Sample,
    restriction: Restriction,
    i: int,
    alpha: float,
    beta: float,
    rho: float,
    stream: SeedStream,
) -> float:
    """Replicable influence of ``x_i`` on ``(f_D)_restriction`` for monotone ``D``.

    The estimate is the rounded mean of ``2^|pi| 1{x matches pi} (2 x_i - 1)``
    over plain samples; ``alpha`` is the output accuracy.
    """
    if restriction.fixes(i):
        raise DomainError(f"coordinate {i} is fixed by {restriction}")
    scale = 2.0 ** len(restriction)
    values = _restricted_query(sample, restriction, i)
    return r_estimate(
        values, alpha, rho, beta, stream,
        counts=sample.counts, bounds=(-scale, scale), label="influence",
    )


def _mass_estimate(sample, restriction, alpha, rho, beta, stream) -> float:
    scale = 2.0 ** len(restriction)
    values = scale * restriction.matches(sample.points).astype(np.float64)
    return r_estimate(
        values, alpha, rho, beta, stream,
        counts=sample.counts, bounds=(0.0, scale), label="leaf_mass",
    )


def _binomial_window(k: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Outcomes and pmf of Binomial(k, p), cut 12 standard deviations out."""
    if p <= 0.0 or p >= 1.0:
        j = np.array([0 if p <= 0.0 else k])
        return j, np.ones(1)
    sd = math.sqrt(k * p * (1 - p))
    lo = max(0, int(k * p - 12 * sd) - 10)
    hi = min(k, int(k * p + 12 * sd) + 10)
    j = np.arange(lo, hi + 1, dtype=np.float64)
    logp = (
        math.lgamma(k + 1) - np.array([math.lgamma(x + 1) + math.lgamma(k - x + 1) for x in j])
        + j * math.log(p) + (k - j) * math.log1p(-p)
    )
    w = np.exp(logp - logp.max())
    return j, w / w.sum()


def _pair_statistics(oracle, restriction, i, n_outer, k, rng):
    """Values ``|2p - 1|`` and their multiplicities over ``n_outer`` outer draws."""
    if isinstance(oracle, (HypercubeDistribution, DecisionTreeDistribution)) or (
        getattr(oracle, "enumerable", False) and hasattr(oracle, "hypercube")
    ):
        cube = oracle if isinstance(oracle, HypercubeDistribution) else oracle.hypercube()
        mask = restriction.matches(cube.points)
        probs = np.where(mask, cube.probs, 0.0)
        if probs.sum() <= 0:
            raise DataError(f"conditioning on a null subcube {restriction}")
        outer = multinomial(n_outer, probs / probs.sum(), rng)
        px = cube.probs
        py = cube.probs[codes(flip(cube.points, i))]
        values, counts = [], []
        for code in np.nonzero(outer)[0]:
            j, pmf = _binomial_window(k, px[code] / (px[code] + py[code]))
            values.append(np.abs(2.0 * j / k - 1.0))
            counts.append(multinomial(int(outer[code]), pmf, rng))
        return np.concatenate(values), np.concatenate(counts)
    s = oracle.draw_conditional(restriction, n_outer, rng)
    frac = oracle.pair_fractions(s.points, i, k, rng)
    return np.abs(2.0 * frac - 1.0), None


def r_infl_est_subcube(
    oracle: ConditionalSampleOracle,
    restriction: Restriction,
    i: int,
    alpha: float,
    beta: float,
    rho: float,
    stream: SeedStream,
    rng: np.random.Generator,
    *,
    sample: Sample | None = None,
) -> float:
    """Replicable influence of ``x_i`` on ``(f_D)_restriction`` via pair-subcube queries.

    The mean of ``|2p - 1|`` over ``x ~ D_restriction`` is the influence of the
    conditional scaled pmf; it is multiplied by an independent replicable
    estimate of ``p_restriction`` (from ``sample`` when given, else fresh draws).
    Accuracy splits as ``alpha/2`` for each factor; inside the first, half
    goes to the ``1/sqrt(k)`` bias of finite inner draws.
    """
    if restriction.fixes(i):
        raise DomainError(f"coordinate {i} is fixed by {restriction}")
    scale = 2.0 ** len(restriction)
    acc_v = alpha / (2.0 * scale)
    k = math.ceil(4.0 / acc_v**2)
    n_outer = math.ceil(1.0 / (2 * (acc_v / 2 * (rho / 2) / 4) ** 2) * math.log(2 / (beta / 2)))
    values, counts = _pair_statistics(oracle, restriction, i, n_outer, k, rng)
    v = r_estimate(values, acc_v / 2, rho / 2, beta / 2, stream.derive("pair"), counts=counts, label="influence")
    if len(restriction) == 0:
        # p of the empty restriction is exactly 1; its share of the budget is unused
        return v
    if sample is None:
        sample = oracle.draw_counts(monotone_influence_sample_size(len(restriction), alpha / 2, rho / 2, beta / 2), rng)
    p_hat = _mass_estimate(sample, restriction, alpha / 2, rho / 2, beta / 2, stream.derive("mass"))
    return p_hat * v


# -- replicable tree learning -------------------------------------------------------


@dataclass
class BuildDtPlan:
    """Budget split of :func:`r_build_dt`.  Fields left as None take theory defaults."""

    tau: float | None = None
    influence_accuracy: float | None = None
    max_calls: int | None = None
    call_cap: int = 1_000_000
    estimator: str = "auto"  # "monotone", "subcube" or "auto"

    def resolve(self, d: int, ell: int, alpha: float) -> "BuildDtPlan":
        tau = self.tau if self.tau is not None else (alpha / (8 * ell * ell) if ell > 0 else 1.0)
        acc = self.influence_accuracy
        if acc is None:
            acc = min(tau / 4, alpha / (2 * d))
        calls = self.max_calls
        if calls is None:
            distinct = sum(math.comb(d, j) * 2**j for j in range(ell + 1))
            calls = distinct if ell == 0 else min(math.ceil((4 * ell / tau) ** ell), distinct)
        if calls > self.call_cap:
            raise BudgetError(f"tree learner would need {calls} recursive calls (cap {self.call_cap})")
        return BuildDtPlan(tau, acc, calls, self.call_cap, self.estimator)


@dataclass
class _BuildState:
    d: int
    ell: int
    alpha: float
    plan: BuildDtPlan
    rho_i: float
    beta_i: float
    rho_leaf: float
    beta_leaf: float
    stream: SeedStream
    sample: Sample
    oracle: SampleOracle
    rng: np.random.Generator
    subcube: bool
    influences: dict = field(default_factory=dict)
    leaf_values: dict = field(default_factory=dict)
    calls: int = 0


def _influences(state: _BuildState, restriction: Restriction) -> dict:
    key = restriction.key
    hit = state.influences.get(key)
    if hit is not None:
        return hit
    state.calls += 1
    if state.calls > state.plan.max_calls:
        raise BudgetError(
            f"recursive call budget {state.plan.max_calls} exhausted at {restriction}",
            restriction=restriction,
        )
    out = {}
    base = state.stream.derive(f"infl/{restriction}")
    for i in range(state.d):
        if restriction.fixes(i):
            continue
        s = base.derive(f"x{i}")
        if state.subcube:
            est = r_infl_est_subcube(
                state.oracle, restriction, i, state.plan.influence_accuracy,
                state.beta_i, state.rho_i, s, state.rng, sample=state.sample,
            )
        else:
            est = r_infl_est_monotone(
                state.sample, restriction, i, state.plan.influence_accuracy,
                state.beta_i, state.rho_i, s,
            )
        out[i] = est
    state.influences[key] = out
    return out


def _leaf_value(state: _BuildState, restriction: Restriction) -> float:
    key = restriction.key
    if key not in state.leaf_values:
        state.leaf_values[key] = _mass_estimate(
            state.sample, restriction, state.alpha / 2, state.rho_leaf, state.beta_leaf,
            state.stream.derive(f"leaf/{restriction}"),
        )
    return state.leaf_values[key]


def _build(state: _BuildState, restriction: Restriction, remaining: int):
    """Returns ``(node, score)`` with score = sum over leaves of 2^-(relative depth) g(t)."""
    if state.ell == 0:
        return Leaf(_leaf_value(state, restriction)), 0.0
    infl = _influences(state, restriction)
    g = math.fsum(infl.values())
    threshold = 0.75 * state.plan.tau
    candidates = sorted(i for i, v in infl.items() if v >= threshold)
    if not candidates or remaining == 0:
        return Leaf(_leaf_value(state, restriction)), g
    best = None
    for i in candidates:
        left, s0 = _build(state, restriction.extend(i, 0), remaining - 1)
        right, s1 = _build(state, restriction.extend(i, 1), remaining - 1)
        score = 0.5 * (s0 + s1)
        if best is None or score < best[1]:
            best = (Node(i, left, right), score)
    return best


def _normalize(root):
    """Clip negative leaf estimates and rescale so the leaf masses sum to 1."""
    leaves = list(_leaves(root, Restriction()))
    values = {path.key: max(0.0, leaf.value) for path, leaf in leaves}
    total = math.fsum(2.0 ** -len(path) * values[path.key] for path, _ in leaves)

    def walk(node, path):
        if isinstance(node, Leaf):
            v = values[path.key]
            return Leaf(v / total if total > 0 else 1.0)
        return Node(node.coord, walk(node.left, path.extend(node.coord, 0)), walk(node.right, path.extend(node.coord, 1)))

    return walk(root, Restriction())


def build_dt_sample_size(d: int, ell: int, alpha: float, beta: float, rho: float, plan: BuildDtPlan | None = None, *, subcube: bool = False) -> int:
    """Size of the shared plain sample used by :func:`r_build_dt`."""
    plan = (plan or BuildDtPlan()).resolve(d, ell, alpha)
    R = plan.max_calls
    need = 0
    for depth in range(ell + 1):
        need = max(need, monotone_influence_sample_size(depth, alpha / 2, rho / (2 * R), beta / (2 * R)))
        if ell > 0:
            if subcube:
                need = max(need, monotone_influence_sample_size(depth, plan.influence_accuracy / 2, rho / (4 * d * R), beta / (4 * d * R)))
            else:
                need = max(need, monotone_influence_sample_size(depth, plan.influence_accuracy, rho / (2 * d * R), beta / (2 * d * R)))
    return need


def r_build_dt(
    source: SampleOracle,
    ell: int,
    alpha: float,
    beta: float,
    rho: float,
    stream: SeedStream,
    rng: np.random.Generator,
    *,
    plan: BuildDtPlan | None = None,
) -> DecisionTreeDistribution:
    """Replicably learn a depth-``ell`` decision-tree distribution.

    Monotone sources are handled with plain samples; with
    ``plan.estimator == "subcube"`` (or a conditional oracle under "auto"
    that is not declared monotone) the pair-subcube estimator is used.
    ``rng`` supplies the data randomness; ``stream`` the shared randomness.
    """
    if ell < 0:
        raise ParameterError("depth must be non-negative")
    if not (0 < alpha < 1 and 0 < rho < 1 and 0 < beta < 1):
        raise ParameterError("alpha, beta, rho must lie in (0, 1)")
    d = source.dim
    plan = (plan or BuildDtPlan()).resolve(d, ell, alpha)
    if plan.estimator == "auto":
        subcube = isinstance(source, ConditionalSampleOracle) and not getattr(source, "monotone", False)
    else:
        subcube = plan.estimator == "subcube"
    R = plan.max_calls
    n = build_dt_sample_size(d, ell, alpha, beta, rho, plan, subcube=subcube)
    sample = source.draw_counts(n, rng).nonzero()
    state = _BuildState(
        d=d, ell=ell, alpha=alpha, plan=plan,
        rho_i=rho / (2 * d * R), beta_i=beta / (2 * d * R),
        rho_leaf=rho / (2 * R), beta_leaf=beta / (2 * R),
        stream=stream, sample=sample, oracle=source, rng=rng, subcube=subcube,
    )
    root, _ = _build(state, Restriction(), ell)
    return DecisionTreeDistribution(d, _normalize(root))


# -- generators for experiments and tests ------------------------------------------


def _normalized_tree(d, root) -> DecisionTreeDistribution:
    return DecisionTreeDistribution(d, _normalize(root))


def random_tree(d: int, depth: int, rng: np.random.Generator) -> DecisionTreeDistribution:
    """A random complete tree of the given depth with positive leaf values."""

    def grow(path: Restriction, left: int):
        if left == 0:
            return Leaf(float(rng.uniform(0.2, 2.0)))
        free = [i for i in range(d) if not path.fixes(i)]
        i = int(rng.choice(free))
        return Node(i, grow(path.extend(i, 0), left - 1), grow(path.extend(i, 1), left - 1))

    return _normalized_tree(d, grow(Restriction(), min(depth, d)))


def random_monotone_tree(d: int, rng: np.random.Generator, depth: int = 2) -> DecisionTreeDistribution:
    """A random monotone tree distribution of depth at most 2.

    The root splits on ``a``; each side splits on its own coordinate.  Sorted
    leaf values placed as (0,0) <= (0,1) <= (1,0) <= (1,1) make every
    coordinate non-decreasing.
    """
    if depth == 0:
        return DecisionTreeDistribution.uniform(d)
    coords = rng.choice(d, size=min(3, d), replace=False)
    a = int(coords[0])
    v = np.sort(rng.uniform(0.1, 3.0, size=4))
    if depth == 1 or d < 2:
        root = Node(a, Leaf(float(v[0])), Leaf(float(v[3])))
    else:
        b = int(coords[1])
        c = int(coords[2]) if d >= 3 else b
        root = Node(a, Node(b, Leaf(float(v[0])), Leaf(float(v[1]))), Node(c, Leaf(float(v[2])), Leaf(float(v[3]))))
    return _normalized_tree(d, root)


def is_monotone(D) -> bool:
    probs = _table(D)
    d = int(round(math.log2(len(probs))))
    X = all_points(d)
    for i in range(d):
        lo = X[X[:, i] == 0]
        if np.any(probs[codes(flip(lo, i))] < probs[codes(lo)] - 1e-15):
            return False
    return True
