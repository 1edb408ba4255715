"""From a pure differentially private learner to a replicable weak learner.

The private learner here is the exponential mechanism over a finite class.
Running it on a fixed dummy dataset with many shared random strings yields a
candidate class that is identical in every execution; a replicable agnostic
learner over that candidate class then picks a hypothesis with error at
most 3/8.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from itertools import combinations_with_replacement, product
from typing import Callable, Sequence

import numpy as np

from .errors import DataError, ParameterError, RepresentationBlowup
from .hypercube import codes
from .hypotheses import ConstantHypothesis, Hypothesis
from .rstat import mean_sample_size, r_estimate, raw_accuracy
from .sampling import Sample, SampleOracle
from .seedstream import SeedStream

__all__ = [
    "FiniteClass",
    "PointFunction",
    "agnostic_sample_size",
    "candidate_count",
    "default_m0",
    "dp_ratio_table",
    "dp_to_replicable_weak",
    "dummy_dataset",
    "exp_mech_learner",
    "exp_mech_probabilities",
    "point_function_class",
    "r_finite_class_agnostic",
    "verify_pure_dp",
]


class FiniteClass:
    """An indexed, nonempty list of hypotheses."""

    def __init__(self, hypotheses: Sequence[Hypothesis]):
        self.hypotheses = list(hypotheses)
        if not self.hypotheses:
            raise ParameterError("a finite class needs at least one hypothesis")

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __getitem__(self, i: int) -> Hypothesis:
        return self.hypotheses[i]

    def __iter__(self):
        return iter(self.hypotheses)

    def mistakes(self, sample: Sample) -> np.ndarray:
        """Weighted mistake count of every hypothesis on ``sample`` (exact ints)."""
        if sample.labels is None:
            raise DataError("mistake counts need labelled samples")
        out = np.zeros(len(self), dtype=object)
        counts = [int(c) for c in sample.counts]
        for j, h in enumerate(self.hypotheses):
            wrong = h.predict(sample.points) != sample.labels
            out[j] = sum(c for c, w in zip(counts, wrong) if w)
        return out


class PointFunction(Hypothesis):
    """1 exactly at the point with code ``a`` (coordinate ``i`` is bit ``i`` of ``a``)."""

    def __init__(self, a: int, d: int):
        self.a = int(a)
        self.d = int(d)

    def predict(self, X) -> np.ndarray:
        return (codes(X) == self.a).astype(np.uint8)

    def serialize(self) -> str:
        return f"POINT;d={self.d};a={self.a}"


def point_function_class(d: int) -> FiniteClass:
    """The all-zero function followed by the ``2^d`` point functions."""
    return FiniteClass([ConstantHypothesis(0)] + [PointFunction(a, d) for a in range(1 << d)])


# -- exponential mechanism --------------------------------------------------------


def exp_mech_probabilities(cls: FiniteClass, sample: Sample, epsilon: float) -> np.ndarray:
    """Output distribution: ``h`` with probability proportional to ``exp(-epsilon * mistakes(h) / 2)``."""
    if epsilon < 0:
        raise ParameterError("epsilon must be nonnegative")
    mistakes = np.array([float(v) for v in cls.mistakes(sample)])
    logw = -epsilon * (mistakes - mistakes.min()) / 2.0
    w = np.exp(logw)
    return w / w.sum()


def exp_mech_learner(cls: FiniteClass, sample: Sample, epsilon: float, stream: SeedStream) -> Hypothesis:
    """Pure ``epsilon``-DP learner; its randomness is one uniform from ``stream``."""
    probs = exp_mech_probabilities(cls, sample, epsilon)
    u = stream.uniform_unit()
    j = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    return cls[min(j, len(cls) - 1)]


def _patterns(cls: FiniteClass, domain) -> list[tuple[int, ...]]:
    """Distinct mistake patterns of labelled examples over ``domain``."""
    X = np.asarray(domain, dtype=np.uint8)
    preds = np.stack([h.predict(X) for h in cls])
    seen = set()
    for y in (0, 1):
        for col in range(X.shape[0]):
            seen.add(tuple(int(p != y) for p in preds[:, col]))
    return sorted(seen)


def dp_ratio_table(cls: FiniteClass, domain, m: int, epsilon: float, digits: int = 60) -> dict:
    """Largest output-probability ratio over all neighbouring datasets of size ``m``.

    Datasets are enumerated up to their mistake patterns, which determine the
    mechanism's output law.  Probabilities are evaluated in decimal arithmetic
    with ``digits`` significant digits.  ``certified`` is an exact integer
    argument: each term of the ratio's numerator polynomial in
    ``t = exp(-epsilon/2)`` dominates a matching denominator term times
    ``t^2``, so the ratio is at most ``exp(epsilon)`` for every ``epsilon``.
    """
    patterns = _patterns(cls, domain)
    k = len(cls)
    certified = True
    worst = Decimal(0)
    with localcontext() as ctx:
        ctx.prec = digits
        t = (Decimal(-epsilon) / 2).exp()
        bound = Decimal(epsilon).exp()
        for multiset in combinations_with_replacement(range(len(patterns)), m):
            a = [sum(patterns[p][h] for p in multiset) for h in range(k)]
            for pos, new in product(range(m), range(len(patterns))):
                old = multiset[pos]
                if new == old:
                    continue
                b = [a[h] - patterns[old][h] + patterns[new][h] for h in range(k)]
                za = sum(t ** e for e in a)
                zb = sum(t ** e for e in b)
                for h in range(k):
                    ratio = (t ** a[h] / za) / (t ** b[h] / zb)
                    worst = max(worst, ratio)
                    for j in range(k):
                        if a[h] + b[j] > 2 + b[h] + a[j]:
                            certified = False
        return {
            "max_ratio": worst,
            "bound": bound,
            "within": worst <= bound,
            "certified": certified,
            "patterns": len(patterns),
        }


def verify_pure_dp(cls: FiniteClass, domain, m: int, epsilon: float) -> bool:
    """True if every neighbouring-dataset ratio is at most ``exp(epsilon)``."""
    table = dp_ratio_table(cls, domain, m, epsilon)
    return bool(table["within"] and table["certified"])


# -- replicable agnostic learner for finite classes -------------------------------


def agnostic_sample_size(size: int, alpha: float, beta: float, rho: float) -> int:
    return mean_sample_size(raw_accuracy(alpha / 4, rho / size), beta / size)


def r_finite_class_agnostic(
    cls: FiniteClass,
    source: SampleOracle,
    alpha: float,
    beta: float,
    rho: float,
    stream: SeedStream,
    rng: np.random.Generator,
    *,
    sample: Sample | None = None,
) -> Hypothesis:
    """Estimate every error replicably and return the first minimizer.

    Each error is estimated to accuracy ``alpha/4`` with replicability
    ``rho/|C|`` and confidence ``beta/|C|``, on stream ``h/<index>``.
    """
    if not (0 < alpha < 1 and 0 < beta < 1 and 0 < rho < 1):
        raise ParameterError("alpha, beta, rho must lie in (0, 1)")
    k = len(cls)
    need = agnostic_sample_size(k, alpha, beta, rho)
    if sample is None:
        sample = source.draw_counts(need, rng)
    elif sample.n < need:
        raise ParameterError(f"finite-class learner needs {need} samples, got {sample.n}")
    sample = sample.nonzero()
    if sample.labels is None:
        raise DataError("agnostic learning needs labelled samples")
    errors = []
    for j, h in enumerate(cls):
        mistakes = (h.predict(sample.points) != sample.labels).astype(np.float64)
        errors.append(
            r_estimate(
                mistakes, alpha / 4, rho / k, beta / k, stream.derive(f"h/{j}"),
                counts=sample.counts, label="agnostic/error",
            )
        )
    return cls[int(np.argmin(errors))]


# -- DP to replicable --------------------------------------------------------------


def default_m0(size: int, epsilon: float = 0.1, alpha: float = 0.25) -> int:
    """Exponential-mechanism utility bound ``(2/(epsilon*alpha)) (ln|C| + ln 4)``."""
    return math.ceil(2.0 / (epsilon * alpha) * (math.log(size) + math.log(4)))


def candidate_count(m0: int, beta: float, epsilon: float = 0.1) -> int:
    return math.ceil(2 * math.exp(epsilon * m0) * math.log(3 / beta))


def dummy_dataset(m0: int, d: int) -> Sample:
    """``m0`` all-zero points labelled 0."""
    return Sample(np.zeros((m0, d), dtype=np.uint8), np.ones(m0, dtype=np.int64), np.zeros(m0, dtype=np.uint8))


def dp_to_replicable_weak(
    dp_learner: Callable,
    cls: FiniteClass,
    source: SampleOracle,
    rho: float,
    beta: float,
    stream: SeedStream,
    rng: np.random.Generator,
    *,
    m0: int | None = None,
    epsilon: float = 0.1,
    cap: int = 100_000,
) -> Hypothesis:
    """Replicable learner with error at most 3/8 with probability ``1 - beta``.

    ``dp_learner(cls, sample, epsilon, stream)`` is run on the dummy dataset
    once per shared string ``candidate/<i>``; the distinct outputs form the
    candidate class for :func:`r_finite_class_agnostic` at accuracy 1/8.
    """
    if not 0 < beta < 1:
        raise ParameterError("beta must lie in (0, 1)")
    d = source.dim
    if m0 is None:
        m0 = default_m0(len(cls), epsilon)
    n = candidate_count(m0, beta, epsilon)
    if n > cap:
        raise RepresentationBlowup(f"{n} candidate strings needed (m0={m0}); cap is {cap}")
    dummy = dummy_dataset(m0, d)
    seen: dict[str, Hypothesis] = {}
    for i in range(n):
        h = dp_learner(cls, dummy, epsilon, stream.derive(f"candidate/{i}"))
        seen.setdefault(h.serialize(), h)
    candidates = FiniteClass(list(seen.values()))
    return r_finite_class_agnostic(candidates, source, 1 / 8, beta / 3, rho, stream.derive("agnostic"), rng)
