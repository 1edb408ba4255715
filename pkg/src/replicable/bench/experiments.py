"""Named experiments runnable by the harness.

An experiment is built once from an :class:`ExperimentConfig`; the harness
then calls ``run(stream, rng)`` twice per trial pair and ``error(output)`` on
each output.  Problem instances (targets, trees, secrets) are drawn once from
the data channel under the label ``instance``, so every trial sees the same
instance.
"""

from __future__ import annotations

import numpy as np

from ..dp2rep import PointFunction, dp_to_replicable_weak, exp_mech_learner, point_function_class
from ..dtdist import BuildDtPlan, random_monotone_tree, random_tree, r_build_dt, tv_exact
from ..errors import ParameterError
from ..hypercube import all_points
from ..lift import lift_end_to_end
from ..ows import index_width, make_ows_concept, ows_distribution, ows_sample_size, r_learner_ows
from ..parity import (
    AffineParityHypothesis,
    ProductDistribution,
    affine_parity_learner,
    naive_parity_learner,
    r_aff_parity,
    skewed_parity_distribution,
)
from ..rquantile import quantile_sample_size, r_quantile_est
from ..rstat import mean_sample_size, r_mean
from ..sampling import FiniteDistribution, multinomial
from ..seedstream import SeedStream

__all__ = ["EXPERIMENTS", "build_experiment"]


def _section(config, name: str, defaults: dict) -> dict:
    given = getattr(config, name)
    for key in given:
        if key not in defaults:
            raise ParameterError(f"config.{name}.{key}: unknown setting for {config.experiment}")
    return {**defaults, **given}


def _instance_rng(config) -> np.random.Generator:
    return SeedStream.data_root(config.seed).derive("instance").generator()


def _parity_target(config, d: int, rng) -> AffineParityHypothesis:
    target = _section(config, "target", {"w": None, "b": None})
    w = target["w"] if target["w"] is not None else int(rng.integers(0, 1 << d))
    b = target["b"] if target["b"] is not None else int(rng.integers(0, 2))
    return AffineParityHypothesis(w, b, d)


class RMean:
    """Bernoulli mean query answered by :func:`r_mean` (``alpha`` is the raw accuracy)."""

    defaults = dict(alpha=0.02, rho=0.2, beta=0.01)

    def __init__(self, config):
        self.p = float(_section(config, "distribution", {"p": 0.5})["p"])
        _section(config, "target", {})
        _section(config, "learner", {})
        self.alpha, self.rho, self.beta = config.alpha, config.rho, config.beta
        self.n = config.n or mean_sample_size(self.alpha, self.beta)
        self.threshold = 4 * self.alpha / self.rho

    def run(self, stream, rng):
        k = int(rng.binomial(self.n, self.p))
        return r_mean([0.0, 1.0], self.alpha, self.rho, self.beta, stream, counts=[self.n - k, k])

    def error(self, out) -> float:
        return abs(out - self.p)


class Quantile:
    """Replicable quantile over ``[R]``; error 0 when the CDF postcondition holds, else 1."""

    defaults = dict(alpha=0.1, rho=0.3, beta=0.05)

    def __init__(self, config):
        dist = _section(config, "distribution", {"R": 64, "weights": None})
        self.q = float(_section(config, "target", {"q": 0.5})["q"])
        _section(config, "learner", {})
        self.R = int(dist["R"])
        w = np.ones(self.R) if dist["weights"] is None else np.asarray(dist["weights"], dtype=np.float64)
        if len(w) != self.R:
            raise ParameterError(f"config.distribution.weights: need {self.R} entries")
        self.probs = w / w.sum()
        self.cdf = np.concatenate([[0.0], np.cumsum(self.probs)])
        self.alpha, self.rho, self.beta = config.alpha, config.rho, config.beta
        self.n = config.n or quantile_sample_size(self.R, self.alpha, self.rho, self.beta)
        self.threshold = 0.0

    def run(self, stream, rng):
        counts = multinomial(self.n, self.probs, rng)
        return r_quantile_est(None, self.R, self.q, self.alpha, self.rho, self.beta, stream, counts=counts)

    def error(self, x) -> float:
        ok = self.cdf[x] >= self.q - self.alpha - 1e-12 and self.cdf[x - 1] < self.q + self.alpha
        return 0.0 if ok else 1.0


class AffParity:
    """:func:`r_aff_parity` under uniform marginals; success means exact recovery."""

    defaults = dict(alpha=0.1, rho=0.02, beta=0.01)

    def __init__(self, config):
        d = int(_section(config, "distribution", {"d": 10})["d"])
        _section(config, "learner", {})
        self.target = _parity_target(config, d, _instance_rng(config))
        self.D = ProductDistribution(np.full(d, 0.5), self.target)
        self.D.hypercube()
        self.rho, self.beta = config.rho, config.beta
        self.threshold = 0.0

    def run(self, stream, rng):
        return r_aff_parity(self.D, self.beta, self.rho, stream, rng)

    def error(self, h) -> float:
        return self.D.error(h)


class NaiveParity:
    """Gaussian elimination on the biased-last-coordinate distribution.

    Free variables are filled with private coins by default (``learner.coins``
    set to ``"shared"`` uses the shared stream instead).
    """

    defaults = dict(alpha=0.1, rho=0.05, beta=0.05)

    def __init__(self, config):
        dist = _section(config, "distribution", {"d": 10, "n": 200})
        coins = _section(config, "learner", {"coins": "private"})["coins"]
        if coins not in ("private", "shared"):
            raise ParameterError("config.learner.coins: must be 'private' or 'shared'")
        self.shared_coins = coins == "shared"
        d = int(dist["d"])
        self.n = config.n or int(dist["n"])
        self.target = _parity_target(config, d, _instance_rng(config))
        self.D = skewed_parity_distribution(d, int(dist["n"]), self.target)
        self.D.hypercube()
        self.threshold = config.alpha

    def run(self, stream, rng):
        sample = self.D.draw(self.n, rng)
        return naive_parity_learner(sample, stream if self.shared_coins else rng)

    def error(self, h) -> float:
        return self.D.error(h)


class ParityLift:
    """Tree learning followed by lifting :func:`r_aff_parity`, on the same instance as ``ge-nonreplicable``."""

    defaults = dict(alpha=0.25, rho=0.5, beta=0.1)

    def __init__(self, config):
        dist = _section(config, "distribution", {"d": 8, "n": 200})
        learner = _section(config, "learner", {"ell": 1})
        d = int(dist["d"])
        self.ell = int(learner["ell"])
        self.target = _parity_target(config, d, _instance_rng(config))
        self.D = skewed_parity_distribution(d, int(dist["n"]), self.target)
        self.D.hypercube()
        self.alpha, self.rho, self.beta = config.alpha, config.rho, config.beta
        self.threshold = config.alpha

    def run(self, stream, rng):
        return lift_end_to_end(self.D, affine_parity_learner(), self.ell, self.alpha, self.beta, self.rho, stream, rng)

    def error(self, h) -> float:
        return self.D.error(h)


class OwsLearn:
    """One-way-sequence learner on a distribution over the chain points."""

    defaults = dict(alpha=0.2, rho=0.3, beta=0.05)

    def __init__(self, config):
        dist = _section(config, "distribution", {"d": 36, "weights": None})
        _section(config, "target", {})
        _section(config, "learner", {})
        rng = _instance_rng(config)
        d = int(dist["d"])
        k = index_width(d)
        self.concept = make_ows_concept(rng.integers(0, 2, size=k).astype(np.uint8), d)
        self.D = ows_distribution(self.concept, dist["weights"])
        self.alpha, self.rho, self.beta = config.alpha, config.rho, config.beta
        self.n = config.n or ows_sample_size(self.alpha, self.rho, self.beta, k)
        self.threshold = config.alpha

    def run(self, stream, rng):
        sample = self.D.draw_counts(self.n, rng)
        return r_learner_ows(sample, self.alpha, self.rho, self.beta, stream)

    def error(self, h) -> float:
        return self.D.error(h)


class BuildDt:
    """Decision-tree distribution learning; error is exact total variation."""

    defaults = dict(alpha=0.2, rho=0.5, beta=0.1)

    def __init__(self, config):
        dist = _section(config, "distribution", {"d": 6, "depth": 2, "monotone": True})
        learner = _section(config, "learner", {"ell": None, "estimator": "auto", "tau": None, "influence_accuracy": None, "max_calls": None})
        _section(config, "target", {})
        rng = _instance_rng(config)
        d, depth = int(dist["d"]), int(dist["depth"])
        self.D = random_monotone_tree(d, rng, depth) if dist["monotone"] else random_tree(d, depth, rng)
        self.D.hypercube()
        self.ell = depth if learner["ell"] is None else int(learner["ell"])
        self.plan = BuildDtPlan(
            tau=learner["tau"], influence_accuracy=learner["influence_accuracy"],
            max_calls=learner["max_calls"], estimator=learner["estimator"],
        )
        self.alpha, self.rho, self.beta = config.alpha, config.rho, config.beta
        self.threshold = config.alpha

    def run(self, stream, rng):
        return r_build_dt(self.D, self.ell, self.alpha, self.beta, self.rho, stream, rng, plan=self.plan)

    def error(self, tree) -> float:
        return tv_exact(self.D, tree)


class Dp2RepWeak:
    """The DP-to-replicable weak learner over point functions; success is error <= 3/8."""

    defaults = dict(alpha=0.125, rho=0.2, beta=0.05)

    def __init__(self, config):
        d = int(_section(config, "distribution", {"d": 4})["d"])
        point = _section(config, "target", {"point": None})["point"]
        learner = _section(config, "learner", {"m0": 10, "epsilon": 0.1, "cap": 100_000})
        if point is None:
            point = int(_instance_rng(config).integers(0, 1 << d))
        self.cls = point_function_class(d)
        self.target = PointFunction(point, d)
        X = all_points(d)
        self.D = FiniteDistribution(X, np.full(len(X), 1.0 / len(X)), self.target.predict(X))
        self.m0, self.epsilon, self.cap = learner["m0"], float(learner["epsilon"]), int(learner["cap"])
        self.rho, self.beta = config.rho, config.beta
        self.threshold = 3 / 8

    def run(self, stream, rng):
        return dp_to_replicable_weak(
            exp_mech_learner, self.cls, self.D, self.rho, self.beta, stream, rng,
            m0=self.m0, epsilon=self.epsilon, cap=self.cap,
        )

    def error(self, h) -> float:
        return self.D.error(h)


EXPERIMENTS = {
    "r-mean": RMean,
    "quantile": Quantile,
    "aff-parity": AffParity,
    "ge-nonreplicable": NaiveParity,
    "parity-lift": ParityLift,
    "ows-learn": OwsLearn,
    "build-dt": BuildDt,
    "dp2rep-weak": Dp2RepWeak,
}


def build_experiment(config):
    try:
        cls = EXPERIMENTS[config.experiment]
    except KeyError:
        raise ParameterError(
            f"config.experiment: unknown experiment {config.experiment!r}; choose from {', '.join(EXPERIMENTS)}"
        ) from None
    return cls(config)
