"""Monte Carlo replicability certification.

Each trial pair shares one fresh stream ``shared/trial/<t>`` and draws two
independent datasets from the data channel; the two outputs are compared by
canonical serialization.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from statistics import NormalDist

import numpy as np

from ..errors import DomainError, ParameterError, ReplicableError
from ..seedstream import SeedStream

__all__ = [
    "ExperimentConfig",
    "ReplicabilityReport",
    "TrialRecord",
    "estimate_error",
    "estimate_replicability",
    "serialize_output",
    "wilson_interval",
]


@dataclass
class ExperimentConfig:
    """One certification run.  ``distribution``, ``target`` and ``learner`` hold
    experiment-specific settings; unknown keys are rejected by the experiment."""

    experiment: str
    distribution: dict = field(default_factory=dict)
    target: dict = field(default_factory=dict)
    learner: dict = field(default_factory=dict)
    alpha: float | None = None
    beta: float | None = None
    rho: float | None = None
    n: int | None = None
    trials: int = 100
    seed: int = 0
    out: str | None = None
    threads: int = 1

    def with_defaults(self) -> "ExperimentConfig":
        """Fill unset budgets from the experiment's defaults."""
        from .experiments import EXPERIMENTS

        defaults = getattr(EXPERIMENTS.get(self.experiment), "defaults", {})
        for name in ("alpha", "beta", "rho"):
            if getattr(self, name) is None:
                setattr(self, name, defaults.get(name, {"alpha": 0.1, "beta": 0.05, "rho": 0.2}[name]))
        return self

    def validate(self) -> "ExperimentConfig":
        self.with_defaults()
        for name in ("alpha", "beta", "rho"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0 < v < 1):
                raise ParameterError(f"config.{name}: must lie in (0, 1), got {v!r}")
        if not (isinstance(self.trials, int) and self.trials >= 30):
            raise ParameterError(f"config.trials: need at least 30 trial pairs, got {self.trials!r}")
        if self.n is not None and not (isinstance(self.n, int) and self.n > 0):
            raise ParameterError(f"config.n: must be a positive integer, got {self.n!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ParameterError(f"config.seed: must be an unsigned 64-bit integer, got {self.seed!r}")
        if not (isinstance(self.threads, int) and self.threads >= 1):
            raise ParameterError(f"config.threads: must be a positive integer, got {self.threads!r}")
        for name in ("distribution", "target", "learner"):
            if not isinstance(getattr(self, name), dict):
                raise ParameterError(f"config.{name}: must be an object")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = sorted(set(data) - known)
        if extra:
            raise ParameterError(f"config.{extra[0]}: unknown field")
        if "experiment" not in data:
            raise ParameterError("config.experiment: required")
        return cls(**data).validate()

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def identity(self) -> dict:
        """Fields that determine the results (output path and thread count do not)."""
        out = asdict(self)
        out.pop("out")
        out.pop("threads")
        return out


@dataclass
class TrialRecord:
    trial: int
    seed_label: str
    output_a: str
    output_b: str
    equal: bool
    err_a: float | None
    err_b: float | None
    failed: bool = False


@dataclass
class ReplicabilityReport:
    trials: int
    disagreements: int
    failures: int
    rho_hat: float
    interval: tuple[float, float]
    half_width: float
    records: list[TrialRecord]
    threshold: float | None = None
    wall_seconds: float = 0.0
    config: dict = field(default_factory=dict)

    @property
    def errors(self) -> list[float]:
        return [e for r in self.records for e in (r.err_a, r.err_b) if e is not None]

    def success_rate(self, threshold: float | None = None) -> float | None:
        threshold = self.threshold if threshold is None else threshold
        errs = self.errors
        if threshold is None or not errs:
            return None
        return sum(e <= threshold for e in errs) / len(errs)

    def certified(self, rho: float) -> bool:
        return self.rho_hat <= rho + 3 * self.half_width

    def summary(self) -> dict:
        """Deterministic summary (no timings)."""
        errs = self.errors
        rho = self.config.get("rho")
        return {
            "config": self.config,
            "trials": self.trials,
            "disagreements": self.disagreements,
            "failures": self.failures,
            "rho_hat": self.rho_hat,
            "wilson95": list(self.interval),
            "half_width": self.half_width,
            "certified": None if rho is None else self.certified(rho),
            "error_threshold": self.threshold,
            "success_rate": self.success_rate(),
            "mean_error": math.fsum(errs) / len(errs) if errs else None,
            "max_error": max(errs) if errs else None,
        }


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float, float]:
    """Wilson score interval for ``k`` successes in ``n`` trials: ``(lo, hi, half_width)``."""
    if n <= 0 or not 0 <= k <= n:
        raise ParameterError("need 0 <= k <= n and n > 0")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = k / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, center - half), min(1.0, center + half), half


def serialize_output(out) -> str:
    if hasattr(out, "serialize"):
        return out.serialize()
    if isinstance(out, (float, np.floating)):
        return repr(float(out))
    return str(out)


def estimate_error(h, distribution, mode: str = "exact", *, n: int = 100_000, rng=None) -> float:
    """``Pr[h(x) != f(x)]`` under a labelled distribution.

    ``exact`` enumerates the support; ``montecarlo`` averages over ``n`` draws.
    """
    if mode == "exact":
        if not getattr(distribution, "enumerable", True) or not hasattr(distribution, "error"):
            raise DomainError(f"exact error needs an enumerable support (d={getattr(distribution, 'dim', '?')})")
        return float(distribution.error(h))
    if mode == "montecarlo":
        if rng is None:
            raise ParameterError("montecarlo mode needs a data generator")
        s = distribution.draw_counts(n, rng).nonzero()
        wrong = h.predict(s.points) != s.labels
        return float(np.dot(wrong, s.counts.astype(np.float64)) / s.n)
    raise ParameterError(f"unknown error mode {mode!r}")


def _trial_streams(seed: int, t: int):
    shared = SeedStream(seed).derive("shared").derive(f"trial/{t}")
    data = SeedStream.data_root(seed).derive(f"trial/{t}")
    return shared, data.derive("a").generator(), data.derive("b").generator()


def _one_trial(experiment, seed: int, t: int) -> TrialRecord:
    shared, rng_a, rng_b = _trial_streams(seed, t)
    outs, errs, failed = [], [], False
    for rng in (rng_a, rng_b):
        try:
            out = experiment.run(shared.copy(), rng)
        except ReplicableError as exc:
            outs.append(f"ERROR:{type(exc).__name__}")
            errs.append(None)
            failed = True
            continue
        outs.append(serialize_output(out))
        errs.append(experiment.error(out))
    equal = not failed and outs[0] == outs[1]
    return TrialRecord(t, f"{seed}/shared/trial/{t}", outs[0], outs[1], equal, errs[0], errs[1], failed)


def estimate_replicability(config: ExperimentConfig, experiment=None) -> ReplicabilityReport:
    """Run ``config.trials`` trial pairs and report the non-replication rate.

    ``experiment`` defaults to the registered experiment named in the config;
    it must provide ``run(stream, rng)`` and ``error(output)``.  Learner errors
    count as disagreements and are also tallied in ``failures``.
    """
    config.validate()
    if experiment is None:
        from .experiments import build_experiment

        experiment = build_experiment(config)
    start = time.perf_counter()
    trials = range(config.trials)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            records = list(pool.map(lambda t: _one_trial(experiment, config.seed, t), trials))
    else:
        records = [_one_trial(experiment, config.seed, t) for t in trials]
    k = sum(not r.equal for r in records)
    lo, hi, half = wilson_interval(k, config.trials)
    return ReplicabilityReport(
        trials=config.trials,
        disagreements=k,
        failures=sum(r.failed for r in records),
        rho_hat=k / config.trials,
        interval=(lo, hi),
        half_width=half,
        records=records,
        threshold=getattr(experiment, "threshold", None),
        wall_seconds=time.perf_counter() - start,
        config=config.identity(),
    )
