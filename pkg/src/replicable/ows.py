"""One-way-sequence concepts and their replicable PAC learner.

An input ``x`` in {0,1}^d is parsed as an index block of ``k = floor(sqrt(d)) - 1``
bits followed by a string ``sigma`` of ``d - k`` bits.  Index ``i`` in
``1..2^k`` is stored as the little-endian binary form of ``i - 1``.

The sequence ``(sigma_i, b_i)`` is a SHAKE-256 hash chain seeded by the secret
``s``: it is cheap to walk forward from any known ``sigma_i`` and there is no
known way to walk it backward.  Bit strings are hashed as their ASCII ``0``/``1``
text and digests are read most-significant bit first.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from .errors import DataError, DomainError, OwsFailure, ParameterError
from .hypotheses import Hypothesis
from .rquantile import r_quantile_est
from .rstat import r_round
from .sampling import FiniteDistribution, Sample
from .seedstream import SeedStream, as_bits

__all__ = [
    "AllZeroHypothesis",
    "OwsConcept",
    "OwsThresholdHypothesis",
    "compute_forward",
    "index_width",
    "make_ows_concept",
    "ows_distribution",
    "ows_sample_size",
    "r_learner_ows",
]


def index_width(d: int) -> int:
    return math.isqrt(d) - 1


def _text(bits) -> bytes:
    return (as_bits(bits) + ord("0")).astype(np.uint8).tobytes()


def _hash_bits(data: bytes, n: int) -> np.ndarray:
    digest = hashlib.shake_256(data).digest(-(-n // 8))
    return np.unpackbits(np.frombuffer(digest, dtype=np.uint8))[:n]


def _label(sigma) -> int:
    return hashlib.shake_256(_text(sigma) + b"label").digest(1)[0] & 1


def _step(sigma) -> np.ndarray:
    return _hash_bits(_text(sigma), len(sigma))


def compute_forward(j: int, i: int, sigma_i) -> tuple[np.ndarray, int]:
    """``(sigma_j, b_j)`` from ``sigma_i``, using ``j - i`` hash evaluations."""
    if j < i:
        raise DomainError(f"reverse computation refused (j={j} < i={i})")
    sigma = as_bits(sigma_i).copy()
    for _ in range(j - i):
        sigma = _step(sigma)
    return sigma, _label(sigma)


def _sigma_hex(sigma) -> str:
    bits = as_bits(sigma)
    value = int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")
    return format(value, "x").zfill(max(1, -(-len(bits) // 4)))


def _split(X, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices (1-based) and string blocks of the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
    idx = X[:, :k].astype(np.int64) @ (np.int64(1) << np.arange(k, dtype=np.int64)) + 1
    return idx, X[:, k:]


def encode(i: int, sigma, k: int) -> np.ndarray:
    """The input row for index ``i`` and string ``sigma``."""
    head = ((int(i) - 1) >> np.arange(k)) & 1
    return np.concatenate([head.astype(np.uint8), as_bits(sigma)])


class OwsConcept(Hypothesis):
    """The concept ``c_s``: 1 exactly on ``(i, sigma_i)`` with ``b_i = 1``."""

    def __init__(self, d: int, s):
        self.d = int(d)
        self.k = index_width(self.d)
        s = as_bits(s)
        if self.k < 2:
            raise ParameterError(f"d={d} gives index width {self.k}; need d >= 9")
        if len(s) != self.k:
            raise ParameterError(f"seed must have {self.k} bits, got {len(s)}")
        self.s = s
        n = 1 << self.k
        width = self.d - self.k
        self.sigmas = np.empty((n, width), dtype=np.uint8)
        self.labels = np.empty(n, dtype=np.uint8)
        sigma = _hash_bits(_text(s) + b"init", width)
        for r in range(n):
            self.sigmas[r] = sigma
            self.labels[r] = _label(sigma)
            sigma = _step(sigma)

    @property
    def n_indices(self) -> int:
        return 1 << self.k

    def sigma(self, i: int) -> np.ndarray:
        return self.sigmas[i - 1]

    def label(self, i: int) -> int:
        return int(self.labels[i - 1])

    def point(self, i: int, sigma=None) -> np.ndarray:
        return encode(i, self.sigma(i) if sigma is None else sigma, self.k)

    def predict(self, X) -> np.ndarray:
        idx, sig = _split(X, self.k)
        match = np.all(sig == self.sigmas[idx - 1], axis=1)
        return (match & (self.labels[idx - 1] == 1)).astype(np.uint8)

    def serialize(self) -> str:
        return f"OWSCONCEPT;d={self.d};s={''.join(map(str, self.s))}"


def make_ows_concept(seed, d: int) -> OwsConcept:
    return OwsConcept(d, seed)


class AllZeroHypothesis(Hypothesis):
    def predict(self, X) -> np.ndarray:
        return np.zeros(len(np.atleast_2d(X)), dtype=np.uint8)

    def serialize(self) -> str:
        return "ALLZERO"


class OwsThresholdHypothesis(Hypothesis):
    """0 below ``i*``; at or above ``i*``, the forward-computed concept."""

    def __init__(self, i_star: int, sigma_star, b_star: int, k: int):
        self.i_star = int(i_star)
        self.sigma_star = as_bits(sigma_star).copy()
        self.b_star = int(b_star) & 1
        self.k = int(k)
        self._chain = None

    def _forward_table(self):
        # rows for indices i* .. 2^k, computed once on demand
        if self._chain is None:
            n = (1 << self.k) - self.i_star + 1
            sig = np.empty((n, len(self.sigma_star)), dtype=np.uint8)
            lab = np.empty(n, dtype=np.uint8)
            sigma, lab[0] = self.sigma_star, self.b_star
            sig[0] = sigma
            for r in range(1, n):
                sigma, lab[r] = compute_forward(1, 0, sigma)
                sig[r] = sigma
            self._chain = (sig, lab)
        return self._chain

    def predict(self, X) -> np.ndarray:
        idx, sig = _split(X, self.k)
        out = np.zeros(len(idx), dtype=np.uint8)
        above = idx >= self.i_star
        if np.any(above):
            table_sig, table_lab = self._forward_table()
            r = idx[above] - self.i_star
            match = np.all(sig[above] == table_sig[r], axis=1)
            out[above] = (match & (table_lab[r] == 1)).astype(np.uint8)
        return out

    def serialize(self) -> str:
        return f"OWS;i*={self.i_star};sigma*={_sigma_hex(self.sigma_star)};b*={self.b_star}"


def ows_distribution(concept: OwsConcept, weights=None) -> FiniteDistribution:
    """Distribution over the on-chain points ``(i, sigma_i)``, labelled by ``concept``.

    ``weights`` (length ``2^k``) defaults to uniform.
    """
    n = concept.n_indices
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=np.float64)
    if len(w) != n:
        raise DataError(f"need {n} weights")
    points = np.stack([concept.point(i) for i in range(1, n + 1)])
    return FiniteDistribution(points, w / w.sum(), concept.labels.copy())


def ows_sample_size(alpha: float, rho: float, beta: float, k: int) -> int:
    c = math.log(6.0 / beta)
    return math.ceil(
        max(
            392.0 / (alpha**2 * rho**2) * c,
            9216.0 * k * k / (alpha**3 * rho**2) * c,
            32.0 / alpha**2 * c,
        )
    )


def r_learner_ows(
    sample: Sample,
    alpha: float,
    rho: float,
    beta: float,
    stream: SeedStream,
    *,
    check_size: bool = True,
) -> Hypothesis:
    """Replicable PAC learner for one-way-sequence concepts.

    Raises :class:`OwsFailure` when no positive draw lies at or below the
    estimated threshold index.
    """
    if sample.labels is None:
        raise DataError("r_learner_ows needs labelled samples")
    d = sample.points.shape[1]
    k = index_width(d)
    m = sample.n
    if check_size:
        need = ows_sample_size(alpha, rho, beta, k)
        if m < need:
            raise ParameterError(f"r_learner_ows needs at least {need} samples, got {m}")
    positive = (sample.labels == 1) & (sample.counts != 0)
    pos = sample.subset(positive)
    n_pos = pos.n
    p_hat = r_round(n_pos / m, rho * alpha / 48.0, rho / 3.0, stream.derive("mass"), label="ows/mass")
    if p_hat < alpha / 2.0:
        return AllZeroHypothesis()
    if n_pos == 0:
        raise OwsFailure("no positive samples although the positive mass estimate is large")

    idx, sig = _split(pos.points, k)
    R = 1 << k
    counts = np.zeros(R, dtype=object)
    for i, c in zip(idx, pos.counts):
        counts[i - 1] += int(c)
    i_star = r_quantile_est(
        None, R, alpha / 2.0, alpha / 4.0, rho / 3.0, beta / 3.0,
        stream.derive("quantile"), counts=counts, check_size=False,
    )
    first = int(np.argmin(idx))
    i_min = int(idx[first])
    if i_min > i_star:
        raise OwsFailure(f"smallest positive index {i_min} lies above the threshold {i_star}")
    sigma_star, b_star = compute_forward(i_star, i_min, sig[first])
    return OwsThresholdHypothesis(i_star, sigma_star, b_star, k)
