"""Common hypothesis interface.

Every learner returns a :class:`Hypothesis`: a predictor over {0,1}^d with a
canonical text serialization.  Two outputs are considered identical exactly
when their serializations are byte-equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .hypercube import codes
from .seedstream import SeedStream

__all__ = [
    "ConstantHypothesis",
    "Hypothesis",
    "KeyedGuessHypothesis",
    "TableHypothesis",
    "UniformLearnerSpec",
]


class Hypothesis:
    """Base class; subclasses implement :meth:`predict` and :meth:`serialize`."""

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError

    def serialize(self) -> str:
        raise NotImplementedError

    def __call__(self, x) -> int:
        return int(self.predict(np.atleast_2d(x))[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypothesis):
            return NotImplemented
        return self.serialize() == other.serialize()

    def __hash__(self) -> int:
        return hash(self.serialize())

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.serialize()}>"


class ConstantHypothesis(Hypothesis):
    def __init__(self, bit: int):
        self.bit = int(bit) & 1

    def predict(self, X) -> np.ndarray:
        return np.full(len(np.atleast_2d(X)), self.bit, dtype=np.uint8)

    def serialize(self) -> str:
        return f"CONST;{self.bit}"


class KeyedGuessHypothesis(Hypothesis):
    """A random function {0,1}^d -> {0,1} drawn from a shared stream.

    The output on ``x`` is a keyed hash bit, so the function is identical in
    every execution that derives the same stream.
    """

    def __init__(self, stream: SeedStream):
        self.stream = stream

    def predict(self, X) -> np.ndarray:
        return self.stream.keyed_bits(X)

    def serialize(self) -> str:
        return f"GUESS;key={self.stream.key.hex()}"


class TableHypothesis(Hypothesis):
    """Explicit truth table over {0,1}^d, indexed by point code."""

    def __init__(self, table):
        self.table = np.asarray(table, dtype=np.uint8)

    def predict(self, X) -> np.ndarray:
        return self.table[codes(X)]

    def serialize(self) -> str:
        return "TABLE;" + np.packbits(self.table, bitorder="little").tobytes().hex()


@dataclass(frozen=True)
class UniformLearnerSpec:
    """A replicable learner for uniform marginals, as a black box.

    ``learn(sample, alpha, rho, beta, stream)`` returns a hypothesis and
    ``sample_size(alpha, rho, beta, d)`` is the number of labelled draws it
    needs.  ``restriction_closed`` declares that the learner's concept class is
    closed under fixing coordinates, which lifting requires.
    """

    name: str
    learn: Callable
    sample_size: Callable
    restriction_closed: bool = False
