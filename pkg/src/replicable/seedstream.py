"""Hierarchical deterministic randomness streams.

A :class:`SeedStream` is the concrete carrier of the random string shared by
two executions of a replicable algorithm.  Streams are identified by
``(root_seed, path, channel)``; the identity is hashed with BLAKE2b into a
128-bit key for a Philox4x64 counter-mode generator, so forking is O(1) and
the output is the same on every platform numpy supports.

Two channels exist.  ``"shared"`` streams carry the algorithm's internal
randomness and are never allowed to produce a bulk numpy generator;
``"data"`` streams feed samplers that simulate fresh i.i.d. data.  Keeping the
two apart is what makes a replicability experiment meaningful.
"""

from __future__ import annotations

import hashlib
import struct
from typing import Iterable, Sequence

import numpy as np
from numpy.random import Generator, Philox

from .errors import ChannelError, ParameterError

__all__ = ["SeedStream", "SHARED", "DATA", "as_bits"]

SHARED = "shared"
DATA = "data"

_U64 = (1 << 64) - 1
_TWO_M53 = 2.0 ** -53
_WORDS_PER_BLOCK = 4  # Philox4x64 emits four 64-bit words per counter value


def _stream_key(root_seed: int, path: Sequence[str], channel: str) -> bytes:
    h = hashlib.blake2b(digest_size=16, person=b"replicable-v1")
    h.update(channel.encode())
    h.update(b"\x00")
    h.update(struct.pack("<Q", root_seed))
    for label in path:
        raw = label.encode("utf-8")
        h.update(struct.pack("<I", len(raw)))
        h.update(raw)
    return h.digest()


def as_bits(x) -> np.ndarray:
    """Coerce a bit string (str of 0/1, sequence or array of bits) to a uint8 array."""
    if isinstance(x, str):
        if set(x) - {"0", "1"}:
            raise ParameterError(f"not a bit string: {x!r}")
        return np.frombuffer(x.encode(), dtype=np.uint8) - ord("0")
    arr = np.asarray(x, dtype=np.uint8).ravel()
    if arr.size and arr.max() > 1:
        raise ParameterError("bit arrays may only contain 0 and 1")
    return arr


class SeedStream:
    """Forkable deterministic random stream.

    ``counter`` counts 64-bit words consumed so far.  Equal
    ``(root_seed, path, channel, counter)`` always yields equal draws.
    A single instance must not be drawn from concurrently; derive a child per
    worker instead.
    """

    __slots__ = ("root_seed", "path", "channel", "counter", "_key")

    def __init__(
        self,
        root_seed: int,
        path: Iterable[str] = (),
        *,
        channel: str = SHARED,
        counter: int = 0,
    ):
        root_seed = int(root_seed)
        if not 0 <= root_seed <= _U64:
            raise ParameterError(f"root seed must be an unsigned 64-bit integer, got {root_seed}")
        if channel not in (SHARED, DATA):
            raise ParameterError(f"unknown channel {channel!r}")
        if counter < 0:
            raise ParameterError("counter must be non-negative")
        self.root_seed = root_seed
        self.path = tuple(path)
        self.channel = channel
        self.counter = int(counter)
        self._key = _stream_key(root_seed, self.path, channel)

    def __repr__(self) -> str:
        return (
            f"SeedStream({self.root_seed}, path={'/'.join(self.path)!r}, "
            f"channel={self.channel!r}, counter={self.counter})"
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeedStream):
            return NotImplemented
        return self._key == other._key and self.counter == other.counter

    def __hash__(self) -> int:
        return hash((self._key, self.counter))

    @property
    def key(self) -> bytes:
        """The 128-bit identity of this stream; independent of the counter."""
        return self._key

    @property
    def label(self) -> str:
        return "/".join(self.path)

    def copy(self) -> "SeedStream":
        return SeedStream(self.root_seed, self.path, channel=self.channel, counter=self.counter)

    def derive(self, label: str) -> "SeedStream":
        """Child stream for ``label``.  The parent's counter is untouched."""
        if not isinstance(label, str) or not label:
            raise ParameterError("derivation labels must be non-empty strings")
        return SeedStream(self.root_seed, self.path + (label,), channel=self.channel)

    def derive_path(self, labels: Iterable[str]) -> "SeedStream":
        s = self
        for label in labels:
            s = s.derive(label)
        return s

    # -- raw output -------------------------------------------------------

    def words(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit words; advances the counter by ``n``."""
        if n < 0:
            raise ParameterError("cannot draw a negative number of words")
        block, skip = divmod(self.counter, _WORDS_PER_BLOCK)
        gen = Philox(key=int.from_bytes(self._key, "little"), counter=block)
        out = gen.random_raw(n + skip)[skip:]
        self.counter += n
        return out

    # -- typed draws ------------------------------------------------------

    def uniform_unit(self) -> float:
        """A float in [0, 1) with 53 bits of resolution; consumes one word."""
        return float(int(self.words(1)[0]) >> 11) * _TWO_M53

    def uniform(self, n: int) -> np.ndarray:
        """Vector of ``n`` draws with the same construction as :meth:`uniform_unit`."""
        return (self.words(n) >> np.uint64(11)).astype(np.float64) * _TWO_M53

    def random_bits(self, n: int) -> np.ndarray:
        """``n`` bits as a uint8 array; consumes ``ceil(n / 64)`` words."""
        if n < 0:
            raise ParameterError("cannot draw a negative number of bits")
        if n == 0:
            return np.zeros(0, dtype=np.uint8)
        w = self.words(-(-n // 64)).astype("<u8")
        bits = np.unpackbits(w.view(np.uint8), bitorder="little")
        return bits[:n]

    def integer(self, upper: int) -> int:
        """Uniform integer in ``[0, upper)`` by rejection on 64-bit words."""
        if upper <= 0:
            raise ParameterError("upper bound must be positive")
        limit = (1 << 64) - ((1 << 64) % upper)
        while True:
            w = int(self.words(1)[0])
            if w < limit:
                return w % upper

    def keyed_bit(self, x) -> int:
        """Pseudorandom bit keyed by this stream's identity (not its counter)."""
        bits = as_bits(x)
        h = hashlib.blake2b(digest_size=8, key=self._key)
        h.update(struct.pack("<Q", bits.size))
        h.update(np.packbits(bits, bitorder="little").tobytes())
        return h.digest()[0] & 1

    def keyed_bits(self, X) -> np.ndarray:
        """Row-wise :meth:`keyed_bit` over a 2-d bit matrix."""
        X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
        return np.fromiter((self.keyed_bit(row) for row in X), dtype=np.uint8, count=len(X))

    # -- data channel -----------------------------------------------------

    def generator(self) -> Generator:
        """Bulk numpy generator for simulating data.  Refused on shared streams."""
        if self.channel == SHARED:
            raise ChannelError(
                f"stream {self.label or '<root>'} belongs to the shared channel; "
                "data randomness must come from a data-channel stream"
            )
        return Generator(Philox(key=int.from_bytes(self._key, "little")))

    @classmethod
    def data_root(cls, root_seed: int) -> "SeedStream":
        return cls(root_seed, channel=DATA)
