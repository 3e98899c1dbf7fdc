"""Injectable randomness sources.

Every operation that needs randomness takes an object with a
``read(n) -> bytes`` method, so tests can pin transcripts and the
simulator can be replayed from a seed.
"""

import hashlib
import os
import random
from typing import Protocol

from .errors import RngFailure


class RandomSource(Protocol):
    def read(self, n: int) -> bytes: ...


class SystemRandomSource:
    def read(self, n: int) -> bytes:
        return os.urandom(n)


class SeededRandomSource:
    """Deterministic source for simulations. Not for real keys."""

    def __init__(self, seed: int | bytes | str):
        if isinstance(seed, int):
            seed = seed.to_bytes((seed.bit_length() + 8) // 8, "big", signed=True)
        elif isinstance(seed, str):
            seed = seed.encode()
        self._seed = bytes(seed)
        self._rng = random.Random(hashlib.sha256(b"lpki-seed" + self._seed).digest())

    def read(self, n: int) -> bytes:
        return self._rng.randbytes(n) if n else b""

    def fork(self, label: str) -> "SeededRandomSource":
        """Independent child stream; depends only on the seed and label."""
        return SeededRandomSource(hashlib.sha256(self._seed + b"/" + label.encode()).digest())


class ScriptedRandomSource:
    """Replays a fixed byte string; raises RngFailure once exhausted."""

    def __init__(self, data: bytes):
        self._data = bytes(data)
        self._pos = 0

    def read(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise RngFailure(f"scripted source exhausted ({n} bytes requested)")
        out = self._data[self._pos:self._pos + n]
        self._pos += n
        return out


def random_scalar(n: int, rng: RandomSource) -> int:
    """Uniform integer in [1, n-1] by rejection sampling."""
    nbits = n.bit_length()
    nbytes = (nbits + 7) // 8
    mask = (1 << nbits) - 1
    for _ in range(1024):
        chunk = rng.read(nbytes)
        if len(chunk) != nbytes:
            raise RngFailure("short read from randomness source")
        k = int.from_bytes(chunk, "big") & mask
        if 1 <= k < n:
            return k
    raise RngFailure("rejection sampling did not terminate")
