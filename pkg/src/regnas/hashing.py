"""Deterministic counter-based hashing and splittable random streams.

Every random quantity in this package is a pure function of a 64-bit key and
an integer/string path, built from the SplitMix64 finalizer.  This makes all
results bit-identical across platforms, processes, thread counts, and call
orders: there is no hidden RNG state beyond an explicit draw counter.

Construction (documented so independent re-implementations can match):

  mix64(x)           = SplitMix64 finalizer of x (mod 2^64)
  word(w)            = w mod 2^64 for ints; first 8 little-endian bytes of
                       blake2b(w, digest_size=8) for strings
  derive(k, w1..wn)  = fold: h <- mix64(h + 0x9E3779B97F4A7C15 + word(wi)),
                       starting from h = k
  derive_array(k, n) = [derive(k, i) for i in 0..n-1], vectorized

Uniform floats take the top 53 bits: u01(h) = (h >> 11) * 2^-53.
Signed 32-bit deviates take the top 32 bits: (h >> 32) - 2^31.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a 64-bit word."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def _word(w: int | str) -> int:
    if isinstance(w, str):
        return int.from_bytes(hashlib.blake2b(w.encode(), digest_size=8).digest(), "little")
    return w & MASK64


def derive(key: int, *path: int | str) -> int:
    """Derive a child key from `key` and a path of ints or string tags."""
    h = key & MASK64
    for w in path:
        h = mix64((h + _GOLDEN + _word(w)) & MASK64)
    return h


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized mix64 over a uint64 array."""
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX2)
    x ^= x >> np.uint64(31)
    return x


def derive_array(key: int, n: int) -> np.ndarray:
    """uint64 array equal to [derive(key, i) for i in range(n)]."""
    base = np.uint64((key + _GOLDEN) & MASK64)
    return mix64_array(base + np.arange(n, dtype=np.uint64))


def u01(h: int) -> float:
    """Map a 64-bit word to a float in [0, 1) using its top 53 bits."""
    return (h >> 11) * 2.0**-53


def u01_array(h: np.ndarray) -> np.ndarray:
    return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53


class SplitRng:
    """Splittable counter-based random stream.

    Draws consume an integer counter; `split` derives an independent child
    stream from a path, so concurrent consumers never share state.
    """

    __slots__ = ("key", "_count")

    def __init__(self, key: int):
        self.key = key & MASK64
        self._count = 0

    @classmethod
    def from_seed(cls, seed: int, *path: int | str) -> "SplitRng":
        return cls(derive(mix64(seed), *path))

    def split(self, *path: int | str) -> "SplitRng":
        return SplitRng(derive(self.key, "~split", *path))

    def _next(self) -> int:
        self._count += 1
        return derive(self.key, self._count)

    def random(self) -> float:
        return u01(self._next())

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("randrange bound must be positive")
        if n == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self._next()
            if u < limit:
                return u % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def pair_distinct(self, n: int) -> tuple[int, int]:
        """Two distinct indices in [0, n); (0, 0) when n == 1."""
        if n == 1:
            return 0, 0
        i = self.randrange(n)
        j = self.randrange(n - 1)
        if j >= i:
            j += 1
        return i, j
