"""Counter-based baseline generator for everything that must be i.i.d.

The whole harness (baseline chains, Cranley-Patterson shifts, synthetic
data, minibatch indices) draws from this one generator so that results are
bit-reproducible across platforms and numpy versions.  It is a keyed
SplitMix64: output ``i`` of stream ``(seed, stream)`` is

    key  = mix64(mix64(seed ^ 0x243F6A8885A308D3) ^ (stream * 0xD1B54A32D192ED03))
    out  = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)   (all mod 2**64)

with the standard SplitMix64 finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Uniform doubles are ``(out >> 11) * 2**-53``, i.e. in [0, 1).  Distinct
``(seed, stream)`` pairs give effectively independent streams; the object
keeps a running counter so successive calls continue the stream.
"""

from __future__ import annotations

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GAMMA = 0x9E3779B97F4A7C15
_STREAM_MULT = 0xD1B54A32D192ED03
_SEED_SALT = 0x243F6A8885A308D3
_INV_2_53 = 2.0 ** -53


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, vectorized over uint64 arrays (mod-2**64 wraparound)."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


class BaselinePrng:
    """Splittable counter-based 64-bit generator with a persistent counter.

    Identical ``(seed, stream, counter)`` triples produce identical output
    everywhere; there is no global state.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        k = _mix64(np.uint64((self.seed ^ _SEED_SALT) & 0xFFFFFFFFFFFFFFFF))
        k = _mix64(k ^ np.uint64((self.stream * _STREAM_MULT) & 0xFFFFFFFFFFFFFFFF))
        self._key = k
        self._counter = 0

    def uint64(self, count: int) -> np.ndarray:
        """Next ``count`` raw 64-bit words of the stream."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        idx = np.arange(self._counter + 1, self._counter + count + 1, dtype=np.uint64)
        self._counter += count
        with np.errstate(over="ignore"):
            return _mix64(self._key + idx * np.uint64(_GAMMA))

    def uniform(self, count: int) -> np.ndarray:
        """Next ``count`` doubles, uniform on [0, 1) with 2**-53 granularity."""
        return (self.uint64(count) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def index_subset(self, n: int, k: int) -> np.ndarray:
        """Uniform subset of ``k`` distinct indices from ``range(n)``.

        Partial Fisher-Yates driven by this stream's uniforms, so the draw
        is without replacement and reproducible.
        """
        if not 0 <= k <= n:
            raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
        u = self.uniform(k)
        pool = np.arange(n)
        for j in range(k):
            r = j + int(u[j] * (n - j))
            pool[j], pool[r] = pool[r], pool[j]
        return pool[:k].copy()
