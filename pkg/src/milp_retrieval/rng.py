"""Portable random stream for instance generation.

The raw source is Philox4x64-10 (Random123) keyed with ``(seed, 0)`` and a
counter starting at zero; 64-bit outputs are consumed in order.  Every
sampling primitive below is defined on top of that raw stream so another
language can reproduce generated instances bit for bit:

* ``random``: ``(u >> 11) * 2**-53`` -- a double in [0, 1).
* ``integers(lo, hi)``: ``lo + floor(random * (hi - lo))``.
* ``permutation(n)``: Fisher-Yates from the top, ``j = floor(r * (i + 1))``
  for ``i = n-1 .. 1`` using one ``random`` per step.
* ``sample(pool, k)``: partial Fisher-Yates from the bottom,
  ``j = i + floor(r * (len - i))`` for ``i = 0 .. k-1``.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def mix_seed(*parts: int) -> int:
    """SplitMix64 fold of integers into one 64-bit seed."""
    z = 0x9E3779B97F4A7C15
    for p in parts:
        z = (z + (int(p) & _MASK64) + 0x9E3779B97F4A7C15) & _MASK64
        x = z
        x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
        z = x ^ (x >> 31)
    return z


class Rng:
    def __init__(self, seed: int):
        seed = int(seed) & _MASK64
        self._bitgen = np.random.Philox(key=np.array([seed, 0], dtype=np.uint64))

    def raw(self, size: int) -> np.ndarray:
        if size <= 0:
            return np.empty(0, dtype=np.uint64)
        return self._bitgen.random_raw(size)

    def random(self, size: int) -> np.ndarray:
        return (self.raw(size) >> np.uint64(11)).astype(np.float64) * (2.0**-53)

    def uniform(self, low: float, high: float, size: int) -> np.ndarray:
        return low + (high - low) * self.random(size)

    def integers(self, low: int, high: int, size: int) -> np.ndarray:
        """Integers in ``[low, high)``."""
        if high <= low:
            raise ValueError("empty integer range")
        return low + np.floor(self.random(size) * (high - low)).astype(np.int64)

    def integer(self, low: int, high: int) -> int:
        return int(self.integers(low, high, 1)[0])

    def permutation(self, n: int) -> np.ndarray:
        out = np.arange(n, dtype=np.int64)
        if n < 2:
            return out
        r = self.random(n - 1)
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = int(r[k] * (i + 1))
            out[i], out[j] = out[j], out[i]
        return out

    def sample(self, pool, k: int) -> np.ndarray:
        """``k`` distinct items of ``pool`` (array or ``int`` for ``range``)."""
        arr = np.arange(pool, dtype=np.int64) if np.isscalar(pool) else np.array(pool)
        size = arr.shape[0]
        if k > size:
            raise ValueError(f"cannot draw {k} distinct items from {size}")
        r = self.random(k)
        for i in range(k):
            j = i + int(r[i] * (size - i))
            arr[i], arr[j] = arr[j], arr[i]
        return arr[:k].copy()
