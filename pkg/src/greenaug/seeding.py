"""Deterministic seed derivation and a tiny portable RNG.

Every random draw in the toolkit flows through these helpers so that
outputs are a pure function of the configured seed, independent of
platform, worker count and library versions.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from an arbitrary mix of labels and numbers.

    Parts are length-prefixed before hashing so ("ab", "c") and
    ("a", "bc") never collide.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        token = str(part).encode("utf-8")
        h.update(len(token).to_bytes(4, "little"))
        h.update(token)
    return int.from_bytes(h.digest(), "little")


class Rng:
    """splitmix64 sequence; bit-identical on every platform."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Float in [0, 1)."""
        return self.next_u64() / 2**64

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def randint(self, n: int) -> int:
        """Integer in [0, n)."""
        if n <= 0:
            raise ValueError("randint needs n >= 1")
        return self.next_u64() % n

    def rgb(self) -> tuple[int, int, int]:
        return (self.randint(256), self.randint(256), self.randint(256))

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates shuffle of range(n)."""
        out = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randint(i + 1)
            out[i], out[j] = out[j], out[i]
        return out

    def subset(self, n: int, k: int) -> list[int]:
        """k distinct indices drawn uniformly from range(n), sorted."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} of {n}")
        if k == n:
            return list(range(n))
        # partial Fisher-Yates: the first k slots of a full shuffle
        out = list(range(n))
        for i in range(k):
            j = i + self.randint(n - i)
            out[i], out[j] = out[j], out[i]
        return sorted(out[:k])
