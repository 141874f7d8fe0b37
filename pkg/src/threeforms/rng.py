"""Deterministic 64-bit splittable generator (SplitMix64).

The verification suites must reproduce bit-for-bit across platforms given
(seed, samples), so randomness comes from this fixed integer recurrence, not
from the standard library.
"""

from __future__ import annotations

MASK = (1 << 64) - 1


class SplitMix64:
    """SplitMix64: state += golden gamma; output is a finalized mix."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return (z ^ (z >> 31)) & MASK

    def split(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())

    def randint(self, lo: int, hi: int) -> int:
        """Uniform-enough integer in [lo, hi] (span far below 2^64)."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.next_u64() % (hi - lo + 1)

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]
