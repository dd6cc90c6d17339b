"""Seeded 64-bit LCG used for payload padding and all evaluation randomness.

``state' = state * 6364136223846793005 + 1442695040888963407 (mod 2**64)``.
Every draw advances the state once and reads from its high bits, so streams
are bit-exact across platforms and implementations.
"""

from __future__ import annotations

import math

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
MASK64 = (1 << 64) - 1


def _step(state: int) -> int:
    return (state * MULTIPLIER + INCREMENT) & MASK64


def derive_seed(base: int, *labels: int) -> int:
    """Mix integer labels into ``base`` to get an independent child seed."""
    # step before every xor so (base, label) pairs cannot cancel each other
    state = _step(base & MASK64)
    for label in labels:
        state = _step(_step(state ^ (label & MASK64)))
    return state


class Lcg64:
    __slots__ = ("state",)

    def __init__(self, seed: int = 0) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = _step(self.state)
        return self.state

    def bit(self) -> int:
        return self.next_u64() >> 63

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of resolution."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        # multiply-shift on the top 32 bits; bias is < span / 2**32
        return lo + (((self.next_u64() >> 32) * span) >> 32)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def gauss(self) -> float:
        """Standard normal draw (Box-Muller, one value per two uniforms)."""
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
