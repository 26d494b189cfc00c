"""Portable 64-bit linear congruential generator.

Seeded latency tables must reproduce bit-for-bit across independent
implementations, so the generator is pinned exactly: 64-bit state,
multiplier 6364136223846793005, increment 1442695040888963407, new state
returned as the output. Range draws map the raw output with a modulus:
lo + raw % (hi - lo + 1).
"""

from __future__ import annotations

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_raw(self) -> int:
        self.state = (self.state * MULTIPLIER + INCREMENT) & _MASK
        return self.state

    def next_in(self, lo: int, hi: int) -> int:
        """Uniform-ish draw in [lo, hi] by modular truncation."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.next_raw() % (hi - lo + 1)
