"""xorshift64* generator used for stall randomization.

Recurrence over 64-bit unsigned state ``x``::

    x ^= x >> 12
    x ^= x << 25   (mod 2**64)
    x ^= x >> 27
    out = (x * 0x2545F4914F6CDD1D) mod 2**64

A zero seed is replaced by 0x9E3779B97F4A7C15 since zero is a fixed point.
Stall lengths are ``out % (max_stall + 1)``.  The generator is spelled out
here instead of using :mod:`random` so seeds mean the same thing everywhere.
"""

MASK64 = (1 << 64) - 1
MULTIPLIER = 0x2545F4914F6CDD1D
ZERO_SEED = 0x9E3779B97F4A7C15


class XorShift64Star:
    def __init__(self, seed: int):
        self.state = (seed & MASK64) or ZERO_SEED

    def next(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * MULTIPLIER) & MASK64

    def below(self, bound: int) -> int:
        return self.next() % bound
