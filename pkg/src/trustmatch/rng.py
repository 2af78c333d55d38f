"""Deterministic 64-bit PRNG with hierarchical stream splitting.

Every random draw in the simulator flows through :class:`SplitMix64` so that
a run is reproducible from its seed alone, independent of platform, Python
hash randomization, or the order in which replicas execute.  Substreams are
derived by mixing integer keys into the parent seed, so parallel replicas
can own statistically independent generators without sharing state.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    """Finalizer that scrambles a 64-bit state word into an output word."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Counter-based generator: state advances by a fixed odd constant and
    each output is the mixed state.  Period 2^64 per stream."""

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._state = self._seed

    @property
    def seed(self) -> int:
        return self._seed

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def split(self, *keys: int) -> "SplitMix64":
        """Derive an independent child stream keyed by integers.

        Splitting depends only on the parent's seed, never on how many
        values the parent has produced, so substream layouts are stable.
        """
        s = self._seed
        for k in keys:
            s = _mix(s ^ _mix((k & _MASK64) ^ _GOLDEN))
        return SplitMix64(s)

    # -- derived draws -----------------------------------------------------

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of entropy."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling (unbiased)."""
        if n <= 0:
            raise ValueError("randrange() bound must be positive")
        limit = _MASK64 - (_MASK64 + 1) % n
        while True:
            u = self.next_u64()
            if u <= limit:
                return u % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.randrange(hi - lo + 1)

    def choice(self, seq):
        if not seq:
            raise IndexError("choice() on empty sequence")
        return seq[self.randrange(len(seq))]

    def shuffle(self, seq: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.randrange(i + 1)
            seq[i], seq[j] = seq[j], seq[i]
