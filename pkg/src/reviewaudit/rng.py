"""Deterministic 64-bit PRNG with splittable substreams.

The generator is SplitMix64 (Steele, Lea & Flood 2014): state advances by
the 64-bit golden-gamma constant and each output is the mix
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
    z ^= z >> 27; z *= 0x94D049BB133111EB;
    z ^= z >> 31
over Python integers masked to 64 bits, so sequences are identical on
every platform. Substreams are derived by folding integer keys into the
seed through the same mix, which makes per-product streams independent of
generation order.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_KEY_SALT = 0xD1B54A32D192ED03


def _mix(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Seeded SplitMix64 stream."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * (2.0 ** -53)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) via the multiply-shift reduction."""
        if n <= 0:
            raise ValueError(f"n must be positive, got {n}")
        return (self.next_uint64() * n) >> 64

    def weighted_index(self, weights: list[float]) -> int:
        """Index drawn proportionally to non-negative weights."""
        total = sum(weights)
        u = self.random() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if u < acc:
                return i
        return len(weights) - 1


def derive_stream(seed: int, *keys: int) -> SplitMix64:
    """Substream determined only by (seed, keys), not by draw order elsewhere."""
    state = _mix(seed & _MASK64)
    for key in keys:
        state = _mix((state + _GOLDEN + (key & _MASK64) * _KEY_SALT) & _MASK64)
    return SplitMix64(state)
