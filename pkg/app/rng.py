########################
# Seeded RNG           #
########################

from typing import Sequence, TypeVar

T = TypeVar('T')

_MASK = (1 << 64) - 1


class SplitMix64:
    """
    SplitMix64 generator: a 64-bit state advanced by the golden-ratio
    increment, with two xor-shift-multiply rounds per output.

    Reports are reproduced from the seed alone, so suites draw every random
    value from one of these rather than from the `random` module.
    """

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def randbits(self, k: int) -> int:
        out, have = 0, 0
        while have < k:
            out = (out << 64) | self.next_u64()
            have += 64
        return out >> (have - k)

    def randrange(self, start: int, stop: int = None) -> int:
        """Uniform integer in [start, stop), or [0, start) with one argument."""
        if stop is None:
            start, stop = 0, start
        width = stop - start
        if width <= 0:
            raise ValueError("empty range")
        k = width.bit_length()
        # Rejection sampling keeps the draw unbiased.
        while True:
            r = self.randbits(k)
            if r < width:
                return start + r

    def randint(self, a: int, b: int) -> int:
        return self.randrange(a, b + 1)

    def random(self) -> float:
        return (self.next_u64() >> 11) / float(1 << 53)

    def choice(self, items: Sequence[T]) -> T:
        return items[self.randrange(len(items))]

    def fork(self, label: str) -> 'SplitMix64':
        """Independent stream keyed by a label, so suites do not share state."""
        h = self.state
        for ch in label.encode():
            h = ((h ^ ch) * 0x100000001B3) & _MASK
        return SplitMix64(h)
