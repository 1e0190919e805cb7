"""
Deterministic random streams.

Each seed is expanded with splitmix64 into the 256-bit state of a xoshiro256++ generator;
normals come from the Box–Muller transform. A StreamBatch advances many independent
lanes at once as numpy uint64 arrays: lane k depends only on seeds[k], never on the other
lanes in the batch.
"""

import math
from collections.abc import Sequence

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_POW_M53 = 2.0**-53

_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U23 = np.uint64(23)
_U41 = np.uint64(41)
_U45 = np.uint64(45)
_U19 = np.uint64(19)


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step. Returns (output, new_state)."""
    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31), state


def seed_state(seed: int) -> tuple[int, int, int, int]:
    """Expand a 64-bit seed into a xoshiro256++ state."""
    sm = seed & MASK64
    words = []
    for _ in range(4):
        out, sm = splitmix64(sm)
        words.append(out)
    return tuple(words)


class StreamBatch:
    """A batch of independent xoshiro256++ lanes, one per seed."""

    def __init__(self, seeds: Sequence[int]):
        if len(seeds) == 0:
            raise ValueError("StreamBatch needs at least one seed")
        self.seeds = [int(s) for s in seeds]
        state = np.array([seed_state(s) for s in self.seeds], dtype=np.uint64)
        self._s = [state[:, i].copy() for i in range(4)]

    @classmethod
    def from_seed(cls, seed: int) -> "StreamBatch":
        return cls([seed])

    def __len__(self) -> int:
        return len(self.seeds)

    def next_u64(self) -> np.ndarray:
        s0, s1, s2, s3 = self._s
        total = s0 + s3
        result = ((total << _U23) | (total >> _U41)) + s0
        t = s1 << _U17
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self._s[3] = (s3 << _U45) | (s3 >> _U19)
        return result

    def uniform(self) -> np.ndarray:
        """Doubles in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> _U11).astype(np.float64) * _TWO_POW_M53

    def normals(self, dim: int) -> np.ndarray:
        """Standard normals of shape (lanes, dim), one Box–Muller pair per two coordinates.

        The sine half of the last pair is dropped when dim is odd.
        """
        out = np.empty((len(self), dim), dtype=np.float64)
        for k in range(math.ceil(dim / 2)):
            u1 = 1.0 - self.uniform()
            u2 = self.uniform()
            radius = np.sqrt(-2.0 * np.log(u1))
            angle = 2.0 * math.pi * u2
            out[:, 2 * k] = radius * np.cos(angle)
            if 2 * k + 1 < dim:
                out[:, 2 * k + 1] = radius * np.sin(angle)
        return out
