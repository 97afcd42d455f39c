"""Counter-based SplitMix64 uniforms with deterministic sub-stream seeding.

Draw ``i`` (``i >= 1``) of the stream with seed ``s`` is

    mix64(s + i * GOLDEN)   (mod 2**64)

where ``mix64`` is the SplitMix64 finalizer (Steele, Lea & Flood 2014).  The
top 53 bits are scaled by ``2**-53`` so uniforms lie in ``[0, 1)``.  Because
the generator is a pure function of ``(seed, counter)``, any draw can be
recomputed without replaying the stream, which is what lets the naive
sampler be evaluated on a sub-range or on a whole batch of trials at once.

Sub-stream seeds are ``derive_seed(master, index) =
mix64(master ^ mix64((index + 1) * GOLDEN))``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 2.0 ** -53

ALGORITHM = "splitmix64-counter"


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_seed(master_seed: int, stream_index: int) -> int:
    """Seed of sub-stream ``stream_index`` under ``master_seed``."""
    return mix64((master_seed & MASK64) ^ mix64((stream_index + 1) * GOLDEN))


def derive_seeds(master_seed: int, start: int, stop: int) -> np.ndarray:
    """Vectorised :func:`derive_seed` for stream indices ``start..stop-1``."""
    idx = np.arange(start + 1, stop + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64_array(np.uint64(master_seed & MASK64) ^ mix64_array(idx * np.uint64(GOLDEN)))


def uniforms_at(seeds, counters) -> np.ndarray:
    """Uniforms for every broadcast pair of ``seeds`` and ``counters``.

    ``uniforms_at(seeds[:, None], ks[None, :])`` gives one row per stream.
    """
    s = np.asarray(seeds, dtype=np.uint64)
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = mix64_array(s + c * np.uint64(GOLDEN))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


class RngStream:
    """Sequential view over one counter-based stream."""

    algorithm = ALGORITHM

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed & MASK64
        self.counter = counter

    @classmethod
    def substream(cls, master_seed: int, stream_index: int) -> "RngStream":
        return cls(derive_seed(master_seed, stream_index))

    def uniform(self) -> float:
        self.counter += 1
        return (mix64(self.seed + self.counter * GOLDEN) >> 11) * _INV53

    def uniforms(self, n: int) -> np.ndarray:
        out = uniforms_at(self.seed, np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64))
        self.counter += n
        return out

    def __repr__(self):
        return f"RngStream(seed={self.seed:#018x}, counter={self.counter})"
