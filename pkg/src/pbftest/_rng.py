"""Seed derivation and counter-based random streams.

Every stochastic routine in the package takes an explicit 64-bit seed and
builds its generator through these helpers, so results are reproducible and
independent of execution order.
"""

import numpy as np

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One splitmix64 scrambling round (full 64-bit avalanche)."""
    x = (x + _GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Derive an independent child seed from (seed, index).

    The scrambling keeps child seeds far apart even for adjacent indices, so
    substreams keyed off them never collide with the parent's own xor-indexed
    permutation streams.
    """
    return splitmix64((seed & MASK64) ^ splitmix64(index & MASK64))


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator for substream `index` of `seed`.

    Philox is keyed with seed xor index: distinct keys give statistically
    independent streams, so replicate-level work can run in any order.
    """
    return np.random.Generator(np.random.Philox(key=(seed ^ index) & MASK64))
