"""Seeding for reproducible replicates.

Every simulation draws from NumPy's ``PCG64`` bit generator (a 128-bit state,
64-bit output permuted congruential generator).  Replicate ``r`` of a run
with base seed ``s`` is seeded with ``s XOR splitmix64(r)``, which keeps
replicate streams independent and makes any single replicate reproducible
without running the others.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One output of the SplitMix64 generator whose state is ``x``."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def replicate_seed(base_seed: int, replicate: int) -> int:
    return (int(base_seed) & _MASK64) ^ splitmix64(int(replicate))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
