"""Deterministic seed derivation for replicated experiments.

Every run of every algorithm draws its randomness from a 64-bit seed
derived with :func:`mix_seed`, so reruns are bit-identical and distinct
(algorithm, run, stream) combinations get independent streams.

The mixing function is fixed and documented here bit-exactly:

``splitmix64(z)`` with the standard constants::

    z = (z + 0x9E3779B97F4A7C15) mod 2**64
    z = ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    return z XOR (z >> 31)

``mix_seed(p0, p1, ..., pn)`` folds the parts left to right::

    acc = 0
    for p in (p0, ..., pn):
        acc = splitmix64((acc XOR p) mod 2**64)
    return acc
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Stream tags: keep distinct randomness sources decoupled so that, e.g.,
# reward draws are shared across algorithms (common random numbers).
STREAM_ALGORITHM = 1
STREAM_ENV = 2
STREAM_ARRIVALS = 3
STREAM_SERVICE = 4


def splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def mix_seed(*parts: int) -> int:
    """Fold integer parts into one 64-bit seed (order-sensitive)."""
    acc = 0
    for p in parts:
        if p < 0:
            raise ValueError("seed parts must be non-negative integers")
        acc = splitmix64((acc ^ p) & MASK64)
    return acc


def rng_from(*parts: int) -> np.random.Generator:
    """Build a PCG64 generator from mixed seed parts."""
    return np.random.default_rng(mix_seed(*parts))
