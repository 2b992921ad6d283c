"""Deterministic seed derivation and counter-based random bits.

Every random stream in the package is keyed by a tuple of integers
(base seed, purpose, node, hop, ...) so results never depend on call order
or on how work is scheduled.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# purpose tags mixed into derived seeds
ENCODER = 1
SAMPLING = 2
TIES = 3
NEGATIVES = 4
SPLITS = 5


def splitmix64(x: np.ndarray) -> np.ndarray:
    """Vectorized SplitMix64 finalizer over a uint64 array."""
    z = np.asarray(x, dtype=np.uint64) + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def derive_seed(*keys: int) -> int:
    """Hash an ordered tuple of nonnegative integers into a 64-bit seed."""
    if not keys:
        raise ValueError("derive_seed needs at least one key")
    words = [int(k) & _MASK64 for k in keys]
    state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint64)
    return int(state[0])


def rng(*keys: int) -> np.random.Generator:
    """A PCG64 generator keyed by ``keys``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) & _MASK64 for k in keys])))


def keyed_bits(seed: int, contexts, positions) -> np.ndarray:
    """Pseudorandom bits for (seed, context, position) triples.

    ``contexts`` and ``positions`` broadcast against each other. The result
    is a uint8 array of 0/1 values; the same triple always gives the same bit.
    """
    with np.errstate(over="ignore"):
        base = splitmix64(np.uint64(int(seed) & _MASK64))
        ctx = splitmix64(base ^ splitmix64(np.asarray(contexts, dtype=np.uint64)))
        h = splitmix64(ctx + np.asarray(positions, dtype=np.uint64) * _GOLDEN)
    return (h >> np.uint64(63)).astype(np.uint8)
