"""Counter-based splittable randomness.

Philox4x64 (numpy) keyed by a 64-bit mix of (seed, replica).  The mixing
function is the finalizer of splitmix64, a fixed bijection on 64-bit
words, so distinct (seed, replica) pairs land on distinct Philox keys
and each replica is its own independent counter-based stream.

A frozen test vector lives in tests/test_rng.py; changing anything in
this file is a format break.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """splitmix64 finalizer; bijective on 64-bit words."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return (x ^ (x >> 31)) & MASK64


def stream_key(seed: int, replica: int = 0) -> int:
    """64-bit Philox key for a (seed, replica) pair."""
    return mix64(mix64(seed & MASK64) ^ mix64((replica + 0x9E3779B97F4A7C15) & MASK64))


def generator(seed: int, replica: int = 0) -> np.random.Generator:
    """Independent counter-based stream for one replica."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, replica)))
