"""
Per-sample random streams
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, image_index: int, repetition: int) -> int:
    """splitmix64 chained over (seed, image index, repetition)"""
    h = splitmix64(seed & MASK64)
    h = splitmix64(h ^ (image_index & MASK64))
    return splitmix64(h ^ (repetition & MASK64))


def sample_rng(seed: int, image_index: int, repetition: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, image_index, repetition))
