"""Seeded counter-based randomness.

Every random choice in the package flows through a ``numpy.random.Generator``
backed by Philox, so a master seed replays every transcript bit for bit.
"""

from __future__ import annotations

import numpy as np

from .bits import WORD_BITS, full_mask


def make_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def trial_seeds(master_seed: int, count: int) -> list[np.random.SeedSequence]:
    """Independent per-trial seed sequences derived from one master seed."""
    return np.random.SeedSequence(master_seed).spawn(count)


def child_rng(rng: np.random.Generator) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(rng.bit_generator.seed_seq.spawn(1)[0]))


def _words(rng: np.random.Generator, count: int) -> np.ndarray:
    return rng.bit_generator.random_raw(count).astype(np.uint64)


def random_point(rng: np.random.Generator, n: int) -> int:
    """Uniform assignment in {0,1}^n."""
    if n == 0:
        return 0
    nw = (n + WORD_BITS - 1) // WORD_BITS
    x = 0
    for w in _words(rng, nw):
        x = (x << WORD_BITS) | int(w)
    return x & full_mask(n)


def random_points(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    """``count`` uniform assignments as a batch (see :mod:`blocktest.bits`)."""
    if n <= WORD_BITS:
        if count == 0 or n == 0:
            return np.zeros(count, dtype=np.uint64)
        w = _words(rng, count)
        if n < WORD_BITS:
            w &= np.uint64(full_mask(n))
        return w
    return np.array([random_point(rng, n) for _ in range(count)], dtype=object)


def uniforms(rng: np.random.Generator, count: int) -> np.ndarray:
    return rng.random(count)
