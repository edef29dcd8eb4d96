"""Majority-vote self-correction through a corrupted literal oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bits import UsageError, as_word
from .oracle import QueryOracle
from .rng import make_rng, random_points

MAX_VOTES = 10_001


def majority_error(t: int, p: float) -> float:
    """``Pr[Bin(t, p) >= (t+1)/2]``: the chance a majority of ``t`` votes is wrong."""
    need = (t + 1) // 2
    return math.fsum(math.comb(t, i) * p**i * (1 - p) ** (t - i) for i in range(need, t + 1))


def vote_count(alpha: float, delta: float) -> int:
    """Smallest odd ``t`` whose majority error at per-vote error ``2 alpha`` is at most ``delta``."""
    p = 2 * alpha
    t = 1
    while majority_error(t, p) > delta:
        t += 2
        if t > MAX_VOTES:
            raise UsageError("vote count exceeds limit; alpha too close to 1/4")
    return t


@dataclass(frozen=True)
class CorrectionParams:
    alpha: float
    delta: float
    t: int = field(init=False)

    def __post_init__(self):
        if not 0 <= self.alpha < 0.25:
            raise UsageError("self-correction needs alpha < 1/4")
        if not 0 < self.delta < 1:
            raise UsageError("delta must lie in (0, 1)")
        object.__setattr__(self, "t", vote_count(self.alpha, self.delta))

    @property
    def queries(self) -> int:
        return 2 * self.t


def self_correct(G: QueryOracle, a: int, params: CorrectionParams, rng=None) -> int:
    """Majority over ``t`` uniform ``u`` of ``G(u) ⊕ G(u ⊕ a)``; spends ``2t`` queries.

    Exact when ``G`` is a literal; correct with probability ``1 - delta``
    when ``G`` is ``alpha``-close to a literal.
    """
    rng = make_rng(rng)
    us = random_points(rng, G.n, params.t)
    pts = np.empty(2 * params.t, dtype=us.dtype)
    pts[0::2] = us
    pts[1::2] = us ^ as_word(a, G.n)
    ans = G.query_many(pts)
    votes = ans[0::2] ^ ans[1::2]
    return int(2 * int(votes.sum()) > params.t)
