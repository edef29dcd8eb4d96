"""Statistical primitives: threshold tests with explicit sample sizes, and span sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bits import UsageError, batch_dtype, to_batch

# Distinguish draws ceil(DISTINGUISH_C * ln(1/fail) / (hi - lo)) samples.
DISTINGUISH_C = 48


def chernoff_sample_size(lam: float, mu_rate: float, fail: float) -> int:
    """Smallest ``m`` with ``exp(-lam^2 * m * mu_rate / 3) <= fail``."""
    if not 0 < lam <= 1:
        raise UsageError("relative deviation must lie in (0, 1]")
    if not 0 < mu_rate <= 1:
        raise UsageError("rate must lie in (0, 1]")
    if not 0 < fail <= 1:
        raise UsageError("failure probability must lie in (0, 1]")
    if fail == 1:
        return 0
    x = 3 * math.log(1 / fail) / (lam * lam * mu_rate)
    m = math.ceil(x)
    # guard against ln/exp rounding pushing an exact integer one step up
    if m > 0 and math.exp(-lam * lam * (m - 1) * mu_rate / 3) <= fail * (1 + 1e-12):
        m -= 1
    return m


class EventSampler:
    """Bernoulli samples of an event ``A(x)``, ``x`` drawn from its distribution.

    ``cost`` is the number of oracle queries one draw spends.
    """

    cost: int = 0

    def draw(self) -> int:
        return int(self.draw_many(1)[0])

    def draw_many(self, m: int) -> np.ndarray:
        return np.fromiter((self.draw() for _ in range(m)), dtype=np.uint8, count=m)


class BernoulliSampler(EventSampler):
    def __init__(self, p: float, rng: np.random.Generator):
        self.p = p
        self.rng = rng

    def draw_many(self, m: int) -> np.ndarray:
        return (self.rng.random(m) < self.p).astype(np.uint8)


class CallableSampler(EventSampler):
    def __init__(self, fn: Callable[[], int], cost: int = 0):
        self.fn = fn
        self.cost = cost

    def draw(self) -> int:
        return int(self.fn()) & 1

    def draw_many(self, m: int) -> np.ndarray:
        return np.fromiter((self.draw() for _ in range(m)), dtype=np.uint8, count=m)


class BatchSampler(EventSampler):
    """Wraps a vectorized ``m -> uint8[m]`` event function."""

    def __init__(self, fn: Callable[[int], np.ndarray], cost: int = 0):
        self.fn = fn
        self.cost = cost

    def draw_many(self, m: int) -> np.ndarray:
        return np.asarray(self.fn(m), dtype=np.uint8)


def distinguish_samples(lo: float, hi: float, fail: float) -> int:
    if not 0 <= lo < hi <= 1:
        raise UsageError("need 0 <= lo < hi <= 1")
    if not 0 < fail < 1:
        raise UsageError("failure probability must lie in (0, 1)")
    return math.ceil(DISTINGUISH_C * math.log(1 / fail) / (hi - lo))


def distinguish(sampler: EventSampler, lo: float, hi: float, fail: float) -> int:
    """1 if the event rate looks above ``hi``, 0 if below ``lo``.

    The threshold sits at the gap midpoint; a tie returns 0.  The error bound
    ``fail`` holds whenever the gap is a constant fraction of ``hi`` (every
    caller in this package uses ``hi - lo >= hi / 2``); inside ``(lo, hi)``
    either answer may come back.
    """
    m = distinguish_samples(lo, hi, fail)
    hits = int(np.sum(sampler.draw_many(m), dtype=np.int64))
    # hits/m > (lo+hi)/2, in integers to keep ties exact
    return int(2 * hits > m * (lo + hi))


def estimate_samples(additive_err: float, fail: float) -> int:
    if additive_err <= 0:
        raise UsageError("additive error must be positive")
    if not 0 < fail < 1:
        raise UsageError("failure probability must lie in (0, 1)")
    return math.ceil(math.log(2 / fail) / (2 * additive_err * additive_err))


def estimate(sampler: EventSampler, additive_err: float, fail: float) -> float:
    """Empirical mean with Hoeffding sample size ``ln(2/fail) / (2 err^2)``."""
    m = estimate_samples(additive_err, fail)
    return float(np.mean(sampler.draw_many(m)))


@dataclass
class SpanFamily:
    t: int
    basis: list[int]
    points: list[int] = field(repr=False)


def span_points(basis: Sequence[int]) -> SpanFamily:
    """All ``2^t - 1`` nonzero XOR combinations; entry ``λ - 1`` uses ``v^(i+1)`` iff bit ``i`` of ``λ``."""
    t = len(basis)
    if t == 0:
        raise UsageError("span needs at least one basis vector")
    pts = [0]
    for v in basis:
        pts = pts + [p ^ int(v) for p in pts]
    return SpanFamily(t, [int(v) for v in basis], pts[1:])


def span_batch(basis: np.ndarray, n: int) -> np.ndarray:
    """Vectorized span: returns the ``2^t - 1`` nonzero combinations in λ order."""
    t = len(basis)
    if t == 0:
        raise UsageError("span needs at least one basis vector")
    pts = np.zeros(1 << t, dtype=batch_dtype(n))
    size = 1
    for v in basis:
        pts[size : 2 * size] = pts[:size] ^ v
        size *= 2
    return pts[1:]


def span_of_ints(basis: Sequence[int], n: int) -> np.ndarray:
    return span_batch(to_batch(basis, n), n)
