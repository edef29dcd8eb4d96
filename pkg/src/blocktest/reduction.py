"""The random zero-one projection ``R_p`` and the reduced-tester wrapper."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .bits import UsageError
from .functions import Term
from .oracle import ProjectionOracle, QueryOracle, stage
from .rc_verifier import DEFAULT_ETA
from .rng import make_rng, random_points
from .sampling import BatchSampler, distinguish
from .verdict import REDUCTION, Verdict

KEEP, FIX0, FIX1 = 0, 1, 2
_CODES = "KLH"  # keep, fix low, fix high


@dataclass(frozen=True)
class ReductionMap:
    """Per-coordinate action table: keep w.p. ``1-p``, fix to 0 or to 1 w.p. ``p/2`` each."""

    n: int
    p: float
    seed: int | None
    actions: np.ndarray

    @property
    def keep(self) -> int:
        return _mask(self.actions, KEEP)

    @property
    def ones(self) -> int:
        return _mask(self.actions, FIX1)

    @property
    def zeros(self) -> int:
        return _mask(self.actions, FIX0)

    @property
    def kept(self) -> int:
        return int(np.sum(self.actions == KEEP))

    def __call__(self, x: int) -> int:
        return (x & self.keep) | self.ones

    def dumps(self) -> str:
        """Run-length encoding as ``<count><K|L|H>`` runs (keep, fix to 0, fix to 1), e.g. ``3K1H1L1K``."""
        out = []
        i = 0
        a = self.actions
        while i < len(a):
            j = i
            while j < len(a) and a[j] == a[i]:
                j += 1
            out.append(f"{j - i}{_CODES[a[i]]}")
            i = j
        return "".join(out)

    @classmethod
    def loads(cls, text: str, p: float = float("nan"), seed: int | None = None) -> "ReductionMap":
        acts = []
        for count, code in re.findall(r"(\d+)([KLH])", text):
            acts += [_CODES.index(code)] * int(count)
        return cls(len(acts), p, seed, np.array(acts, dtype=np.uint8))


def _mask(actions: np.ndarray, code: int) -> int:
    m = 0
    for i in np.flatnonzero(actions == code):
        m |= 1 << int(i)
    return m


def make_rp(n: int, p: float, seed=None) -> ReductionMap:
    if not 0 <= p <= 1:
        raise UsageError("p must lie in [0, 1]")
    rng = make_rng(seed)
    u = rng.random(n)
    acts = np.where(u >= p, KEEP, np.where(u < p / 2, FIX0, FIX1)).astype(np.uint8)
    return ReductionMap(n, p, seed if isinstance(seed, int) else None, acts)


def apply_rp(rmap: ReductionMap, f: QueryOracle) -> ProjectionOracle:
    """``x ↦ f(R_p(x))``; one query to ``f`` per query."""
    if rmap.n != f.n:
        raise UsageError("arity mismatch")
    return ProjectionOracle(f, rmap.keep, rmap.ones)


def reduction_p(s: int, eps: float, eta: float = DEFAULT_ETA) -> float:
    """``min(1, eta / (s log2(s/eps)))``."""
    if s < 1 or not 0 < eps < 1:
        raise UsageError("need s >= 1 and 0 < eps < 1")
    return min(1.0, eta / (s * math.log2(s / eps)))


def vanishing_size(s: int, eps: float, eta: float = DEFAULT_ETA) -> float:
    """Term size from which every term of an s-term function is killed with probability ``1 - eta``."""
    return (2 * s / eta) * math.log2(s / eps) * math.log(s / eta)


def term_vanishes(rmap: ReductionMap, term: Term) -> bool:
    """True iff some literal of ``term`` is fixed to its falsifying value."""
    return bool((term.pos & rmap.zeros) or (term.neg & rmap.ones))


def large_terms_vanish(rmap: ReductionMap, terms: Iterable[Term], min_size: float) -> bool:
    return all(term_vanishes(rmap, t) for t in terms if t.size >= min_size)


def reduced_tester(f: QueryOracle, eps: float, inner: Callable[[QueryOracle, float, np.random.Generator], Verdict],
                   s: int | None = None, p: float | None = None,
                   reduction: Callable[[QueryOracle, np.random.Generator], QueryOracle] | None = None,
                   eta: float = DEFAULT_ETA, rng=None) -> Verdict:
    """Test through a variable reduction ``f̂``.

    Builds ``f̂`` (by default ``R_p`` with ``p = reduction_p(s, eps/4)``),
    rejects if Distinguish at ``(eps/4, eps/2)`` finds ``Pr[f̂ != f]`` large,
    otherwise returns ``inner(f̂, eps/2)``.  A custom ``reduction`` may spend
    any number of ``f`` queries per ``f̂`` query.
    """
    rng = make_rng(rng)
    start = f.queries_used
    if reduction is None:
        if p is None:
            if s is None:
                raise UsageError("need s, p, or a custom reduction")
            p = reduction_p(s, eps / 4, eta)
        rmap = make_rp(f.n, p, rng)
        fh = apply_rp(rmap, f)
    else:
        fh = reduction(f, rng)
    n = f.n

    def differs(m: int) -> np.ndarray:
        xs = random_points(rng, n, m)
        a = fh.query_many(xs)
        b = f.query_many(xs)
        return (a != b).astype(np.uint8)

    with stage(f, REDUCTION):
        far = distinguish(BatchSampler(differs, cost=2), eps / 4, eps / 2, eta)
    if far:
        return Verdict.reject(f.queries_used - start, REDUCTION)
    v = inner(fh, eps / 2, rng)
    v.queries_used = f.queries_used - start
    return v


def full_keep(n: int) -> ReductionMap:
    return ReductionMap(n, 0.0, None, np.zeros(n, dtype=np.uint8))

