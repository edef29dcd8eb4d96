"""Relevant-coordinate verifiers.

Each verifier returns an :class:`RcCertificate`: a small set ``V`` of
coordinates with one witness per coordinate.  Witnesses are always checked
against the oracle before they are emitted, so
``f(w) != f(w ⊕ e_j)`` holds for every ``(j, w)`` in every certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bits import (
    UsageError,
    as_word,
    batch_splice,
    flip,
    full_mask,
    mask_to_coords,
    setbit,
    sorted_coords,
    to_hex,
)
from .functions import ExplicitFunction
from .oracle import QueryOracle
from .rng import make_rng, random_point, random_points
from .sampling import BatchSampler, estimate

DEFAULT_ETA = 1 / 20
TRIAL_CHUNK = 4096
# Algorithm-2 accuracy constant: learn at eps/(c k), drop below 5 eps/(c k).
APPROX_C = 10


class ContractError(UsageError):
    """A procedure was called with its precondition violated."""


@dataclass
class RcCertificate:
    n: int
    k: int
    V: list[int] = field(default_factory=list)
    witnesses: dict[int, int] = field(default_factory=dict)
    overflow: bool = False
    flagged: bool = False

    @property
    def mask(self) -> int:
        m = 0
        for j in self.V:
            m |= 1 << (j - 1)
        return m

    @property
    def coords(self) -> frozenset[int]:
        return frozenset(self.V)

    def add(self, j: int, w: int) -> None:
        if j in self.witnesses:
            raise ContractError(f"coordinate {j} already certified")
        self.V.append(j)
        self.witnesses[j] = w
        if len(self.V) > self.k:
            self.overflow = True

    def dumps(self) -> str:
        parts = [
            "V=" + ",".join(str(j) for j in sorted(self.V)),
            f"overflow={'true' if self.overflow else 'false'}",
        ]
        parts += [f"w{j}={to_hex(self.witnesses[j], self.n)}" for j in sorted(self.V)]
        return "; ".join(parts)

    @classmethod
    def loads(cls, text: str, n: int, k: int) -> "RcCertificate":
        fields = [p.strip() for p in text.split(";")]
        vs = fields[0].partition("=")[2]
        cert = cls(n=n, k=k)
        cert.overflow = fields[1].partition("=")[2] == "true"
        wit = {}
        for p in fields[2:]:
            key, _, val = p.partition("=")
            wit[int(key[1:])] = int(val, 16)
        for j in (int(v) for v in vs.split(",") if v):
            cert.V.append(j)
            cert.witnesses[j] = wit[j]
        return cert


def check_witness(f: QueryOracle, j: int, w: int) -> bool:
    return f(w) != f(flip(w, j))


# --- binary search ------------------------------------------------------------


def _split(coords: list[int]) -> tuple[list[int], list[int]]:
    h = (len(coords) + 1) // 2
    return coords[:h], coords[h:]


def _search(f: QueryOracle, p: int, fp: int, q: int, D: list[int]) -> tuple[int, int]:
    """Invariant: ``f(p) != f(q)`` and ``p``, ``q`` agree outside ``D``."""
    while len(D) > 1:
        W1, W2 = _split(D)
        w2 = 0
        for c in W2:
            w2 |= 1 << (c - 1)
        mid = (p & ~w2) | (q & w2)
        fm = f(mid)
        if fm != fp:
            q, D = mid, W2
        else:
            p, fp, D = mid, fm, W1
    return D[0], p


def binary_search_witness(f: QueryOracle, a: int, b: int, V) -> tuple[int, int]:
    """Find ``j ∉ V`` and a witness ``w`` with ``f(w) != f(w ⊕ e_j)``.

    Requires ``f(a_V ∘ b_{V̄}) != f(a)``.  Splits the live coordinates into a
    lower half (taking the extra element on odd sizes) and an upper half, and
    spends one query per level after the two initial ones.
    """
    vmask = V if isinstance(V, int) else sum(1 << (i - 1) for i in V)
    D = sorted_coords(full_mask(f.n) & ~vmask)
    if not D:
        raise ContractError("complement of V is empty")
    c = (a & vmask) | (b & ~vmask & full_mask(f.n))
    fa, fc = f(a), f(c)
    if fa == fc:
        raise ContractError("binary search needs f(a_V ∘ b_V̄) != f(a)")
    return _search(f, a, fa, c, D)


# --- sampling verifier ------------------------------------------------------------


def junta_trials(k: int, eps: float, eta: float = DEFAULT_ETA) -> int:
    if not 0 < eps < 1:
        raise UsageError("eps must lie in (0, 1)")
    return math.ceil((4 * k + 6 * math.log(1 / eta)) / eps)


def mu_trials(k: int, mu: float, eta: float = DEFAULT_ETA) -> int:
    if not 0 < mu <= 1:
        raise UsageError("mu must lie in (0, 1]")
    return math.ceil((4 * k + 6 * math.log(1 / eta)) * 2 / mu)


def sterm_cap(s: int, eps: float) -> int:
    if s < 1:
        raise UsageError("s must be at least 1")
    return s * math.ceil(5 * math.log2(s / eps))


def _interleave(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    out = np.empty(2 * len(first), dtype=first.dtype)
    out[0::2] = first
    out[1::2] = second
    return out


def _sampling_verify(f: QueryOracle, k: int, trials: int, rng) -> RcCertificate:
    """Draw ``a, b``; whenever ``f(a_V ∘ b_{V̄}) != f(a)``, binary-search a new coordinate."""
    n = f.n
    cert = RcCertificate(n=n, k=k)
    done = 0
    while done < trials and not cert.overflow and cert.mask != full_mask(n):
        size = min(trials - done, TRIAL_CHUNK)
        a = random_points(rng, n, size)
        b = random_points(rng, n, size)
        c = batch_splice(a, b, cert.mask, n)
        fc = f.peek_many(c)
        fa = f.peek_many(a)
        hits = np.flatnonzero(fc != fa)
        used = size if len(hits) == 0 else int(hits[0]) + 1
        f.charge(_interleave(c[:used], a[:used]), _interleave(fc[:used], fa[:used]))
        done += used
        if len(hits):
            i = int(hits[0])
            D = sorted_coords(full_mask(n) & ~cert.mask)
            j, w = _search(f, int(a[i]), int(fa[i]), int(c[i]), D)
            cert.add(j, w)
    return cert


def rc_verify_junta(f: QueryOracle, n: int, k: int, eps: float, trials: int | None = None,
                    eta: float = DEFAULT_ETA, rng=None) -> RcCertificate:
    """Sampling verifier for k-juntas: ``ceil((4k + 6 ln(1/eta)) / eps)`` trials by default.

    Stops as soon as more than ``k`` coordinates are certified; the
    certificate then carries ``overflow=True``.
    """
    if f.n != n:
        raise UsageError("arity mismatch")
    if k < 0:
        raise UsageError("k must be non-negative")
    T = junta_trials(k, eps, eta) if trials is None else trials
    return _sampling_verify(f, k, T, make_rng(rng))


def rc_verify_mu(f: QueryOracle, n: int, k: int, mu: float, eta: float = DEFAULT_ETA, rng=None) -> RcCertificate:
    """Sampling verifier with ``ceil((4k + 6 ln(1/eta)) * 2 / mu)`` trials (no ``eps`` dependence)."""
    if f.n != n:
        raise UsageError("arity mismatch")
    return _sampling_verify(f, k, mu_trials(k, mu, eta), make_rng(rng))


def rc_verify_sterm(f: QueryOracle, n: int, s: int, eps: float, eta: float = DEFAULT_ETA, rng=None) -> RcCertificate:
    """Verifier for s-term functions: junta verifier at ``eps/3`` with cap ``s * ceil(5 log2(s/eps))``."""
    cap = sterm_cap(s, eps)
    return rc_verify_junta(f, n, cap, eps / 3, eta=eta, rng=rng)


# --- learner-based verifiers ------------------------------------------------------------


@dataclass
class ExactLearner:
    """``learn(oracle)`` returns an explicit hypothesis over the oracle's arity."""

    learn: Callable[[QueryOracle], ExplicitFunction]
    query_budget: int | None = None
    name: str = "exact"

    def __call__(self, f: QueryOracle) -> ExplicitFunction:
        return self.learn(f)


@dataclass
class ApproxLearner:
    """``learn(oracle, n, eps, delta, rng)`` returns a k-junta hypothesis ``eps``-close w.p. ``1 - delta``."""

    learn: Callable[..., ExplicitFunction]
    query_budget: int | None = None
    name: str = "approx"

    def __call__(self, f, n, eps, delta, rng=None) -> ExplicitFunction:
        return self.learn(f, n, eps, delta, rng)

    @classmethod
    def from_exact(cls, exact: ExactLearner) -> "ApproxLearner":
        return cls(lambda f, n, eps, delta, rng=None: exact(f), exact.query_budget, exact.name)


def hypothesis_value(h, x: int):
    value = getattr(h, "value", None)
    return value(x) if value is not None else h(x)


def _subcube_witness(h, j: int, R: list[int], base: int):
    """First point of the subcube over ``R`` (rest fixed to ``base``) where ``h`` depends on ``j``."""
    others = [c for c in R if c != j]
    if len(others) > 20:
        raise UsageError("subcube search limited to 20 free coordinates")
    for idx in range(1 << len(others)):
        x = base
        for b, c in enumerate(others):
            x = setbit(x, c, (idx >> b) & 1)
        x0 = setbit(x, j, 0)
        if hypothesis_value(h, x0) != hypothesis_value(h, setbit(x, j, 1)):
            return x0
    return None


def rc_verify_from_exact_learner(f: QueryOracle, learner: ExactLearner, n: int, k: int | None = None,
                                 rng=None) -> RcCertificate:
    """Learn ``h``; certify ``h``'s variables with witnesses found by subcube search on ``h``.

    Coordinates outside ``h``'s relevant set are pinned to one sampled point.
    Each witness is re-checked on ``f`` (two queries); a failing check drops
    the coordinate and flags the certificate, since it proves ``h != f``.
    """
    rng = make_rng(rng)
    h = learner(f)
    R = sorted_coords(h.support_mask())
    cert = RcCertificate(n=n, k=len(R) if k is None else k)
    base = random_point(rng, n)
    for j in R:
        w = _subcube_witness(h, j, R, base)
        if w is None:
            continue
        if check_witness(f, j, w):
            cert.add(j, w)
        else:
            cert.flagged = True
    return cert


def rc_verify_from_approx_learner(f: QueryOracle, learner: ApproxLearner, n: int, k: int, eps: float,
                                  delta: float, rng=None, c: int = APPROX_C) -> RcCertificate:
    """Reduction to learning from k-Junta.

    Learns ``g`` at accuracy ``eps/(ck)``; for each variable ``j`` of ``g``
    estimates ``Pr[g_{j←0} != g_{j←1}]`` to additive ``eps/(ck)`` with
    confidence ``1 - delta/(4k)``, drops ``j`` when the estimate is at most
    ``5 eps/(ck)``, and otherwise samples up to ``(ck/eps) ln(4k/delta)``
    points ``a``, spending two queries on ``f`` at each ``a`` where ``g``'s
    restrictions disagree, until ``f``'s restrictions disagree too.  A
    surviving ``j`` without a witness is dropped and the certificate flagged.
    """
    rng = make_rng(rng)
    ck = c * max(k, 1)
    g = learner(f, n, eps / ck, delta / 2, rng)
    U = sorted_coords(g.support_mask())
    cert = RcCertificate(n=n, k=k)
    err = eps / ck
    rounds = math.ceil((ck / eps) * math.log(4 * max(k, 1) / delta))
    for j in U:
        bit = as_word(1 << (j - 1), n)
        clear = as_word(full_mask(n) & ~(1 << (j - 1)), n)

        def g_differs(m, bit=bit, clear=clear):
            xs = random_points(rng, n, m)
            return g.evaluate_many(xs & clear) != g.evaluate_many((xs & clear) | bit)

        est = estimate(BatchSampler(g_differs), err, delta / (4 * max(k, 1)))
        if est <= 5 * err:
            continue
        xs = random_points(rng, n, rounds)
        lo, hi = xs & clear, (xs & clear) | bit
        cand = np.flatnonzero(g.evaluate_many(lo) != g.evaluate_many(hi))
        if len(cand) == 0:
            cert.flagged = True
            continue
        f_lo, f_hi = f.peek_many(lo[cand]), f.peek_many(hi[cand])
        found = np.flatnonzero(f_lo != f_hi)
        used = len(cand) if len(found) == 0 else int(found[0]) + 1
        f.charge(_interleave(lo[cand][:used], hi[cand][:used]), _interleave(f_lo[:used], f_hi[:used]))
        if len(found) == 0:
            cert.flagged = True
            continue
        cert.add(j, int(xs[cand[found[0]]]))
    return cert


def witnesses_valid(f: QueryOracle, cert: RcCertificate) -> bool:
    return all(check_witness(f, j, w) for j, w in cert.witnesses.items())


def coordset(mask: int) -> frozenset[int]:
    return mask_to_coords(mask)
