"""Relevant-blocks verifier over a random partition of the coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bits import UsageError, as_word, blow_up, full_mask, sorted_coords, to_hex
from .oracle import BlowUpOracle, QueryOracle, SpliceOracle, stage
from .rc_verifier import (
    DEFAULT_ETA,
    ExactLearner,
    RcCertificate,
    rc_verify_from_exact_learner,
    rc_verify_junta,
    rc_verify_mu,
    sterm_cap,
)
from .rng import make_rng, random_point, random_points
from .sampling import BatchSampler, distinguish
from .verdict import DISTINGUISH, LITERAL, VERIFIER

# test_literal: rounds = ceil(LITERAL_C * ln(3 / fail) / alpha), 8 queries per round
LITERAL_C = 8
LITERAL_ROUND_QUERIES = 8


@dataclass
class BlockPartition:
    """Partition of [n] into ``m`` labelled blocks; ``labels[i-1]`` is coordinate ``i``'s block."""

    n: int
    m: int
    labels: np.ndarray

    @classmethod
    def random(cls, n: int, m: int, rng=None) -> "BlockPartition":
        if m < 1:
            raise UsageError("need at least one block")
        rng = make_rng(rng)
        return cls(n, m, rng.integers(0, m, size=n))

    @property
    def blocks(self) -> list[int]:
        """All ``m`` block masks (most are empty when ``m > n``)."""
        out = [0] * self.m
        for i, lab in enumerate(self.labels, start=1):
            out[int(lab)] |= 1 << (i - 1)
        return out

    @property
    def nonempty(self) -> list[int]:
        """Masks of the nonempty blocks in label order."""
        out: dict[int, int] = {}
        for i, lab in enumerate(self.labels, start=1):
            out[int(lab)] = out.get(int(lab), 0) | (1 << (i - 1))
        return [out[k] for k in sorted(out)]


def collapse_oracle(f: QueryOracle, partition: BlockPartition, nonempty_only: bool = True) -> BlowUpOracle:
    """``y ↦ f(y_1^{Y_1} ∘ ... ∘ y_m^{Y_m})``.

    By default the collapsed oracle ranges over the nonempty blocks only;
    empty blocks are variables the collapsed function ignores, so dropping
    them changes nothing but the arity.
    """
    if partition.n != f.n:
        raise UsageError("partition arity mismatch")
    blocks = partition.nonempty if nonempty_only else partition.blocks
    return BlowUpOracle(f, blocks)


@dataclass
class BlockCertificate:
    n: int
    blocks: list[int] = field(default_factory=list)
    anchors: list[int] = field(default_factory=list)
    u: int = 0

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def union(self) -> int:
        m = 0
        for b in self.blocks:
            m |= b
        return m

    def anchored(self, f: QueryOracle, j: int) -> SpliceOracle:
        """``x ↦ f(a^{(j)}_{[n]∖X_j} ∘ x_{X_j})`` (``j`` is 0-based)."""
        return SpliceOracle(f, self.blocks[j], self.anchors[j])

    def dumps(self) -> str:
        parts = [f"k'={self.k}"]
        parts += [f"X{j}=" + ",".join(map(str, sorted_coords(b))) for j, b in enumerate(self.blocks, start=1)]
        parts += [f"a{j}={to_hex(a, self.n)}" for j, a in enumerate(self.anchors, start=1)]
        parts.append(f"u={to_hex(self.u, self.n)}")
        return "; ".join(parts)

    @classmethod
    def loads(cls, text: str, n: int) -> "BlockCertificate":
        fields = dict(p.strip().split("=", 1) for p in text.split(";"))
        k = int(fields["k'"])
        blocks = []
        for j in range(1, k + 1):
            coords = [int(c) for c in fields[f"X{j}"].split(",") if c]
            blocks.append(sum(1 << (c - 1) for c in coords))
        anchors = [int(fields[f"a{j}"], 16) for j in range(1, k + 1)]
        return cls(n, blocks, anchors, int(fields["u"], 16))


@dataclass
class RbResult:
    certificate: BlockCertificate | None
    reject_stage: str | None = None
    rc: RcCertificate | None = None

    @property
    def accepted(self) -> bool:
        return self.certificate is not None


# --- literal test ----------------------------------------------------------------


def literal_rounds(alpha: float, fail: float) -> int:
    return math.ceil(LITERAL_C * math.log(3 / fail) / alpha)


def test_literal(G: QueryOracle, alpha: float, fail: float, rng=None) -> bool:
    """One-sided test for the class of literals ``{x_i, ¬x_i}``.

    With ``σ = G(0)`` and ``H = G ⊕ σ``, each round checks
    ``H(x⊕y) = H(x)⊕H(y)``, ``H(x∧y) = H(x)∧H(y)`` and ``H(x)⊕H(¬x) = 1``
    on fresh points.  Literals pass every round; the first failing round
    ends the test.  Returns True on accept.
    """
    if not 0 < alpha < 0.5:
        raise UsageError("alpha must lie in (0, 1/2)")
    if not 0 < fail < 1:
        raise UsageError("failure probability must lie in (0, 1)")
    rng = make_rng(rng)
    n = G.n
    sigma = G(0)
    r = literal_rounds(alpha, fail)
    full = as_word(full_mask(n), n)
    pts = random_points(rng, n, 5 * r).reshape(r, 5)
    x, y, x2, y2, z = (pts[:, i] for i in range(5))
    order = np.stack([x, y, x ^ y, x2, y2, x2 & y2, z, z ^ full], axis=1).reshape(-1)
    ans = G.peek_many(order).reshape(r, LITERAL_ROUND_QUERIES) ^ sigma
    blr = ans[:, 2] == (ans[:, 0] ^ ans[:, 1])
    conj = ans[:, 5] == (ans[:, 3] & ans[:, 4])
    anti = (ans[:, 6] ^ ans[:, 7]) == 1
    bad = np.flatnonzero(~(blr & conj & anti))
    used = r if len(bad) == 0 else int(bad[0]) + 1
    k = used * LITERAL_ROUND_QUERIES
    G.charge(order[:k], (ans.reshape(-1) ^ sigma)[:k])
    return len(bad) == 0


test_literal.__test__ = False  # not a pytest test despite the name


# --- presets -------------------------------------------------------------------------

RcHandle = Callable[[QueryOracle, float, np.random.Generator], RcCertificate]


@dataclass
class RbPreset:
    """Parameters for :func:`rb_verify`: ``K`` sizes the partition, ``k`` caps the certificate.

    ``rc(F, eps, rng)`` runs the chosen RC verifier on the collapsed oracle ``F``.
    """

    name: str
    K: int
    k: int
    rc: RcHandle
    info: dict = field(default_factory=dict)


PRESETS = ("exact-learner", "junta-generic", "junta-mu", "sterm")


def rb_presets(class_id: str, *, k: int | None = None, s: int | None = None, eps: float | None = None,
               mu: float | None = None, learner: ExactLearner | None = None, K: int | None = None,
               eta: float = DEFAULT_ETA) -> RbPreset:
    """Parameter bundle for one of ``exact-learner``, ``junta-generic``, ``junta-mu``, ``sterm``."""
    if class_id == "exact-learner":
        if learner is None or k is None:
            raise UsageError("exact-learner preset needs k and a learner")
        return RbPreset(class_id, K or k, k,
                        lambda F, e, rng: rc_verify_from_exact_learner(F, learner, F.n, k, rng),
                        {"verifier": "exact-learner", "learner": learner.name})
    if class_id == "junta-generic":
        if k is None:
            raise UsageError("junta-generic preset needs k")
        return RbPreset(class_id, K or k, k,
                        lambda F, e, rng: rc_verify_junta(F, F.n, k, e, eta=eta, rng=rng),
                        {"verifier": "junta"})
    if class_id == "junta-mu":
        if k is None:
            raise UsageError("junta-mu preset needs k")
        mu = 2.0**-k if mu is None else mu
        return RbPreset(class_id, K or k, k,
                        lambda F, e, rng: rc_verify_mu(F, F.n, k, mu, eta=eta, rng=rng),
                        {"verifier": "mu", "mu": mu})
    if class_id == "sterm":
        if s is None or eps is None:
            raise UsageError("sterm preset needs s and eps")
        cap = sterm_cap(s, eps)
        return RbPreset(class_id, K or cap, cap,
                        lambda F, e, rng: rc_verify_junta(F, F.n, cap, e / 3, eta=eta, rng=rng),
                        {"verifier": "sterm", "cap": cap})
    raise UsageError(f"unknown preset {class_id!r}; expected one of {PRESETS}")


# --- the verifier -----------------------------------------------------------------------


def block_count(K: int, eta: float) -> int:
    """``ceil(K^2 / eta)``, at least one block so ``K = 0`` still partitions."""
    return max(1, math.ceil(K * K / eta))


def rb_verify(f: QueryOracle, n: int, preset: RbPreset, alpha: float, eps: float,
              eta: float = DEFAULT_ETA, rng=None) -> RbResult:
    """Relevant-blocks verification.

    Partitions [n] into ``ceil(K^2/eta)`` random blocks, runs the preset's RC
    verifier on the collapsed oracle at ``eta * eps / 4``, rejects on
    overflow, then rejects if Distinguish at ``(eps/4, eps)`` reports that
    ``Pr_x[f(x_X ∘ u_{X̄}) != f(x)]`` is large, then runs a literal test at
    ``(alpha, eta/k)`` on each anchored block function.
    """
    if f.n != n:
        raise UsageError("arity mismatch")
    if preset.K < preset.k or preset.k < 0:
        raise UsageError("need K >= k >= 0")
    rng = make_rng(rng)
    part = BlockPartition.random(n, block_count(preset.K, eta), rng)
    F = collapse_oracle(f, part)
    with stage(f, VERIFIER):
        rc = preset.rc(F, eta * eps / 4, rng)
    if rc.overflow or rc.flagged or len(rc.V) > preset.k:
        return RbResult(None, VERIFIER, rc)

    blocks = F.blocks
    u = blow_up(random_point(rng, F.n), blocks)
    order = sorted(rc.V)
    cert = BlockCertificate(
        n,
        [blocks[j - 1] for j in order],
        [blow_up(rc.witnesses[j], blocks) for j in order],
        u,
    )

    X = cert.union
    xw = as_word(X, n)
    uw = as_word(u & ~X, n)

    def differs(m: int) -> np.ndarray:
        xs = random_points(rng, n, m)
        ys = (xs & xw) | uw
        fy, fx = f.peek_many(ys), f.peek_many(xs)
        pts = np.empty(2 * m, dtype=xs.dtype)
        pts[0::2], pts[1::2] = ys, xs
        ans = np.empty(2 * m, dtype=np.uint8)
        ans[0::2], ans[1::2] = fy, fx
        f.charge(pts, ans)
        return (fy != fx).astype(np.uint8)

    with stage(f, DISTINGUISH):
        far = distinguish(BatchSampler(differs, cost=2), eps / 4, eps, eta)
    if far:
        return RbResult(None, DISTINGUISH, rc)

    with stage(f, LITERAL):
        for j in range(cert.k):
            if not test_literal(cert.anchored(f, j), alpha, eta / max(preset.k, 1), rng):
                return RbResult(None, LITERAL, rc)
    return RbResult(cert, None, rc)
