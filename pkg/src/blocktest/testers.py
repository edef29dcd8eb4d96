"""The generic block tester and the concrete class testers built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .bits import CapabilityError, UsageError, as_word
from .functions import SparsePoly
from .learners import (
    anf_exact_learn,
    fourier_exact_learn,
    fourier_membership,
    learn_then_test,
    sparse_membership,
)
from .oracle import BlowUpOracle, FunctionOracle, QueryOracle, stage
from .rc_verifier import DEFAULT_ETA, ExactLearner
from .block_verifier import RbPreset, rb_presets, rb_verify
from .reduction import reduced_tester
from .rng import make_rng, random_points
from .sampling import span_of_ints
from .self_correct import CorrectionParams, self_correct
from .verdict import INNER, SELF_CORRECT, SPAN, Verdict

ALPHA_CAP = 0.1
FOURIER_K_FACTOR = 4.394
JUNTA_PRESETS = ("result1", "result2", "result3")

InnerTester = Callable[[QueryOracle, float, np.random.Generator], Verdict]


@dataclass(frozen=True)
class TesterConfig:
    eps: float = 0.1
    eta: float = DEFAULT_ETA
    seed: int | None = None
    preset: str = "result3"
    alpha: float | None = None

    def __post_init__(self):
        if not 0 < self.eta <= 1 / 12:
            raise UsageError("eta must lie in (0, 1/12]")
        if not 0 < self.eps < 1:
            raise UsageError("eps must lie in (0, 1)")
        if self.alpha is not None and not 0 < self.alpha < 0.25:
            raise UsageError("alpha must lie in (0, 1/4)")

    def with_eps(self, eps: float) -> "TesterConfig":
        return replace(self, eps=eps)


def tuned_alpha(k: int, eps: float) -> float:
    """``min(0.1, (log log k + log log(1/eps)) / (log k * log(1/eps)))``, logs base 2.

    Falls back to 0.1 where the expression is undefined or non-positive.
    """
    lk, le = (math.log2(k) if k > 0 else 0.0), math.log2(1 / eps)
    if lk <= 1 or le <= 1:
        return ALPHA_CAP
    a = (math.log2(lk) + math.log2(le)) / (lk * le)
    return min(ALPHA_CAP, a) if a > 0 else ALPHA_CAP


def span_dimension(eps: float, eta: float) -> int:
    return math.ceil(math.log2(1 / eps)) + math.ceil(math.log2(1 / eta)) + 1


def span_queries(eps: float, eta: float) -> int:
    return 2 * ((1 << span_dimension(eps, eta)) - 1)


def accept_all(F: QueryOracle, eps: float, rng) -> Verdict:
    """Inner tester for classes where every k-ary member qualifies: no queries."""
    return Verdict.accept(0)


def _stage_snapshot(f: QueryOracle) -> dict[str, int]:
    root = f.root
    return dict(root.stage_counts) if isinstance(root, FunctionOracle) else {}


def _stage_delta(f: QueryOracle, before: dict[str, int]) -> dict[str, int]:
    after = _stage_snapshot(f)
    return {k: v - before.get(k, 0) for k, v in sorted(after.items()) if v - before.get(k, 0)}


def generic_block_tester(f: QueryOracle, n: int, preset: RbPreset, inner: InnerTester, alpha: float,
                         eps: float, eta: float = DEFAULT_ETA, rng=None) -> Verdict:
    """Block tester.

    1. relevant-blocks verification at ``eps/4``;
    2. ``inner`` on ``F(y) = f(y_1^{X_1} ∘ ... ∘ y_{k'}^{X_{k'}} ∘ u_{X̄})`` at ``eps/4``;
    3. ``t`` uniform points ``z^(i)`` and self-corrected block values ``ξ^(i)_j``;
    4. for every nonzero ``λ``, compare ``f((Σ λ_i z^(i))_X ∘ u_{X̄})`` with ``F(Σ λ_i ξ^(i))``.

    Stage 4 always spends exactly ``2 (2^t - 1)`` queries.
    """
    if not 0 < alpha < 0.25:
        raise UsageError("alpha must lie in (0, 1/4)")
    rng = make_rng(rng)
    start = f.queries_used
    before = _stage_snapshot(f)

    def done(v: Verdict) -> Verdict:
        v.queries_used = f.queries_used - start
        v.stage_counts = _stage_delta(f, before)
        return v

    rb = rb_verify(f, n, preset, alpha, eps / 4, eta, rng)
    if not rb.accepted:
        return done(Verdict.reject(0, rb.reject_stage))
    cert = rb.certificate
    F = BlowUpOracle(f, cert.blocks, cert.u)

    with stage(f, INNER):
        v = inner(F, eps / 4, rng)
    if not v.accepted:
        return done(Verdict.reject(0, INNER, detail=v.detail))

    t = span_dimension(eps, eta)
    kp = cert.k
    zs = [int(z) for z in random_points(rng, n, t)]
    xis = [0] * t
    if kp:
        params = CorrectionParams(alpha, eta / (t * kp))
        with stage(f, SELF_CORRECT):
            for i, z in enumerate(zs):
                for j in range(kp):
                    if self_correct(cert.anchored(f, j), z, params, rng):
                        xis[i] |= 1 << j

    with stage(f, SPAN):
        P = span_of_ints(zs, n)
        Y = span_of_ints(xis, max(kp, 1))
        X = cert.union
        pts = (P & as_word(X, n)) | as_word(cert.u & ~X, n)
        lhs = f.peek_many(pts)
        rhs = F.peek_many(Y)
        order = np.empty(2 * len(P), dtype=pts.dtype)
        order[0::2], order[1::2] = pts, F._map_many(Y)
        ans = np.empty(2 * len(P), dtype=np.uint8)
        ans[0::2], ans[1::2] = lhs, rhs
        f.charge(order, ans)
    if np.any(lhs != rhs):
        return done(Verdict.reject(0, SPAN))
    return done(Verdict.accept(0, detail={"k'": kp, "t": t}))


# --- concrete testers ----------------------------------------------------------------


def _seeded(cfg: TesterConfig, rng):
    return make_rng(cfg.seed if rng is None else rng)


def _finish(v: Verdict, cfg: TesterConfig) -> Verdict:
    v.seed = cfg.seed
    return v


def test_k_junta(f: QueryOracle, n: int, k: int, eps: float | None = None, cfg: TesterConfig = TesterConfig(),
                 rng=None) -> Verdict:
    """k-Junta tester; preset ``result3`` (default) verifies with the μ-route at ``μ = 2^{-k}``.

    ``result2`` uses the generic sampling verifier with tuned ``alpha``;
    ``result1`` uses it with ``alpha = eps``.  The inner tester accepts
    without queries.
    """
    eps = cfg.eps if eps is None else eps
    rng = _seeded(cfg, rng)
    if cfg.preset == "result3":
        preset = rb_presets("junta-mu", k=k, eta=cfg.eta)
        alpha = cfg.alpha or tuned_alpha(k, eps)
    elif cfg.preset == "result2":
        preset = rb_presets("junta-generic", k=k, eta=cfg.eta)
        alpha = cfg.alpha or tuned_alpha(k, eps)
    elif cfg.preset == "result1":
        preset = rb_presets("junta-generic", k=k, eta=cfg.eta)
        alpha = cfg.alpha or min(eps, ALPHA_CAP)
    else:
        raise UsageError(f"unknown k-junta preset {cfg.preset!r}; expected one of {JUNTA_PRESETS}")
    return _finish(generic_block_tester(f, n, preset, accept_all, alpha, eps, cfg.eta, rng), cfg)


def fourier_block_bound(d: int) -> int:
    """Relevant-variable bound ``ceil(4.394 * 2^d)`` for Fourier degree ``d``."""
    return math.ceil(FOURIER_K_FACTOR * (1 << d))


def test_fourier_degree(f: QueryOracle, n: int, d: int, eps: float | None = None,
                        cfg: TesterConfig = TesterConfig(), rng=None) -> Verdict:
    """Fourier-degree tester: exact-learner verification, then learn-then-test with membership."""
    if d > 5:
        raise CapabilityError("Fourier-degree testing limited to d <= 5")
    eps = cfg.eps if eps is None else eps
    rng = _seeded(cfg, rng)
    K = fourier_block_bound(d)
    learner = ExactLearner(lambda F: fourier_exact_learn(F, d), name=f"fourier-d{d}")
    preset = rb_presets("exact-learner", k=K, learner=learner, eta=cfg.eta)

    def inner(F, e, r):
        return learn_then_test(F, lambda G, _e: fourier_exact_learn(G, d),
                               lambda g: fourier_membership(g, d, cfg.eta, r), e, cfg.eta, r)

    alpha = cfg.alpha or tuned_alpha(K, eps)
    return _finish(generic_block_tester(f, n, preset, inner, alpha, eps, cfg.eta, rng), cfg)


def test_sparse_poly_deg(f: QueryOracle, n: int, s: int, d: int, eps: float | None = None,
                         cfg: TesterConfig = TesterConfig(), rng=None) -> Verdict:
    """s-sparse degree-d polynomials: μ-route verification with ``K = ds`` and ``μ = 2^{-d}``."""
    k = d * s
    if k > 20:
        raise CapabilityError("exhaustive ANF learning needs d*s <= 20")
    eps = cfg.eps if eps is None else eps
    rng = _seeded(cfg, rng)
    preset = rb_presets("junta-mu", k=k, mu=2.0**-d, eta=cfg.eta)
    member = sparse_membership(s, d)

    def inner(F, e, r):
        return learn_then_test(F, lambda G, _e: anf_exact_learn(G), member, e, cfg.eta, r)

    alpha = cfg.alpha or tuned_alpha(k, eps)
    return _finish(generic_block_tester(f, n, preset, inner, alpha, eps, cfg.eta, rng), cfg)


def test_sparse_poly(f: QueryOracle, n: int, s: int, eps: float | None = None, cfg: TesterConfig = TesterConfig(),
                     rng=None, learner: Callable | None = None) -> Verdict:
    """s-sparse polynomials: block testing behind an ``R_p`` variable reduction.

    ``learner(F, eps)`` fills the sparse-polynomial learner slot; the default
    is exhaustive ANF interpolation over the certified blocks.
    """
    eps = cfg.eps if eps is None else eps
    rng = _seeded(cfg, rng)
    learner = learner or (lambda G, _e: anf_exact_learn(G))
    member = sparse_membership(s)

    def block_tester(fh, e, r):
        preset = rb_presets("sterm", s=s, eps=e, eta=cfg.eta)
        alpha = cfg.alpha or tuned_alpha(preset.k, e)

        def inner(F, e2, r2):
            return learn_then_test(F, learner, member, e2, cfg.eta, r2)

        return generic_block_tester(fh, n, preset, inner, alpha, e, cfg.eta, r)

    return _finish(reduced_tester(f, eps, block_tester, s=s, eta=cfg.eta, rng=rng), cfg)


def parity_membership(k: int) -> Callable:
    """Members: XOR of at most ``k`` variables, optionally complemented."""

    def member(g) -> bool:
        if not isinstance(g, SparsePoly):
            return False
        lin = [m for m in g.monomials if m]
        return g.degree <= 1 and len(lin) <= k

    return member


def theorem_tester(f: QueryOracle, n: int, k: int, learner: ExactLearner, membership: Callable,
                   eps: float | None = None, cfg: TesterConfig = TesterConfig(), mu: float | None = None,
                   rng=None) -> Verdict:
    """Generic tester from an exact learner for a class inside k-Junta.

    Without ``mu`` the blocks are verified by learning; with ``mu`` the
    μ-route sampling verifier is used instead.  Either way the inner tester
    is learn-then-test with ``learner`` and ``membership``.
    """
    eps = cfg.eps if eps is None else eps
    rng = _seeded(cfg, rng)
    if mu is None:
        preset = rb_presets("exact-learner", k=k, learner=learner, eta=cfg.eta)
    else:
        preset = rb_presets("junta-mu", k=k, mu=mu, eta=cfg.eta)

    def inner(F, e, r):
        return learn_then_test(F, lambda G, _e: learner(G), membership, e, cfg.eta, r)

    alpha = cfg.alpha or tuned_alpha(k, eps)
    return _finish(generic_block_tester(f, n, preset, inner, alpha, eps, cfg.eta, rng), cfg)


for _fn in (test_k_junta, test_fourier_degree, test_sparse_poly_deg, test_sparse_poly):
    _fn.__test__ = False  # library functions, not pytest tests
