import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blocktest.bench import random_dnf
from blocktest.bits import UsageError
from blocktest.functions import Term, TermFunction, TruthTable, exact_distance
from blocktest.oracle import FunctionOracle
from blocktest.rc_verifier import DEFAULT_ETA
from blocktest.reduction import (
    ReductionMap,
    apply_rp,
    full_keep,
    large_terms_vanish,
    make_rp,
    reduced_tester,
    reduction_p,
    term_vanishes,
    vanishing_size,
)
from blocktest import testers
from blocktest.verdict import ACCEPT, REDUCTION, Verdict

from conftest import constant, dictator, rate


def reduced_table(rmap, f):
    fh = apply_rp(rmap, FunctionOracle(f))
    return TruthTable(f.n, fh.query_many(np.arange(1 << f.n, dtype=np.uint64)))


class TestMap:
    def test_p_zero_keeps_all(self):
        m = make_rp(50, 0.0, 3)
        assert m.kept == 50 and m.keep == (1 << 50) - 1 and m.ones == 0

    def test_p_one_is_constant(self):
        m = make_rp(10, 1.0, 4)
        assert m.kept == 0
        f = dictator(10, 3)
        t = reduced_table(m, f)
        assert len(set(t.table.tolist())) == 1
        assert t.table[0] == (m.ones >> 2) & 1

    def test_kept_count_binomial(self):
        n, p = 10_000, 0.01
        sigma = math.sqrt(n * p * (1 - p))
        for seed in range(100):
            assert abs(make_rp(n, p, seed).kept - n * (1 - p)) <= 5 * sigma

    def test_fix_split_even(self):
        m = make_rp(100_000, 0.5, 0)
        zeros = bin(m.zeros).count("1")
        ones = bin(m.ones).count("1")
        assert abs(zeros - ones) <= 5 * math.sqrt(100_000 * 0.5)

    def test_range(self):
        with pytest.raises(UsageError):
            make_rp(4, 1.5, 0)

    def test_deterministic(self):
        assert np.array_equal(make_rp(200, 0.3, 9).actions, make_rp(200, 0.3, 9).actions)

    @given(st.integers(1, 300), st.floats(0, 1), st.integers(0, 2**32))
    def test_rle_roundtrip(self, n, p, seed):
        m = make_rp(n, p, seed)
        back = ReductionMap.loads(m.dumps())
        assert np.array_equal(back.actions, m.actions)

    def test_rle_example(self):
        m = ReductionMap(6, 0.5, None, np.array([0, 0, 0, 2, 1, 0], dtype=np.uint8))
        assert m.dumps() == "3K1H1L1K"


class TestApply:
    def test_all_keep_identity(self, rng):
        f = random_dnf(10, 3, 3, rng)
        assert reduced_table(full_keep(10), f) == TruthTable.from_function(f)

    def test_fixed_dictator(self):
        m = ReductionMap(5, 0.5, None, np.array([0, 0, 2, 0, 0], dtype=np.uint8))
        assert np.all(reduced_table(m, dictator(5, 3)).table == 1)

    def test_one_query_per_query(self):
        root = FunctionOracle(dictator(12, 1))
        fh = apply_rp(make_rp(12, 0.2, 0), root)
        fh.query_many(np.arange(777, dtype=np.uint64))
        assert root.queries_used == fh.queries_used == 777

    def test_arity_mismatch(self):
        with pytest.raises(UsageError):
            apply_rp(make_rp(5, 0.1, 0), FunctionOracle(dictator(6, 1)))

    def test_close_on_random_dnfs(self):
        n, s, eps = 16, 3, 0.1
        p = reduction_p(s, eps)
        r = np.random.default_rng(11)
        fs = [random_dnf(n, s, int(r.integers(1, 5)), r) for _ in range(300)]

        def close(seed):
            return exact_distance(reduced_table(make_rp(n, p, seed), fs[seed]), fs[seed]) <= eps

        assert rate(close, range(300)) >= 1 - 2 * DEFAULT_ETA


class TestVanishing:
    def test_p_formula(self):
        assert reduction_p(3, 0.1) == pytest.approx(0.05 / (3 * math.log2(30)))
        assert reduction_p(1, 0.99) == 1.0

    def test_term_vanishes(self):
        m = ReductionMap(4, 0.5, None, np.array([1, 2, 0, 0], dtype=np.uint8))
        assert term_vanishes(m, Term(pos=0b0001))
        assert term_vanishes(m, Term(neg=0b0010))
        assert not term_vanishes(m, Term(pos=0b0010, neg=0b0001))
        assert not term_vanishes(m, Term(pos=0b1100))

    def test_large_terms_vanish_at_scale(self):
        s, eps = 3, 0.1
        bound = math.ceil(vanishing_size(s, eps))
        n = 10_000
        p = reduction_p(s, eps)
        r = np.random.default_rng(5)

        def ok(seed):
            sizes = r.integers(bound, 2 * bound + 1, size=s)
            terms = []
            for size in sizes:
                vs = r.choice(n, size=int(size), replace=False)
                signs = r.integers(0, 2, size=len(vs))
                terms.append(Term(sum(1 << int(v) for v, g in zip(vs, signs) if g),
                                  sum(1 << int(v) for v, g in zip(vs, signs) if not g)))
            return large_terms_vanish(make_rp(n, p, seed), terms, bound)

        assert rate(ok, range(300)) >= 1 - DEFAULT_ETA


def planted(f, frac, seed):
    table = f.truth_table().copy()
    r = np.random.default_rng(seed)
    idx = r.choice(len(table), size=int(frac * len(table)), replace=False)
    table[idx] ^= 1
    return TruthTable(f.n, table)


class TestReducedTester:
    def test_passthrough(self):
        def inner(fh, e, rng):
            return Verdict.accept(0)

        v = reduced_tester(FunctionOracle(dictator(8, 2)), 0.1, inner, p=0.0, rng=0)
        assert v.decision == ACCEPT

    def test_inner_sees_half_eps(self):
        seen = []

        def inner(fh, e, rng):
            seen.append(e)
            return Verdict.accept(0)

        reduced_tester(FunctionOracle(constant(8)), 0.2, inner, s=2, rng=0)
        assert seen == [pytest.approx(0.1)]

    def test_planted_difference_rejected(self):
        f = dictator(10, 1)
        g = planted(f, 0.6, 1)

        def run(seed):
            v = reduced_tester(FunctionOracle(f), 0.5, lambda fh, e, rng: Verdict.accept(0),
                               reduction=lambda o, rng: FunctionOracle(g), rng=seed)
            return v.reject_stage == REDUCTION

        assert rate(run, range(100)) >= 1 - DEFAULT_ETA

    def test_needs_parameters(self):
        with pytest.raises(UsageError):
            reduced_tester(FunctionOracle(constant(4)), 0.1, lambda fh, e, rng: Verdict.accept(0))

    def test_deterministic_transcript(self):
        f = random_dnf(12, 2, 2, np.random.default_rng(0))

        def run():
            root = FunctionOracle(f, record=True)
            reduced_tester(root, 0.1, lambda fh, e, rng: Verdict.accept(0), s=2, rng=42)
            return root.transcript

        assert run() == run()

    @pytest.mark.slow
    def test_dnf_end_to_end(self):
        n = 16
        f = TermFunction.dnf(n, [Term(pos=1 << 3), Term(pos=1 << 6, neg=1 << 11)])
        cfg = testers.TesterConfig(eps=0.1)

        def inner(fh, e, rng):
            return testers.test_k_junta(fh, n, 3, e, cfg, rng)

        assert rate(lambda s: reduced_tester(FunctionOracle(f), 0.1, inner, s=2, rng=s).accepted,
                    range(200)) >= 1 - 4 * DEFAULT_ETA
