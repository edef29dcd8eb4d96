import math
from fractions import Fraction

import numpy as np
import pytest

from blocktest import testers
from blocktest.bench import random_decision_tree
from blocktest.bits import CapabilityError, UsageError
from blocktest.block_verifier import BlockCertificate, RbResult, rb_presets
from blocktest.functions import (
    Junta,
    SparsePoly,
    TruthTable,
    degree_members,
    distance_to_class,
    distance_to_juntas,
    exact_distance,
    projected_class_distance,
    sparse_poly_members,
)
from blocktest.learners import anf_exact_learn, fourier_from_function
from blocktest.oracle import FunctionOracle
from blocktest.rc_verifier import DEFAULT_ETA, ExactLearner
from blocktest.verdict import INNER, SELF_CORRECT, SPAN, Verdict

from conftest import constant, dictator, majority, parity, rate

Cfg = testers.TesterConfig
ETA = DEFAULT_ETA

# exact distances computed by enumeration (tests/test_functions.py re-derives them)
PARITY6_TO_2JUNTA = Fraction(1, 2)
PARITY3_TO_DEGREE2 = Fraction(1, 2)
THREE_PAIRS_TO_2SPARSE_DEG2 = Fraction(1, 4)
MAJ5_TO_1SPARSE = Fraction(5, 16)
MAJ3_TO_2PARITIES = Fraction(1, 4)


def accept_rate(run, seeds):
    return rate(lambda s: run(s).accepted, seeds)


class TestConfigAndConstants:
    def test_eta_bound(self):
        with pytest.raises(UsageError):
            Cfg(eta=0.1)
        Cfg(eta=1 / 12)

    def test_eps_and_alpha(self):
        with pytest.raises(UsageError):
            Cfg(eps=0.0)
        with pytest.raises(UsageError):
            Cfg(alpha=0.3)

    def test_span_dimension(self):
        assert testers.span_dimension(0.1, 1 / 20) == 4 + 5 + 1
        assert testers.span_dimension(0.5, 1 / 20) == 1 + 5 + 1
        assert testers.span_queries(0.5, 1 / 20) == 2 * (2**7 - 1)

    def test_tuned_alpha(self):
        k, eps = 2**16, 2.0**-16
        expected = (math.log2(16) + math.log2(16)) / (16 * 16)
        assert testers.tuned_alpha(k, eps) == pytest.approx(expected)
        assert testers.tuned_alpha(2, 0.1) == 0.1
        assert testers.tuned_alpha(3, 0.4) == 0.1
        assert 0 < testers.tuned_alpha(3, 2.0**-10) <= 0.1

    def test_fourier_bound(self):
        assert testers.fourier_block_bound(2) == 18

    def test_unknown_preset(self):
        with pytest.raises(UsageError):
            testers.test_k_junta(FunctionOracle(constant(4)), 4, 1, cfg=Cfg(preset="nope"))

    def test_capabilities(self):
        with pytest.raises(CapabilityError):
            testers.test_fourier_degree(FunctionOracle(constant(4)), 4, 6)
        with pytest.raises(CapabilityError):
            testers.test_sparse_poly_deg(FunctionOracle(constant(4)), 4, 7, 3)


class TestGenericBlockTester:
    def test_dictator_one_junta(self):
        f = dictator(32, 7)
        got = accept_rate(lambda s: testers.test_k_junta(FunctionOracle(f), 32, 1, 0.1, rng=s), range(300))
        assert got >= 1 - 2 * ETA

    def test_span_count_exact(self):
        for eps in (0.5, 0.1, 2.0**-6):
            v = testers.test_k_junta(FunctionOracle(majority(12, [1, 5, 9])), 12, 3, eps, rng=1)
            assert v.accepted
            assert v.stage_counts[SPAN] == testers.span_queries(eps, ETA)

    def test_queries_match_counter(self):
        o = FunctionOracle(majority(12, [1, 5, 9]))
        v = testers.test_k_junta(o, 12, 3, 0.1, rng=2)
        assert v.queries_used == o.queries_used == sum(v.stage_counts.values())

    def test_stage_two_one_query_each(self):
        seen = {}

        def inner(F, e, rng):
            root = F.root
            before = root.queries_used
            F.query_many(np.arange(1 << F.n, dtype=np.uint64))
            seen["F"] = 1 << F.n
            seen["f"] = root.queries_used - before
            return Verdict.accept(0)

        f = majority(12, [2, 4, 8])
        v = testers.generic_block_tester(FunctionOracle(f), 12, rb_presets("junta-mu", k=3), inner, 0.1, 0.1,
                                         rng=0)
        assert v.accepted and seen["F"] == seen["f"] == 8

    def test_alpha_precondition(self):
        with pytest.raises(UsageError):
            testers.generic_block_tester(FunctionOracle(constant(4)), 4, rb_presets("junta-mu", k=1),
                                         testers.accept_all, 0.3, 0.1)

    def test_planted_span_inconsistency(self, monkeypatch):
        n = 12
        # x1 corrupted on {x2=x3=x4=1, x5=0}: density 1/16, invisible on the all-0 and all-1 block points
        table = TruthTable.from_callable(
            n, lambda x: (x & 1) ^ int((x >> 1) & 7 == 7 and not (x >> 4) & 1))
        assert exact_distance(table, dictator(n, 1)) == Fraction(1, 16)
        cert = BlockCertificate(n, [0b111111], [0], 0)
        monkeypatch.setattr(testers, "rb_verify", lambda *a, **k: RbResult(cert))
        eps = 0.1
        t = testers.span_dimension(eps, ETA)
        miss_bound = 1 / ((2**t - 1) * (1 / 16))

        def rejected_at_span(s):
            v = testers.generic_block_tester(FunctionOracle(table), n, None, testers.accept_all, 0.15, eps, rng=s)
            return v.reject_stage == SPAN

        assert rate(rejected_at_span, range(300)) >= 1 - miss_bound - 3 * math.sqrt(miss_bound / 300) - 2 * ETA


class TestKJunta:
    def test_majority_accepted(self):
        f = majority(16, [2, 9, 14])
        got = accept_rate(lambda s: testers.test_k_junta(FunctionOracle(f), 16, 3, 0.05, rng=s), range(200))
        assert got >= 0.75

    def test_parity_rejected(self):
        f = parity(8, range(1, 7))
        assert distance_to_juntas(f, 2) == PARITY6_TO_2JUNTA
        got = accept_rate(lambda s: testers.test_k_junta(FunctionOracle(f), 8, 2, 0.25, rng=s), range(200))
        assert 1 - got >= 0.75

    def test_constant(self):
        got = accept_rate(lambda s: testers.test_k_junta(FunctionOracle(constant(16, 1)), 16, 2, 0.1, rng=s),
                          range(100))
        assert got >= 1 - 2 * ETA

    @pytest.mark.parametrize("preset", ["result1", "result2"])
    def test_other_presets(self, preset):
        cfg = Cfg(preset=preset)
        f = majority(12, [3, 7, 10])
        got = accept_rate(lambda s: testers.test_k_junta(FunctionOracle(f), 12, 3, 0.2, cfg, rng=s), range(20))
        assert got >= 0.75

    def test_seed_recorded(self):
        v = testers.test_k_junta(FunctionOracle(constant(8)), 8, 1, 0.1, Cfg(seed=99))
        assert v.seed == 99


class TestFourierDegree:
    def test_character_accepted(self):
        f = parity(10, [1, 3])
        got = accept_rate(lambda s: testers.test_fourier_degree(FunctionOracle(f), 10, 2, 0.1, rng=s), range(50))
        assert got >= 1 - 4 * ETA

    def test_decision_trees_accepted(self, rng):
        fs = [random_decision_tree(10, 2, rng) for _ in range(40)]
        assert all(fourier_from_function(f).degree <= 2 for f in fs)
        got = accept_rate(lambda s: testers.test_fourier_degree(FunctionOracle(fs[s]), 10, 2, 0.1, rng=s),
                          range(40))
        assert got >= 0.75

    def test_parity3_rejected(self):
        f = parity(3, [1, 2, 3])
        assert distance_to_class(f, degree_members(3, 2)) == PARITY3_TO_DEGREE2
        got = accept_rate(lambda s: testers.test_fourier_degree(FunctionOracle(f), 3, 2, 0.25, rng=s), range(100))
        assert 1 - got >= 0.75


class TestSparsePolyDeg:
    def test_member_accepted(self):
        f = SparsePoly.from_sets(12, [[1, 2], [3]])
        got = accept_rate(lambda s: testers.test_sparse_poly_deg(FunctionOracle(f), 12, 2, 2, 0.1, rng=s),
                          range(100))
        assert got >= 1 - 4 * ETA

    def test_three_pairs_rejected(self):
        f = SparsePoly.from_sets(12, [[1, 2], [3, 4], [5, 6]])
        assert projected_class_distance(f, lambda r: sparse_poly_members(r, 2, 2)) == THREE_PAIRS_TO_2SPARSE_DEG2
        got = accept_rate(lambda s: testers.test_sparse_poly_deg(FunctionOracle(f), 12, 2, 2, 0.2, rng=s),
                          range(100))
        assert 1 - got >= 0.75

    def test_zero_accepted(self):
        assert testers.test_sparse_poly_deg(FunctionOracle(constant(10)), 10, 2, 2, 0.1, rng=0).accepted


class TestSparsePoly:
    @pytest.mark.slow
    def test_member_accepted(self):
        f = SparsePoly.from_sets(32, [[1, 2], [4, 5]])
        got = accept_rate(lambda s: testers.test_sparse_poly(FunctionOracle(f), 32, 2, 0.1, rng=s), range(3))
        assert got == 1.0

    def test_majority_rejected(self):
        f = majority(5, [1, 2, 3, 4, 5])
        assert projected_class_distance(f, lambda r: sparse_poly_members(r, 1)) == MAJ5_TO_1SPARSE
        got = accept_rate(lambda s: testers.test_sparse_poly(FunctionOracle(f), 5, 1, 0.25, rng=s), range(40))
        assert 1 - got >= 0.75

    def test_zero_accepted(self):
        assert testers.test_sparse_poly(FunctionOracle(constant(16)), 16, 2, 0.1, rng=0).accepted

    def test_learner_slot(self):
        calls = []

        def learner(G, e):
            calls.append(G.n)
            return anf_exact_learn(G)

        testers.test_sparse_poly(FunctionOracle(dictator(16, 3)), 16, 1, 0.2, rng=0, learner=learner)
        assert calls


class TestTheoremTester:
    learner = ExactLearner(anf_exact_learn, name="anf")

    def test_parity_accepted(self):
        f = parity(16, [2, 8])
        got = accept_rate(lambda s: testers.theorem_tester(FunctionOracle(f), 16, 2, self.learner,
                                                           testers.parity_membership(2), 0.1, rng=s), range(100))
        assert got >= 1 - 4 * ETA

    def test_majority_rejected(self):
        f = majority(3, [1, 2, 3])
        assert projected_class_distance(f, lambda r: sparse_poly_members(r, 2, 1)) == MAJ3_TO_2PARITIES
        got = accept_rate(lambda s: testers.theorem_tester(FunctionOracle(f), 3, 2, self.learner,
                                                           testers.parity_membership(2), 0.2, rng=s), range(100))
        assert 1 - got >= 0.75

    def test_constants_class(self):
        v = testers.theorem_tester(FunctionOracle(constant(8, 1)), 8, 0, self.learner,
                                   testers.parity_membership(0), 0.1, rng=0)
        assert v.accepted

    def test_mu_route(self):
        f = parity(16, [2, 8])
        got = accept_rate(lambda s: testers.theorem_tester(FunctionOracle(f), 16, 2, self.learner,
                                                           testers.parity_membership(2), 0.1, mu=0.5, rng=s),
                          range(30))
        assert got >= 0.75
