import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blocktest.bits import CapabilityError, UsageError
from blocktest.functions import (
    FourierExpansion,
    Junta,
    SparsePoly,
    Term,
    TermFunction,
    TruthTable,
    affine_members,
    all_boolean_functions,
    closeness_violation,
    degree_members,
    distance_to_class,
    distance_to_juntas,
    dumps,
    dumps_fourier,
    exact_distance,
    influence,
    junta_members,
    loads,
    loads_fourier,
    projected_class_distance,
    sparse_poly_members,
)
from blocktest.oracle import FunctionOracle, restrict

from conftest import constant, dictator, majority, monomial_and, parity

# frozen by brute force over explicit tables
PARITY3_TO_2JUNTA = Fraction(1, 2)
MAJ3_TO_2PARITIES = Fraction(1, 4)
MAJ5_TO_1SPARSE = Fraction(5, 16)
THREE_PAIRS_TO_2SPARSE_DEG2 = Fraction(1, 4)


def tables(n):
    return st.lists(st.integers(0, 1), min_size=1 << n, max_size=1 << n).map(
        lambda bits: TruthTable(n, np.array(bits, dtype=np.uint8)))


def brute_influence(f, S, n):
    Sm = sum(1 << (i - 1) for i in S)
    bad = sum(f((x & ~Sm) | (y & Sm)) != f(x) for x in range(1 << n) for y in range(1 << n))
    return 2 * Fraction(bad, 1 << (2 * n))


class TestRepresentations:
    def test_sparse_poly_cancels_duplicates(self):
        p = SparsePoly.from_sets(4, [[1, 2], [3], [1, 2]])
        assert p.monomial_sets() == [frozenset({3})]

    def test_sparse_poly_normal_order(self):
        p = SparsePoly.from_sets(4, [[2, 3], [], [4], [1]])
        assert p.monomial_sets() == [frozenset(), frozenset({1}), frozenset({4}), frozenset({2, 3})]

    def test_term_rejects_repeated_variable(self):
        with pytest.raises(UsageError):
            Term(pos=0b1, neg=0b1)

    def test_term_function_dnf(self):
        f = TermFunction.dnf(4, [Term(pos=0b0011), Term(pos=0b0100, neg=0b1000)])
        assert f(0b0011) == 1 and f(0b0100) == 1 and f(0b1100) == 0 and f(0) == 0

    def test_junta_inner_order(self):
        f = Junta(5, (4, 2), np.array([0, 1, 0, 0]))
        # inner bit 0 is coordinate 2
        assert f(0b00010) == 1 and f(0b01000) == 0 and f(0b01010) == 0

    def test_fourier_boolean_evaluation(self):
        g = FourierExpansion(2, {frozenset({1}): 1})
        assert g(0b01) == 1 and g(0b10) == 0
        h = FourierExpansion(2, {frozenset({1}): 1, frozenset({2}): 1})
        assert h.value(0b11) == -2
        with pytest.raises(ValueError):
            h(0b00)

    @given(tables(4))
    def test_batch_matches_scalar(self, f):
        xs = np.arange(16, dtype=np.uint64)
        assert f.evaluate_many(xs).tolist() == [f(x) for x in range(16)]

    def test_truth_table_cap(self):
        with pytest.raises(CapabilityError):
            SparsePoly.from_sets(25, [[1]]).truth_table()


class TestExactDistance:
    def test_identical(self):
        f = majority(5, [1, 2, 3])
        assert exact_distance(f, f) == 0

    def test_complement(self):
        f = majority(5, [1, 2, 3])
        g = TruthTable(5, 1 - f.truth_table())
        assert exact_distance(f, g) == 1

    def test_dictators(self):
        assert exact_distance(dictator(2, 1), dictator(2, 2)) == Fraction(1, 2)

    def test_refuses_large_n(self):
        with pytest.raises(CapabilityError):
            exact_distance(dictator(25, 1), dictator(25, 2))


class TestDistanceToClass:
    def test_member_is_zero(self):
        f = parity(3, [1, 2])
        assert distance_to_class(f, junta_members(3, 2)) == 0

    def test_parity3_vs_2juntas(self):
        assert distance_to_class(parity(3, [1, 2, 3]), junta_members(3, 2)) == PARITY3_TO_2JUNTA

    def test_constant_vs_0juntas(self):
        assert distance_to_class(constant(3), junta_members(3, 0)) == 0

    def test_budget(self):
        with pytest.raises(CapabilityError):
            distance_to_class(parity(3, [1, 2, 3]), junta_members(3, 2), budget=5)

    def test_cell_majority_shortcut_agrees(self, rng):
        for _ in range(20):
            f = TruthTable(4, rng.integers(0, 2, 16))
            assert distance_to_juntas(f, 2) == distance_to_class(f, junta_members(4, 2))

    def test_majority_vs_parities(self):
        assert distance_to_class(majority(3, [1, 2, 3]), affine_members(3, 2)) == MAJ3_TO_2PARITIES

    def test_majority5_vs_single_monomials(self):
        assert distance_to_class(majority(5, range(1, 6)), sparse_poly_members(5, 1)) == MAJ5_TO_1SPARSE

    def test_three_pairs_projected(self):
        f = SparsePoly.from_sets(8, [[1, 2], [3, 4], [5, 6]])
        full = distance_to_class(f, sparse_poly_members(8, 2, 2))
        assert full == THREE_PAIRS_TO_2SPARSE_DEG2
        assert projected_class_distance(f, lambda r: sparse_poly_members(r, 2, 2)) == full

    def test_parity3_vs_degree2(self):
        assert distance_to_class(parity(3, [1, 2, 3]), degree_members(3, 2)) == Fraction(1, 2)

    def test_all_functions_count(self):
        assert sum(1 for _ in all_boolean_functions(2)) == 16


class TestInfluence:
    def test_dictator(self):
        assert influence(dictator(1, 1), {1}) == 1

    def test_constant(self):
        assert influence(constant(4, 1), {1, 3}) == 0

    def test_and(self):
        assert influence(monomial_and(2, [1, 2]), {1}) == Fraction(1, 2)

    @given(tables(4), st.frozensets(st.integers(1, 4)))
    def test_matches_pair_enumeration(self, f, S):
        assert influence(f, S) == brute_influence(f, S, 4)

    @given(tables(5), st.frozensets(st.integers(1, 5)), st.frozensets(st.integers(1, 5)))
    def test_monotone_subadditive(self, f, S, T):
        a, b, ab = influence(f, S), influence(f, T), influence(f, S | T)
        assert a <= ab <= a + b

    def test_closeness_violation_is_half_influence(self):
        f = majority(4, [1, 2, 3])
        assert closeness_violation(f, {1}) == influence(f, {2, 3, 4}) / 2


class TestRestrict:
    def test_dictator_to_constant(self):
        g = restrict(FunctionOracle(dictator(2, 2)), 2, 1)
        assert all(g(x) == 1 for x in range(4))

    def test_parity_to_dictator(self):
        g = restrict(FunctionOracle(parity(2, [1, 2])), 1, 0)
        assert all(g(x) == (x >> 1) & 1 for x in range(4))

    def test_and_query(self):
        assert restrict(FunctionOracle(monomial_and(2, [1, 2])), 1, 1)(0b00) == 0

    def test_out_of_range(self):
        with pytest.raises(UsageError):
            restrict(FunctionOracle(dictator(2, 1)), 3, 0)

    def test_one_query_per_query(self):
        root = FunctionOracle(dictator(3, 1))
        g = restrict(root, 1, 1)
        g(0)
        g(5)
        assert root.queries_used == 2

    @given(tables(5), st.integers(1, 5), st.integers(0, 1), st.integers(0, 1))
    def test_nested_restriction_keeps_inner(self, f, i, a, b):
        root = FunctionOracle(f)
        once = restrict(root, i, a)
        twice = restrict(once, i, b)
        assert all(twice(x) == once(x) for x in range(32))


class TestFileFormat:
    def test_poly_text(self):
        f = SparsePoly.from_sets(4, [[1, 3], [2], []])
        assert dumps(f) == "n=4\npoly=1,x2,x1+x3\n"

    def test_termfn_text(self):
        f = TermFunction(3, np.array([0, 1, 1, 0]), (Term(pos=0b001, neg=0b010), Term(pos=0b100)))
        assert dumps(f) == "n=3\ntermfn=2;6;x1+!x2,x3\n"

    @given(tables(3))
    def test_truth_table_roundtrip(self, f):
        assert loads(dumps(f)) == f

    @given(st.lists(st.frozensets(st.integers(1, 6), max_size=3), max_size=6))
    def test_poly_roundtrip(self, monos):
        f = SparsePoly.from_sets(6, monos)
        text = dumps(f)
        assert loads(text) == f and dumps(loads(text)) == text

    def test_junta_serializes_as_termfn(self):
        f = majority(6, [2, 4, 5])
        g = loads(dumps(f))
        assert np.array_equal(g.truth_table(), f.truth_table())

    def test_rejects_bad_lengths(self):
        with pytest.raises(UsageError):
            loads("n=3\ntt=f\n")
        with pytest.raises(UsageError):
            loads("n=3\npoly=x1,x1\n")

    def test_fourier_roundtrip(self):
        g = FourierExpansion(3, {0: Fraction(1, 2), 0b001: Fraction(1, 2), 0b110: Fraction(-1, 2), 0b111: Fraction(1, 2)})
        text = dumps_fourier(g)
        assert text.splitlines()[1] == "1:1/2"
        assert loads_fourier(text) == g


def test_sparse_members_enumerate_all_small_polys():
    got = {tuple(t) for t in sparse_poly_members(2, 4)}
    assert len(got) == 16
    assert all(len(t) == 4 for t in got)
    assert {tuple(t) for t in itertools.islice(sparse_poly_members(2, 0), 5)} == {(0, 0, 0, 0)}
