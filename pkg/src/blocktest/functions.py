"""Explicit Boolean functions and exact (enumeration) oracles.

Representations:

* :class:`TruthTable` -- full table, ``n <= 24``.
* :class:`Junta` -- relevant coordinates plus an inner table.
* :class:`SparsePoly` -- XOR of monotone monomials over F2 (normalized ANF).
* :class:`TermFunction` -- an outer table applied to ``s`` conjunctions of literals.
* :class:`FourierExpansion` -- rational coefficients over ``{-1,+1}``; TRUE maps to -1.

The exact oracles (:func:`exact_distance`, :func:`influence`,
:func:`distance_to_class`) enumerate the whole cube and return
``fractions.Fraction`` values; they refuse ``n > 24``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator

import numpy as np

from .bits import (
    WORD_BITS,
    CapabilityError,
    UsageError,
    as_word,
    batch_bit,
    batch_popcount_parity,
    coords_to_mask,
    full_mask,
    mask_to_coords,
    popcount,
    sorted_coords,
)

MAX_TABLE_ARITY = 24


def _require_table_arity(n: int) -> None:
    if n > MAX_TABLE_ARITY:
        raise CapabilityError(f"exact enumeration refused for n={n} > {MAX_TABLE_ARITY}")


def _all_points(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.uint64)


class ExplicitFunction:
    """Base class: a Boolean function on {0,1}^n given explicitly."""

    n: int

    def __call__(self, x: int) -> int:
        raise NotImplementedError

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        return np.fromiter((self(int(x)) for x in xs), dtype=np.uint8, count=len(xs))

    def truth_table(self) -> np.ndarray:
        _require_table_arity(self.n)
        return self.evaluate_many(_all_points(self.n)).astype(np.uint8)

    def support_mask(self) -> int:
        """Mask of coordinates the representation mentions (a superset of the relevant ones)."""
        return full_mask(self.n)

    def relevant(self) -> frozenset[int]:
        """Exact relevant coordinates (enumerates the table)."""
        return relevant_coordinates(self.truth_table(), self.n)


def relevant_coordinates(table: np.ndarray, n: int) -> frozenset[int]:
    t = table.reshape((2,) * n) if n else table
    out = []
    for i in range(1, n + 1):
        axis = n - i  # C-order reshape puts coordinate 1 (lowest bit) on the last axis
        a = np.take(t, 0, axis=axis)
        b = np.take(t, 1, axis=axis)
        if np.any(a != b):
            out.append(i)
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class TruthTable(ExplicitFunction):
    n: int
    table: np.ndarray

    def __post_init__(self):
        _require_table_arity(self.n)
        t = np.asarray(self.table, dtype=np.uint8)
        if t.shape != (1 << self.n,):
            raise UsageError(f"table must have 2^{self.n} entries")
        if np.any(t > 1):
            raise UsageError("table entries must be bits")
        object.__setattr__(self, "table", t)

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        return self.table[xs.astype(np.int64)]

    def truth_table(self) -> np.ndarray:
        return self.table

    def __eq__(self, other):
        return isinstance(other, TruthTable) and self.n == other.n and np.array_equal(self.table, other.table)

    @classmethod
    def from_function(cls, f: ExplicitFunction) -> "TruthTable":
        return cls(f.n, f.truth_table())

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[int], int]) -> "TruthTable":
        _require_table_arity(n)
        return cls(n, np.fromiter((fn(x) & 1 for x in range(1 << n)), dtype=np.uint8, count=1 << n))


@dataclass(frozen=True, eq=False)
class Junta(ExplicitFunction):
    """``inner(x_{c_1}, ..., x_{c_k})`` with ``coords`` ascending; inner bit ``i`` is ``c_{i+1}``."""

    n: int
    coords: tuple[int, ...]
    inner: np.ndarray

    def __post_init__(self):
        coords = tuple(sorted(self.coords))
        if len(set(coords)) != len(coords) or any(c < 1 or c > self.n for c in coords):
            raise UsageError("junta coordinates must be distinct and inside [1, n]")
        inner = np.asarray(self.inner, dtype=np.uint8)
        if inner.shape != (1 << len(coords),):
            raise UsageError("inner table size mismatch")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "inner", inner)

    def _index(self, x: int) -> int:
        idx = 0
        for b, c in enumerate(self.coords):
            idx |= ((x >> (c - 1)) & 1) << b
        return idx

    def __call__(self, x: int) -> int:
        return int(self.inner[self._index(x)])

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        idx = np.zeros(len(xs), dtype=np.int64)
        for b, c in enumerate(self.coords):
            idx |= batch_bit(xs, c, self.n).astype(np.int64) << b
        return self.inner[idx]

    def support_mask(self) -> int:
        return coords_to_mask(self.coords)


def _normalize_monomials(monomials: Iterable[int]) -> tuple[int, ...]:
    seen: set[int] = set()
    for m in monomials:
        seen ^= {m}
    return tuple(sorted(seen, key=lambda m: (popcount(m), sorted_coords(m))))


@dataclass(frozen=True)
class SparsePoly(ExplicitFunction):
    """XOR of monomials; each monomial is a coordinate mask (0 is the constant 1)."""

    n: int
    monomials: tuple[int, ...]

    def __post_init__(self):
        for m in self.monomials:
            if m < 0 or m >> self.n:
                raise UsageError("monomial outside [1, n]")
        object.__setattr__(self, "monomials", _normalize_monomials(self.monomials))

    @classmethod
    def from_sets(cls, n: int, monomials: Iterable[Iterable[int]]) -> "SparsePoly":
        return cls(n, tuple(coords_to_mask(m, n) for m in monomials))

    def monomial_sets(self) -> list[frozenset[int]]:
        return [mask_to_coords(m) for m in self.monomials]

    @property
    def degree(self) -> int:
        return max((popcount(m) for m in self.monomials), default=0)

    def __call__(self, x: int) -> int:
        v = 0
        for m in self.monomials:
            if x & m == m:
                v ^= 1
        return v

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        out = np.zeros(len(xs), dtype=np.uint8)
        for m in self.monomials:
            w = as_word(m, self.n)
            out ^= ((xs & w) == w).astype(np.uint8)
        return out

    def support_mask(self) -> int:
        s = 0
        for m in self.monomials:
            s |= m
        return s


@dataclass(frozen=True)
class Term:
    """Conjunction of literals: ``pos`` coordinates must be 1, ``neg`` coordinates 0."""

    pos: int = 0
    neg: int = 0

    def __post_init__(self):
        if self.pos & self.neg:
            raise UsageError("a term may not mention a variable twice")

    def __call__(self, x: int) -> int:
        return int((x & self.pos) == self.pos and (x & self.neg) == 0)

    @property
    def size(self) -> int:
        return popcount(self.pos | self.neg)

    @property
    def variables(self) -> int:
        return self.pos | self.neg


@dataclass(frozen=True, eq=False)
class TermFunction(ExplicitFunction):
    """``outer(T_1(x), ..., T_s(x))``; outer-table bit ``i`` is ``T_{i+1}``."""

    n: int
    outer: np.ndarray
    terms: tuple[Term, ...]

    def __post_init__(self):
        outer = np.asarray(self.outer, dtype=np.uint8)
        if outer.shape != (1 << len(self.terms),):
            raise UsageError("outer table size must be 2^s")
        for t in self.terms:
            if t.variables >> self.n:
                raise UsageError("term variable outside [1, n]")
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def s(self) -> int:
        return len(self.terms)

    @classmethod
    def dnf(cls, n: int, terms: Iterable[Term]) -> "TermFunction":
        terms = tuple(terms)
        outer = np.array([1 if i else 0 for i in range(1 << len(terms))], dtype=np.uint8)
        return cls(n, outer, terms)

    def __call__(self, x: int) -> int:
        idx = 0
        for b, t in enumerate(self.terms):
            idx |= t(x) << b
        return int(self.outer[idx])

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        idx = np.zeros(len(xs), dtype=np.int64)
        for b, t in enumerate(self.terms):
            p, q = as_word(t.pos, self.n), as_word(t.neg, self.n)
            zero = as_word(0, self.n)
            val = ((xs & p) == p) & ((xs & q) == zero)
            idx |= val.astype(np.int64) << b
        return self.outer[idx]

    def support_mask(self) -> int:
        s = 0
        for t in self.terms:
            s |= t.variables
        return s

    def __eq__(self, other):
        return (
            isinstance(other, TermFunction)
            and self.n == other.n
            and self.terms == other.terms
            and np.array_equal(self.outer, other.outer)
        )


def chi(S: int, x: int) -> int:
    """Character value ``(-1)^{|S ∩ x|}``."""
    return -1 if popcount(S & x) & 1 else 1


@dataclass(frozen=True, eq=False)
class FourierExpansion(ExplicitFunction):
    """Real function ``Σ_S coeffs[S] χ_S`` over {0,1}^n, with bit 1 read as -1.

    Calling the expansion returns a bit only where the value is ±1
    (-1 ↦ 1, +1 ↦ 0); :meth:`value` returns the exact rational.
    """

    n: int
    coeffs: dict

    def __post_init__(self):
        clean = {}
        for S, c in self.coeffs.items():
            if not isinstance(S, int):
                S = coords_to_mask(S, self.n)
            c = Fraction(c)
            if S >> self.n:
                raise UsageError("character index outside [1, n]")
            if c:
                clean[S] = clean.get(S, Fraction(0)) + c
        object.__setattr__(self, "coeffs", {S: c for S, c in clean.items() if c})

    @property
    def degree(self) -> int:
        return max((popcount(S) for S in self.coeffs), default=0)

    @property
    def support_size(self) -> int:
        return len(self.coeffs)

    def value(self, x: int) -> Fraction:
        return sum((c * chi(S, x) for S, c in self.coeffs.items()), Fraction(0))

    def scaled(self) -> tuple[dict[int, int], int]:
        """Integer numerators over a common denominator."""
        den = 1
        for c in self.coeffs.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        return {S: int(c * den) for S, c in self.coeffs.items()}, den

    def scaled_values(self, xs: np.ndarray) -> tuple[np.ndarray, int]:
        """``value(x) * den`` for a batch, as exact Python ints in an object array."""
        nums, den = self.scaled()
        out = np.zeros(len(xs), dtype=object)
        for S, a in nums.items():
            par = batch_popcount_parity(xs & as_word(S, self.n), self.n)
            out = out + np.where(par == 1, -a, a).astype(object)
        return out, den

    def is_boolean_at(self, x: int) -> bool:
        return abs(self.value(x)) == 1

    def __call__(self, x: int) -> int:
        v = self.value(x)
        if v == 1:
            return 0
        if v == -1:
            return 1
        raise ValueError(f"expansion is not Boolean at {x:#x} (value {v})")

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        vals, den = self.scaled_values(xs)
        if not all(v == den or v == -den for v in vals):
            raise ValueError("expansion is not Boolean on the batch")
        return np.array([1 if v == -den else 0 for v in vals], dtype=np.uint8)

    def support_mask(self) -> int:
        s = 0
        for S in self.coeffs:
            s |= S
        return s

    def __eq__(self, other):
        return isinstance(other, FourierExpansion) and self.n == other.n and self.coeffs == other.coeffs


# --- exact oracles ---------------------------------------------------------


def _table(f) -> np.ndarray:
    if isinstance(f, np.ndarray):
        return f.astype(np.uint8)
    return f.truth_table()


def exact_distance(f, g) -> Fraction:
    """``Pr_x[f(x) != g(x)]`` by full enumeration."""
    if getattr(f, "n", None) is not None and getattr(g, "n", None) is not None and f.n != g.n:
        raise UsageError("arity mismatch")
    tf, tg = _table(f), _table(g)
    if tf.shape != tg.shape:
        raise UsageError("arity mismatch")
    return Fraction(int(np.count_nonzero(tf != tg)), len(tf))


def influence(f, S: Iterable[int] | int, n: int | None = None) -> Fraction:
    """``Inf_f(S) = 2 Pr_{x,y}[f(x_{S̄} ∘ y_S) != f(x)]``, exact.

    Inside each coset of the coordinates in ``S`` (fixed ``x_{S̄}``), the
    pair ``(x_S, y_S)`` is uniform over the coset squared; a coset with ``c``
    ones out of ``N`` contributes ``2c(N-c)/N^2`` disagreeing mass.
    """
    t = _table(f)
    n = int(math.log2(len(t))) if n is None else n
    _require_table_arity(n)
    mask = S if isinstance(S, int) else coords_to_mask(S, n)
    if mask == 0:
        return Fraction(0)
    axes = tuple(n - i for i in mask_to_coords(mask))
    ones = t.reshape((2,) * n).sum(axis=axes, dtype=np.int64) if n else t.astype(np.int64)
    N = 1 << popcount(mask)
    groups = ones.size
    num = int(np.sum(2 * ones * (N - ones)))
    # Pr = num / (groups * N^2); influence doubles it.
    return Fraction(2 * num, groups * N * N)


def closeness_violation(f, V: Iterable[int] | int, n: int | None = None) -> Fraction:
    """``Pr_{x,y}[f(x_V ∘ y_{V̄}) != f(x)] = Inf_f(V̄)/2``."""
    t = _table(f)
    n = int(math.log2(len(t))) if n is None else n
    vm = V if isinstance(V, int) else coords_to_mask(V, n)
    return influence(t, full_mask(n) & ~vm, n) / 2


def distance_to_class(f, members: Iterable, budget: int = 1_000_000) -> Fraction:
    """Minimum exact distance from ``f`` to an enumerated class.

    ``members`` yields explicit functions or truth tables of the same arity.
    Raises :class:`CapabilityError` once more than ``budget`` members were seen.
    """
    tf = _table(f)
    best = None
    for count, g in enumerate(members, start=1):
        if count > budget:
            raise CapabilityError(f"class enumeration exceeded budget {budget}")
        d = int(np.count_nonzero(tf != _table(g)))
        if best is None or d < best:
            best = d
            if d == 0:
                break
    if best is None:
        raise UsageError("empty class")
    return Fraction(best, len(tf))


# --- class enumerators -------------------------------------------------------


def all_boolean_functions(n: int) -> Iterator[np.ndarray]:
    if n > 4:
        raise CapabilityError("enumerating all Boolean functions is limited to n <= 4")
    size = 1 << n
    for code in range(1 << size):
        yield np.array([(code >> i) & 1 for i in range(size)], dtype=np.uint8)


def junta_members(n: int, k: int) -> Iterator[np.ndarray]:
    """Every function depending only on some ``k``-subset of [n] (n small)."""
    _require_table_arity(n)
    k = min(k, n)
    for coords in itertools.combinations(range(1, n + 1), k):
        for code in range(1 << (1 << k)):
            inner = np.array([(code >> i) & 1 for i in range(1 << k)], dtype=np.uint8)
            yield Junta(n, coords, inner).truth_table()


def distance_to_juntas(f, k: int, n: int | None = None) -> Fraction:
    """Exact distance to k-Junta: per relevant set, the best inner table is the cell majority."""
    t = _table(f)
    n = int(math.log2(len(t))) if n is None else n
    _require_table_arity(n)
    k = min(k, n)
    cube = t.reshape((2,) * n) if n else t
    total = 1 << n
    best = total
    for coords in itertools.combinations(range(1, n + 1), k):
        other_axes = tuple(sorted(set(range(n)) - {n - c for c in coords}))
        ones = cube.sum(axis=other_axes, dtype=np.int64) if other_axes else cube.astype(np.int64)
        cell = 1 << (n - k)
        err = int(np.sum(np.minimum(ones, cell - ones)))
        best = min(best, err)
        if best == 0:
            break
    return Fraction(best, total)


def restrict_table(table: np.ndarray, n: int, coords: Iterable[int]) -> np.ndarray:
    """Table of a function known to depend only on ``coords``, re-indexed over them."""
    coords = sorted(coords)
    idx = np.zeros(1 << len(coords), dtype=np.int64)
    for b, c in enumerate(coords):
        idx |= (((np.arange(1 << len(coords)) >> b) & 1) << (c - 1)).astype(np.int64)
    return table[idx]


def projected_class_distance(f, enumerate_on: Callable[[int], Iterable[np.ndarray]], n: int | None = None) -> Fraction:
    """Distance to a projection-closed class, enumerating only on ``f``'s relevant set.

    If ``f`` depends only on ``R`` and the class is closed under zero-one
    projections, fixing the outside coordinates of the best member to their
    best values never increases the distance, so enumerating class members on
    ``R`` alone is exact.
    """
    t = _table(f)
    n = int(math.log2(len(t))) if n is None else n
    R = sorted(relevant_coordinates(t, n))
    small = restrict_table(t, n, R)
    return distance_to_class(small, enumerate_on(len(R)))


def sparse_poly_members(r: int, s: int, d: int | None = None) -> Iterator[np.ndarray]:
    """All polynomials over ``r`` variables with at most ``s`` monomials of degree <= d."""
    d = r if d is None else d
    monos = [m for m in range(1 << r) if popcount(m) <= d]
    for size in range(0, s + 1):
        for combo in itertools.combinations(monos, size):
            yield SparsePoly(r, combo).truth_table()


def fourier_degree_of_table(table: np.ndarray, n: int) -> int:
    from .learners import walsh_hadamard  # local import keeps the module graph flat

    coeffs = walsh_hadamard(table, n)
    nz = np.nonzero(coeffs)[0]
    return max((popcount(int(S)) for S in nz), default=0)


def degree_members(r: int, d: int) -> Iterator[np.ndarray]:
    for t in all_boolean_functions(r):
        if fourier_degree_of_table(t, r) <= d:
            yield t


def affine_members(r: int, k: int) -> Iterator[np.ndarray]:
    """Parities of at most ``k`` variables and their complements."""
    for size in range(0, min(k, r) + 1):
        for coords in itertools.combinations(range(1, r + 1), size):
            base = SparsePoly.from_sets(r, [[c] for c in coords]).truth_table()
            yield base
            yield base ^ 1


# --- text format ------------------------------------------------------------


def table_to_hex(table: np.ndarray) -> str:
    """Four entries per hex digit, entry ``4j`` in the low bit of digit ``j``; digits in index order."""
    digits = []
    for j in range(0, max(len(table), 1), 4):
        v = 0
        for b in range(4):
            if j + b < len(table) and table[j + b]:
                v |= 1 << b
        digits.append(format(v, "x"))
    return "".join(digits)


def hex_to_table(s: str, size: int) -> np.ndarray:
    expected = max(1, (size + 3) // 4)
    if len(s) != expected:
        raise UsageError(f"expected {expected} hex digits, got {len(s)}")
    out = np.zeros(size, dtype=np.uint8)
    for j, ch in enumerate(s):
        v = int(ch, 16)
        for b in range(4):
            if 4 * j + b < size:
                out[4 * j + b] = (v >> b) & 1
            elif (v >> b) & 1:
                raise UsageError("padding bits must be zero")
    return out


def _format_monomial(m: int) -> str:
    return "+".join(f"x{c}" for c in sorted_coords(m)) if m else "1"


def _parse_monomial(tok: str, n: int) -> int:
    tok = tok.strip()
    if tok == "1":
        return 0
    coords = []
    for part in tok.split("+"):
        part = part.strip()
        if not part.startswith("x"):
            raise UsageError(f"bad variable token {part!r}")
        coords.append(int(part[1:]))
    return coords_to_mask(coords, n)


def _format_term(t: Term) -> str:
    lits = []
    for c in sorted_coords(t.variables):
        lits.append(("!" if (t.neg >> (c - 1)) & 1 else "") + f"x{c}")
    return "+".join(lits) if lits else "1"


def _parse_term(tok: str, n: int) -> Term:
    tok = tok.strip()
    if tok == "1":
        return Term()
    pos = neg = 0
    for part in tok.split("+"):
        part = part.strip()
        negated = part.startswith("!")
        part = part[1:] if negated else part
        if not part.startswith("x"):
            raise UsageError(f"bad literal token {part!r}")
        bit = coords_to_mask([int(part[1:])], n)
        if (pos | neg) & bit:
            raise UsageError("duplicate variable in term")
        if negated:
            neg |= bit
        else:
            pos |= bit
    return Term(pos, neg)


def dumps(f: ExplicitFunction) -> str:
    """Serialize to the two-line text format (``n=``, then ``tt=``/``poly=``/``termfn=``)."""
    if isinstance(f, SparsePoly):
        body = "poly=" + ",".join(_format_monomial(m) for m in f.monomials)
    elif isinstance(f, TermFunction):
        body = f"termfn={f.s};{table_to_hex(f.outer)};" + ",".join(_format_term(t) for t in f.terms)
    elif isinstance(f, Junta):
        terms = [Term(pos=1 << (c - 1)) for c in f.coords]
        return dumps(TermFunction(f.n, f.inner, tuple(terms)))
    else:
        body = "tt=" + table_to_hex(f.truth_table())
    return f"n={f.n}\n{body}\n"


def loads(text: str) -> ExplicitFunction:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) != 2 or not lines[0].startswith("n="):
        raise UsageError("function file must have exactly two lines: n=..., then a body")
    n = int(lines[0][2:])
    key, _, val = lines[1].partition("=")
    if key == "tt":
        return TruthTable(n, hex_to_table(val, 1 << n))
    if key == "poly":
        monos = [_parse_monomial(t, n) for t in val.split(",")] if val else []
        if len(set(monos)) != len(monos):
            raise UsageError("duplicate monomial")
        return SparsePoly(n, tuple(monos))
    if key == "termfn":
        s_str, outer_hex, term_str = val.split(";")
        s = int(s_str)
        terms = tuple(_parse_term(t, n) for t in term_str.split(",")) if term_str else ()
        if len(terms) != s:
            raise UsageError(f"termfn declares s={s} but lists {len(terms)} terms")
        return TermFunction(n, hex_to_table(outer_hex, 1 << s), terms)
    raise UsageError(f"unknown body kind {key!r}")


def dumps_fourier(g: FourierExpansion) -> str:
    lines = [f"n={g.n}"]
    for S in sorted(g.coeffs, key=lambda S: (popcount(S), sorted_coords(S))):
        c = g.coeffs[S]
        lines.append(f"{_format_monomial(S)}:{c.numerator}/{c.denominator}")
    return "\n".join(lines) + "\n"


def loads_fourier(text: str) -> FourierExpansion:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    n = int(lines[0][2:])
    coeffs = {}
    for ln in lines[1:]:
        S, _, c = ln.rpartition(":")
        num, den = c.split("/")
        coeffs[_parse_monomial(S, n)] = Fraction(int(num), int(den))
    return FourierExpansion(n, coeffs)
