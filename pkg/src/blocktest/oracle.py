"""Query-counted black-box access.

Every tester touches its input only through a :class:`QueryOracle`.  Derived
oracles (restrictions, block collapses, projections, anchored views) answer
by querying their parent at a transformed point, so one derived query costs
exactly one query at the root.

Batches can be evaluated speculatively with :meth:`QueryOracle.peek_many` and
then charged with :meth:`QueryOracle.charge` for the prefix an algorithm
actually consumed.  Counters and transcripts therefore match the sequential
algorithm query for query, while evaluation stays vectorized.
"""

from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from typing import Callable

import numpy as np

from .bits import (
    UsageError,
    as_word,
    batch_blow_up,
    batch_splice,
    blow_up,
    check_point,
    full_mask,
    setbit,
    to_batch,
    to_hex,
)
from .functions import ExplicitFunction


class QueryOracle:
    """Black-box Boolean function on {0,1}^n with a monotone query counter."""

    def __init__(self, n: int):
        if n < 0:
            raise UsageError("arity must be non-negative")
        self.n = n
        self._count = 0
        self._lock = threading.Lock()

    # subclasses implement the pure evaluation and how a charge propagates
    def _eval(self, x: int) -> int:
        raise NotImplementedError

    def _eval_many(self, xs: np.ndarray) -> np.ndarray:
        return np.fromiter((self._eval(int(x)) for x in xs), dtype=np.uint8, count=len(xs))

    def _forward(self, xs: np.ndarray, answers: np.ndarray) -> None:
        """Propagate a charge to the parent (root oracles record instead)."""

    @property
    def queries_used(self) -> int:
        return self._count

    @property
    def root(self) -> "QueryOracle":
        return self

    def free_mask(self) -> int:
        """Coordinates the oracle can structurally depend on (known without queries)."""
        return full_mask(self.n)

    def __call__(self, x: int) -> int:
        x = int(x)
        v = self._eval(x)
        self.charge(to_batch([x], self.n), np.array([v], dtype=np.uint8))
        return v

    def query_many(self, xs: np.ndarray) -> np.ndarray:
        answers = self._eval_many(xs)
        self.charge(xs, answers)
        return answers

    def peek_many(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate without charging; pair with :meth:`charge` on the consumed prefix."""
        return self._eval_many(xs)

    def charge(self, xs: np.ndarray, answers: np.ndarray) -> None:
        if len(xs) == 0:
            return
        with self._lock:
            self._count += len(xs)
        self._forward(xs, answers)


class FunctionOracle(QueryOracle):
    """Root oracle around an explicit function or a plain ``int -> bit`` callable.

    Holds the current stage tag (see :meth:`stage`), per-stage query counts,
    and an optional transcript of every query.
    """

    def __init__(self, f: ExplicitFunction | Callable[[int], int], n: int | None = None, record: bool = False):
        if n is None:
            n = f.n
        super().__init__(n)
        self.f = f
        self._stage = "unstaged"
        self.stage_counts: dict[str, int] = {}
        self.transcript: list[tuple[str, int, int]] | None = [] if record else None

    def _eval(self, x: int) -> int:
        return int(self.f(x)) & 1

    def _eval_many(self, xs: np.ndarray) -> np.ndarray:
        if isinstance(self.f, ExplicitFunction):
            return np.asarray(self.f.evaluate_many(xs), dtype=np.uint8)
        return super()._eval_many(xs)

    def free_mask(self) -> int:
        if isinstance(self.f, ExplicitFunction):
            return self.f.support_mask()
        return full_mask(self.n)

    def _forward(self, xs, answers):
        with self._lock:
            self.stage_counts[self._stage] = self.stage_counts.get(self._stage, 0) + len(xs)
        if self.transcript is not None:
            st = self._stage
            self.transcript.extend((st, int(x), int(a)) for x, a in zip(xs, answers))

    @contextmanager
    def stage(self, name: str):
        prev, self._stage = self._stage, name
        try:
            yield self
        finally:
            self._stage = prev

    def transcript_lines(self) -> list[str]:
        if self.transcript is None:
            return []
        return [
            json.dumps({"stage": st, "x": to_hex(x, self.n), "answer": a}, separators=(",", ":"))
            for st, x, a in self.transcript
        ]


@contextmanager
def stage(oracle: QueryOracle, name: str):
    """Tag queries reaching ``oracle``'s root with ``name`` (no-op for foreign roots)."""
    root = oracle.root
    if isinstance(root, FunctionOracle):
        with root.stage(name):
            yield
    else:
        yield


class MappedOracle(QueryOracle):
    """Answers ``parent(transform(x))``; subclasses supply the point map."""

    def __init__(self, parent: QueryOracle, n: int):
        super().__init__(n)
        self.parent = parent

    @property
    def root(self) -> QueryOracle:
        return self.parent.root

    def _map(self, x: int) -> int:
        raise NotImplementedError

    def _map_many(self, xs: np.ndarray) -> np.ndarray:
        return to_batch((self._map(int(x)) for x in xs), self.parent.n)

    def _eval(self, x: int) -> int:
        return self.parent._eval(self._map(x))

    def _eval_many(self, xs: np.ndarray) -> np.ndarray:
        return self.parent._eval_many(self._map_many(xs))

    def _forward(self, xs, answers):
        self.parent.charge(self._map_many(xs), answers)


class SpliceOracle(MappedOracle):
    """``x ↦ parent(x_keep ∘ base_{rest})``: coordinates outside ``keep`` are pinned to ``base``."""

    def __init__(self, parent: QueryOracle, keep: int, base: int):
        super().__init__(parent, parent.n)
        check_point(base, parent.n)
        self.keep = keep & full_mask(parent.n)
        self.base = base & ~self.keep

    def _map(self, x: int) -> int:
        return (x & self.keep) | self.base

    def _map_many(self, xs):
        return batch_splice(xs, self.base, self.keep, self.n)

    def free_mask(self) -> int:
        return self.keep & self.parent.free_mask()


def restrict(f: QueryOracle, i: int, xi: int) -> QueryOracle:
    """``f_{|x_i ← ξ}`` as an n-ary oracle; one parent query per query."""
    if not 1 <= i <= f.n:
        raise UsageError(f"coordinate {i} outside [1, {f.n}]")
    keep = full_mask(f.n) & ~(1 << (i - 1))
    return SpliceOracle(f, keep, setbit(0, i, xi))


class BlowUpOracle(MappedOracle):
    """``y ↦ parent(y_1^{B_1} ∘ ... ∘ y_m^{B_m} ∘ base_{rest})`` over m = len(blocks) variables."""

    def __init__(self, parent: QueryOracle, blocks: list[int], base: int = 0):
        super().__init__(parent, len(blocks))
        self.blocks = list(blocks)
        covered = 0
        for b in self.blocks:
            if b & covered:
                raise UsageError("blocks must be disjoint")
            covered |= b
        self.covered = covered
        self.base = base & ~covered & full_mask(parent.n)

    def _map(self, y: int) -> int:
        return blow_up(y, self.blocks) | self.base

    def _map_many(self, ys):
        out = batch_blow_up(ys, self.blocks, self.parent.n, self.n)
        return out | as_word(self.base, self.parent.n) if self.base else out

    def free_mask(self) -> int:
        pf = self.parent.free_mask()
        return sum(1 << b for b, m in enumerate(self.blocks) if m & pf)


class ProjectionOracle(MappedOracle):
    """``x ↦ parent((x & keep) | ones)``: the R_p style zero-one projection."""

    def __init__(self, parent: QueryOracle, keep: int, ones: int):
        super().__init__(parent, parent.n)
        self.keep = keep
        self.ones = ones & ~keep

    def _map(self, x: int) -> int:
        return (x & self.keep) | self.ones

    def _map_many(self, xs):
        return (xs & as_word(self.keep, self.n)) | as_word(self.ones, self.n)

    def free_mask(self) -> int:
        return self.keep & self.parent.free_mask()
