"""Assignment and coordinate-set algebra.

An assignment over ``n`` coordinates is a plain Python ``int`` whose bit
``i - 1`` holds coordinate ``i`` (coordinates are 1-indexed).  A coordinate
set is a ``frozenset`` of 1-indexed coordinates; most hot paths carry the
equivalent bitmask instead.

Batches of assignments are numpy arrays: ``uint64`` when ``n <= 64`` and
``object`` arrays of Python ints otherwise, so the same bitwise expressions
work at every arity.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

WORD_BITS = 64


class UsageError(ValueError):
    """Raised when an operation is called outside its preconditions."""


class CapabilityError(RuntimeError):
    """Raised when an exact computation would exceed desk-scale limits."""


def full_mask(n: int) -> int:
    return (1 << n) - 1


def coords_to_mask(coords: Iterable[int], n: int | None = None) -> int:
    m = 0
    for i in coords:
        if i < 1 or (n is not None and i > n):
            raise UsageError(f"coordinate {i} outside [1, {n}]")
        m |= 1 << (i - 1)
    return m


def mask_to_coords(mask: int) -> frozenset[int]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def sorted_coords(mask: int) -> list[int]:
    return sorted(mask_to_coords(mask))


def check_point(x: int, n: int) -> None:
    if x < 0 or x >> n:
        raise UsageError(f"assignment {x:#x} does not fit in {n} coordinates")


def splice(x: int, y: int, V: int | Iterable[int], n: int | None = None) -> int:
    """Return ``x_V ∘ y_{V̄}``: coordinates of ``V`` from ``x``, the rest from ``y``."""
    if not isinstance(V, int):
        V = coords_to_mask(V, n)
    if n is not None:
        check_point(x, n)
        check_point(y, n)
        if V >> n:
            raise UsageError("coordinate set exceeds arity")
    return (x & V) | (y & ~V)


def flip(x: int, j: int) -> int:
    return x ^ (1 << (j - 1))


def get(x: int, j: int) -> int:
    return (x >> (j - 1)) & 1


def setbit(x: int, j: int, value: int) -> int:
    b = 1 << (j - 1)
    return (x | b) if value else (x & ~b)


def complement(x: int, n: int) -> int:
    return x ^ full_mask(n)


def popcount(x: int) -> int:
    return bin(x).count("1")


def to_hex(x: int, n: int) -> str:
    width = max(1, (n + 3) // 4)
    return format(x, f"0{width}x")


def from_hex(s: str) -> int:
    return int(s, 16)


def to_bitstring(x: int, n: int) -> str:
    """Coordinates 1..n left to right."""
    return "".join(str(get(x, i)) for i in range(1, n + 1))


def from_bitstring(s: str) -> int:
    x = 0
    for i, ch in enumerate(s, start=1):
        if ch == "1":
            x |= 1 << (i - 1)
        elif ch != "0":
            raise UsageError(f"bad bit character {ch!r}")
    return x


def blow_up(y: int, blocks: list[int]) -> int:
    """Assignment with every coordinate of ``blocks[b]`` set to bit ``b`` of ``y``."""
    x = 0
    for b, m in enumerate(blocks):
        if (y >> b) & 1:
            x |= m
    return x


# --- batches -------------------------------------------------------------


def batch_dtype(n: int):
    return np.uint64 if n <= WORD_BITS else object


def as_word(mask: int, n: int):
    """A mask in the scalar type matching ``batch_dtype(n)``."""
    return np.uint64(mask) if n <= WORD_BITS else int(mask)


def to_batch(points: Iterable[int], n: int) -> np.ndarray:
    if n <= WORD_BITS:
        return np.fromiter((int(p) for p in points), dtype=np.uint64)
    return np.array([int(p) for p in points], dtype=object)


def batch_bit(xs: np.ndarray, j: int, n: int) -> np.ndarray:
    """Bit of coordinate ``j`` across a batch, as uint8."""
    if n <= WORD_BITS:
        return ((xs >> np.uint64(j - 1)) & np.uint64(1)).astype(np.uint8)
    return np.array([(int(x) >> (j - 1)) & 1 for x in xs], dtype=np.uint8)


def batch_splice(xs: np.ndarray, ys, V: int, n: int) -> np.ndarray:
    """``x_V ∘ y_{V̄}`` elementwise; ``ys`` may be a batch or a scalar assignment."""
    vm = as_word(V, n)
    nm = as_word(full_mask(n) & ~V, n)
    if not isinstance(ys, np.ndarray):
        ys = as_word(ys, n)
    return (xs & vm) | (ys & nm)


def batch_blow_up(ys: np.ndarray, blocks: list[int], n: int, arity: int) -> np.ndarray:
    """Vectorized :func:`blow_up` from an ``arity``-bit batch into ``n`` bits."""
    out = np.zeros(len(ys), dtype=batch_dtype(n))
    for b, m in enumerate(blocks):
        bits = batch_bit(ys, b + 1, arity)
        if n <= WORD_BITS:
            out |= bits.astype(np.uint64) * np.uint64(m)
        else:
            out = np.array([o | (m if t else 0) for o, t in zip(out, bits)], dtype=object)
    return out


def batch_popcount_parity(xs: np.ndarray, n: int) -> np.ndarray:
    """Parity of the set bits of each element, as uint8."""
    if n <= WORD_BITS:
        v = xs.copy()
        for s in (32, 16, 8, 4, 2, 1):
            v ^= v >> np.uint64(s)
        return (v & np.uint64(1)).astype(np.uint8)
    return np.array([popcount(int(x)) & 1 for x in xs], dtype=np.uint8)
