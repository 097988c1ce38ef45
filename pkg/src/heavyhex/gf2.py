"""
Bit-packed linear algebra over GF(2).

Vectors are stored as Python integers where bit ``k`` holds coordinate ``k``,
so the integer value of a vector is exactly its lexicographic weight
``sum(2**k * v[k])``.  Batch helpers operate on ``numpy.uint64`` arrays using
the same packing (lengths up to 64 bits).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class BitVec:
    """Fixed-length bit vector, packed into a single integer."""

    value: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.value < 0 or self.value >> self.length:
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def zeros(cls, length: int) -> "BitVec":
        return cls(0, length)

    @classmethod
    def from_indices(cls, indices: Iterable[int], length: int) -> "BitVec":
        v = 0
        for k in indices:
            if not 0 <= k < length:
                raise ValueError(f"index {k} out of range for length {length}")
            v ^= 1 << k
        return cls(v, length)

    @classmethod
    def from_str(cls, s: str) -> "BitVec":
        """Parse a '0'/'1' string, index 0 leftmost."""
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {s!r}")
        return cls(int(s[::-1], 2), len(s))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BitVec":
        return cls.from_str("".join("1" if b else "0" for b in bits))

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b")[::-1]

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, k: int) -> int:
        if not 0 <= k < self.length:
            raise IndexError(k)
        return (self.value >> k) & 1

    def __xor__(self, other: "BitVec") -> "BitVec":
        return xor(self, other)

    def __bool__(self) -> bool:
        return self.value != 0

    def indices(self) -> list[int]:
        return [k for k in range(self.length) if (self.value >> k) & 1]

    def weight(self) -> int:
        return self.value.bit_count()

    def to_array(self) -> np.ndarray:
        return unpack_bits(np.array([self.value], dtype=np.uint64), self.length)[0]


def xor(a: BitVec, b: BitVec) -> BitVec:
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} != {b.length}")
    return BitVec(a.value ^ b.value, a.length)


@dataclass(frozen=True)
class GF2Matrix:
    """Row-major binary matrix; each row is a packed integer of ``cols`` bits."""

    rows: tuple[int, ...]
    cols: int

    def __post_init__(self):
        for r in self.rows:
            if r < 0 or r >> self.cols:
                raise ValueError(f"row {r} does not fit in {self.cols} columns")

    @classmethod
    def from_bitvecs(cls, vecs: Sequence[BitVec], cols: int | None = None) -> "GF2Matrix":
        if cols is None:
            if not vecs:
                raise ValueError("cols required for an empty matrix")
            cols = vecs[0].length
        for v in vecs:
            if v.length != cols:
                raise ValueError(f"row length {v.length} != {cols}")
        return cls(tuple(v.value for v in vecs), cols)

    @classmethod
    def from_array(cls, a) -> "GF2Matrix":
        a = np.asarray(a, dtype=np.uint8) & 1
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(tuple(int(x) for x in pack_bits(a)), a.shape[1])

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def row(self, i: int) -> BitVec:
        return BitVec(self.rows[i], self.cols)

    def to_array(self) -> np.ndarray:
        return unpack_bits(np.array(self.rows, dtype=np.uint64), self.cols)


@dataclass(frozen=True)
class ReducedBasis:
    """Fully reduced echelon basis with pivots at the highest available columns.

    ``rows[i]`` has its most significant set bit at ``pivot_cols[i]`` and every
    other row is zero in that column.  Pivots are strictly decreasing.
    """

    rows: tuple[int, ...]
    pivot_cols: tuple[int, ...]
    cols: int

    @property
    def basis(self) -> GF2Matrix:
        return GF2Matrix(self.rows, self.cols)

    @property
    def rank(self) -> int:
        return len(self.rows)


def reduce(m: GF2Matrix) -> ReducedBasis:
    """Gauss-Jordan elimination choosing the highest column as pivot."""
    # invariant: pivots[p] has top bit p and is zero at every other pivot
    pivots: dict[int, int] = {}
    for r in m.rows:
        for p, row in pivots.items():
            if (r >> p) & 1:
                r ^= row
        if r == 0:
            continue
        p = r.bit_length() - 1
        # only rows with a higher pivot can carry bit p
        for q, row in pivots.items():
            if (row >> p) & 1:
                pivots[q] = row ^ r
        pivots[p] = r
    order = sorted(pivots, reverse=True)
    return ReducedBasis(tuple(pivots[p] for p in order), tuple(order), m.cols)


def rank(m: GF2Matrix) -> int:
    return reduce(m).rank


def _check_len(basis: ReducedBasis, v: BitVec):
    if v.length != basis.cols:
        raise ValueError(f"length mismatch: {v.length} != {basis.cols}")


def leader_int(basis: ReducedBasis, x: int) -> int:
    for row, p in zip(basis.rows, basis.pivot_cols):
        if (x >> p) & 1:
            x ^= row
    return x


def in_span(basis: ReducedBasis, v: BitVec) -> bool:
    _check_len(basis, v)
    return leader_int(basis, v.value) == 0


def project_to_leader(basis: ReducedBasis, v: BitVec) -> BitVec:
    """Smallest-integer element of the coset ``v + span(basis)``.

    Scanning pivots from the top and clearing each set pivot bit fixes the
    most significant free choices first, which is exactly the integer minimum.
    """
    _check_len(basis, v)
    return BitVec(leader_int(basis, v.value), v.length)


def project_to_leader_packed(basis: ReducedBasis, arr: np.ndarray) -> np.ndarray:
    """Vectorised :func:`project_to_leader` over a ``uint64`` array."""
    out = np.array(arr, dtype=np.uint64, copy=True)
    one = np.uint64(1)
    for row, p in zip(basis.rows, basis.pivot_cols):
        hit = (out >> np.uint64(p)) & one
        out ^= hit * np.uint64(row)
    return out


def span_elements(rows: Sequence[int]) -> np.ndarray:
    """All ``2**len(rows)`` XOR combinations of ``rows`` (element ``i`` uses the rows set in ``i``)."""
    span = np.zeros(1, dtype=np.uint64)
    for r in rows:
        span = np.concatenate([span, span ^ np.uint64(r)])
    return span


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack an ``(N, n)`` 0/1 array into ``uint64`` with column ``k`` at bit ``k``."""
    bits = np.asarray(bits)
    n = bits.shape[-1]
    if n > 64:
        raise ValueError("at most 64 bits can be packed")
    weights = np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))
    return (bits.astype(np.uint64) * weights).sum(axis=-1, dtype=np.uint64)


def unpack_bits(packed: np.ndarray, n: int) -> np.ndarray:
    packed = np.asarray(packed, dtype=np.uint64)
    shifts = np.arange(n, dtype=np.uint64)
    return ((packed[..., None] >> shifts) & np.uint64(1)).astype(np.uint8)


def parity_packed(arr: np.ndarray, mask: int) -> np.ndarray:
    return (np.bitwise_count(np.asarray(arr, dtype=np.uint64) & np.uint64(mask)) & 1).astype(np.uint8)
