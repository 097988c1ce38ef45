"""Gauge-equivalence class representatives for bit-flip and phase-flip error strings.

Two X-type error strings are equivalent when they differ by a product of X
gauge generators; the representative of a class is its member with the
smallest lexicographic weight ``sum(2**k * e[k])``.  Three routes compute it
for bit flips: exhaustive search over the materialised gauge span, a
streaming rank test against previously seen errors, and a direct coset-leader
projection against a reduced basis.  Phase flips fold every column onto the
top row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .code import CodeLayout, syndrome_bitflip
from .gf2 import (
    BitVec,
    GF2Matrix,
    ReducedBasis,
    leader_int,
    pack_bits,
    project_to_leader,
    project_to_leader_packed,
    rank,
    reduce,
    span_elements,
    unpack_bits,
)

SPAN_CAP = 2**13
BITFLIP_METHODS = ("search", "rank", "exact")


class SpanNotMaterialized(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GaugeBasis:
    generators: GF2Matrix
    reduced: ReducedBasis
    full_span: np.ndarray | None = None

    @property
    def n_qubits(self) -> int:
        return self.generators.cols


@dataclass(frozen=True)
class CanonicalRecord:
    raw: BitVec
    representative: BitVec
    lex_weight: int


def make_gauge_basis(generators: Sequence[BitVec], span_cap: int = SPAN_CAP) -> GaugeBasis:
    m = GF2Matrix.from_bitvecs(list(generators))
    red = reduce(m)
    if red.rank != m.n_rows:
        raise ValueError(f"gauge generators are dependent: rank {red.rank} < {m.n_rows}")
    span = span_elements(m.rows) if 2**m.n_rows <= span_cap else None
    return GaugeBasis(m, red, span)


_BASES: dict[tuple[int, int], GaugeBasis] = {}


def x_gauge_basis(layout: CodeLayout, span_cap: int = SPAN_CAP) -> GaugeBasis:
    """X gauge basis for ``layout`` (memoised per distance and span cap)."""
    key = (layout.d, span_cap)
    if key not in _BASES:
        _BASES[key] = make_gauge_basis(layout.x_gauge_generators, span_cap)
    return _BASES[key]


def lex_weight(e) -> int:
    if isinstance(e, BitVec):
        return e.value
    return sum(1 << k for k, b in enumerate(e) if b)


def canonical_bitflip_search(e: BitVec, gb: GaugeBasis) -> BitVec:
    """Minimum-weight member of ``e + span`` by exhaustive scan of the full span."""
    if gb.full_span is None:
        raise SpanNotMaterialized(
            f"gauge span of 2**{gb.generators.n_rows} elements exceeds the span cap; "
            "use the exact method instead"
        )
    if e.length != gb.n_qubits:
        raise ValueError(f"error length {e.length} != {gb.n_qubits}")
    best = int(np.min(gb.full_span ^ np.uint64(e.value)))
    return BitVec(best, e.length)


def canonical_bitflip_exact(e: BitVec, gb: GaugeBasis) -> BitVec:
    return project_to_leader(gb.reduced, e)


def canonical_phaseflip(e: BitVec, d: int) -> BitVec:
    """Fold each column's parity into its top-row qubit and clear the rest."""
    n = d * d
    if e.length != n:
        raise ValueError(f"error length {e.length} != {n}")
    v = e.value
    for j in range(d, n):
        if (v >> j) & 1:
            v ^= (1 << (j % d)) | (1 << j)
    return BitVec(v, n)


def rank_equivalent(gb: GaugeBasis, a: int, b: int) -> bool:
    """Literal rank test: appending ``a ^ b`` to the generators keeps the rank."""
    m = gb.generators
    return rank(GF2Matrix(m.rows + (a ^ b,), m.cols)) == m.n_rows


def canonical_bitflip_rank(
    errors: Sequence[BitVec],
    layout: CodeLayout,
    gb: GaugeBasis,
    unify: bool = True,
    literal: bool = False,
) -> list[BitVec]:
    """Streaming rank-based minimisation over a sequence of bit-flip errors.

    Error ``j`` is compared with earlier errors carrying the same syndrome and
    replaced by the lightest one that is gauge equivalent (or kept if none is
    lighter).  The running answer can only be an error already seen in the
    stream.  With ``unify`` each class found in the stream is then mapped to
    its global lexicographic minimum (one leader projection per class), so the
    output agrees with the search and exact methods.

    ``literal`` rescans every earlier error and recomputes the rank each time.
    The default keeps one running minimum per (syndrome, class), which gives
    the same output because equivalence is transitive.
    """
    n = layout.n_qubits
    for e in errors:
        if e.length != n:
            raise ValueError(f"error length {e.length} != {n}")
    if literal:
        return _rank_literal(errors, layout, gb, unify)

    red = gb.reduced
    checks = [s.value for s in layout.z_stabilizers]
    # syndrome -> list of [reference member, running minimum]
    table: dict[int, list[list[int]]] = {}
    out: list[int] = []
    owner: list[list[int]] = []
    for e in errors:
        v = e.value
        syn = 0
        for k, c in enumerate(checks):
            syn |= ((c & v).bit_count() & 1) << k
        buckets = table.setdefault(syn, [])
        for b in buckets:
            if leader_int(red, v ^ b[0]) == 0:
                if v < b[1]:
                    b[1] = v
                out.append(b[1])
                owner.append(b)
                break
        else:
            b = [v, v]
            buckets.append(b)
            out.append(v)
            owner.append(b)
    if unify:
        for buckets in table.values():
            for b in buckets:
                b[1] = leader_int(red, b[1])
        out = [b[1] for b in owner]
    return [BitVec(v, n) for v in out]


def _rank_literal(errors, layout, gb, unify):
    n = layout.n_qubits
    vals = [e.value for e in errors]
    syns = [syndrome_bitflip(layout, e).value for e in errors]
    out = []
    for j, v in enumerate(vals):
        best = v
        for i in range(j):
            if syns[i] == syns[j] and rank_equivalent(gb, v, vals[i]) and vals[i] < best:
                best = vals[i]
        out.append(best)
    if unify:
        out = [leader_int(gb.reduced, v) for v in out]
    return [BitVec(v, n) for v in out]


def canonical_record(e: BitVec, gb: GaugeBasis) -> CanonicalRecord:
    rep = canonical_bitflip_exact(e, gb)
    return CanonicalRecord(e, rep, rep.value)


def canonicalize_x_packed(packed: np.ndarray, layout: CodeLayout, method: str, gb: GaugeBasis | None = None):
    """Canonicalise a ``uint64`` array of X error strings with ``method``."""
    gb = gb or x_gauge_basis(layout)
    packed = np.asarray(packed, dtype=np.uint64)
    n = layout.n_qubits
    if method == "exact":
        return project_to_leader_packed(gb.reduced, packed)
    if method == "search":
        if gb.full_span is None:
            raise SpanNotMaterialized(
                f"search method needs the full gauge span; d={layout.d} exceeds the span cap"
            )
        return np.array(
            [canonical_bitflip_search(BitVec(int(v), n), gb).value for v in packed], dtype=np.uint64
        )
    if method == "rank":
        reps = canonical_bitflip_rank([BitVec(int(v), n) for v in packed], layout, gb)
        return np.array([r.value for r in reps], dtype=np.uint64)
    raise ValueError(f"unknown bit-flip canonical method {method!r}")


def canonicalize_z_array(errors: np.ndarray, d: int) -> np.ndarray:
    """Vectorised phase-flip fold for an ``(N, d*d)`` 0/1 array."""
    errors = np.asarray(errors, dtype=np.uint8)
    cols = errors.reshape(-1, d, d).sum(axis=1) & 1
    out = np.zeros_like(errors)
    out[:, :d] = cols
    return out


def canonicalize_x_array(errors: np.ndarray, layout: CodeLayout, method: str = "exact") -> np.ndarray:
    packed = pack_bits(np.asarray(errors, dtype=np.uint8))
    return unpack_bits(canonicalize_x_packed(packed, layout, method), layout.n_qubits)


def count_classes(layout: CodeLayout, error_type: str, exhaustive: bool | None = None) -> int:
    """Number of gauge-inequivalent error classes.

    Uses the closed forms ``2**((d*d+1)/2)`` (bit flip) and ``2**d`` (phase
    flip); when ``exhaustive`` (default for d=3) every error string is
    canonicalised and the distinct representatives counted instead.
    """
    d = layout.d
    if error_type not in ("bitflip", "phaseflip"):
        raise ValueError(f"error_type must be 'bitflip' or 'phaseflip', got {error_type!r}")
    if exhaustive is None:
        exhaustive = d == 3
    if not exhaustive:
        return 2 ** ((d * d + 1) // 2) if error_type == "bitflip" else 2**d
    n = layout.n_qubits
    if d > 3:
        raise ValueError("exhaustive class counting is limited to d=3")
    everything = np.arange(2**n, dtype=np.uint64)
    if error_type == "bitflip":
        reps = project_to_leader_packed(x_gauge_basis(layout).reduced, everything)
        return int(np.unique(reps).size)
    folded = canonicalize_z_array(unpack_bits(everything, n), d)
    return int(np.unique(pack_bits(folded)).size)
