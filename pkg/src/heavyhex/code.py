"""Distance-d heavy hexagonal code: gauge generators, stabilizers, logicals, syndromes.

Data qubit at 1-based (row i, column j) has linear index ``(i-1)*d + (j-1)``.
Weight-4 X gauge plaquettes sit at top-left corners with ``i+j`` odd and
weight-4 Z stabilizer plaquettes at ``i+j`` even.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .gf2 import BitVec, GF2Matrix, in_span, pack_bits, reduce


def _idx(d: int, i: int, j: int) -> int:
    return (i - 1) * d + (j - 1)


def _support(d: int, cells) -> BitVec:
    return BitVec.from_indices([_idx(d, i, j) for i, j in cells], d * d)


def check_distance(d) -> int:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise ValueError(f"d must be an integer, got {d!r}")
    d = int(d)
    if d % 2 == 0:
        raise ValueError("d must be odd")
    if d < 3:
        raise ValueError("d must be >= 3")
    return d


@dataclass(frozen=True)
class Syndrome:
    z_bits: BitVec
    x_bits: BitVec

    def __str__(self) -> str:
        return f"{self.z_bits}|{self.x_bits}"


@dataclass(frozen=True, eq=False)
class CodeLayout:
    d: int
    x_gauge_generators: tuple[BitVec, ...]
    z_gauge_generators: tuple[BitVec, ...]
    z_stabilizers: tuple[BitVec, ...]
    x_stabilizers: tuple[BitVec, ...]
    logical_x: BitVec
    logical_z: BitVec

    @property
    def n_qubits(self) -> int:
        return self.d * self.d

    @property
    def n_z_stabilizers(self) -> int:
        return len(self.z_stabilizers)

    @property
    def n_x_stabilizers(self) -> int:
        return len(self.x_stabilizers)

    @cached_property
    def z_check_matrix(self) -> np.ndarray:
        """``(n_z_stabilizers, d*d)`` 0/1 matrix; detects X errors."""
        return GF2Matrix.from_bitvecs(self.z_stabilizers).to_array()

    @cached_property
    def x_check_matrix(self) -> np.ndarray:
        return GF2Matrix.from_bitvecs(self.x_stabilizers).to_array()

    def to_json(self) -> dict:
        def ops(vs):
            return [v.indices() for v in vs]

        return {
            "d": self.d,
            "n_qubits": self.n_qubits,
            "counts": {
                "x_gauge_generators": len(self.x_gauge_generators),
                "z_gauge_generators": len(self.z_gauge_generators),
                "z_stabilizers": len(self.z_stabilizers),
                "x_stabilizers": len(self.x_stabilizers),
            },
            "x_gauge_generators": ops(self.x_gauge_generators),
            "z_gauge_generators": ops(self.z_gauge_generators),
            "z_stabilizers": ops(self.z_stabilizers),
            "x_stabilizers": ops(self.x_stabilizers),
            "logical_x": self.logical_x.indices(),
            "logical_z": self.logical_z.indices(),
        }


_LAYOUTS: dict[int, CodeLayout] = {}


def build_layout(d: int) -> CodeLayout:
    """Construct (and memoise) the distance-``d`` layout."""
    d = check_distance(d)
    if d in _LAYOUTS:
        return _LAYOUTS[d]
    half = (d - 1) // 2

    x_gauge = []
    for i in range(1, d):
        for j in range(1, d):
            if (i + j) % 2 == 1:
                x_gauge.append(_support(d, [(i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1)]))
    x_gauge += [_support(d, [(1, 2 * m - 1), (1, 2 * m)]) for m in range(1, half + 1)]
    x_gauge += [_support(d, [(d, 2 * m), (d, 2 * m + 1)]) for m in range(1, half + 1)]

    z_gauge = [_support(d, [(i, j), (i + 1, j)]) for i in range(1, d) for j in range(1, d + 1)]

    z_stab = []
    for i in range(1, d):
        for j in range(1, d):
            if (i + j) % 2 == 0:
                z_stab.append(_support(d, [(i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1)]))
    z_stab += [_support(d, [(2 * m - 1, d), (2 * m, d)]) for m in range(1, half + 1)]
    z_stab += [_support(d, [(2 * m, 1), (2 * m + 1, 1)]) for m in range(1, half + 1)]

    x_stab = [
        _support(d, [(i, c) for i in range(1, d + 1) for c in (j, j + 1)]) for j in range(1, d)
    ]

    logical_x = _support(d, [(i, 1) for i in range(1, d + 1)])
    logical_z = _support(d, [(1, j) for j in range(1, d + 1)])

    layout = CodeLayout(
        d=d,
        x_gauge_generators=tuple(x_gauge),
        z_gauge_generators=tuple(z_gauge),
        z_stabilizers=tuple(z_stab),
        x_stabilizers=tuple(x_stab),
        logical_x=logical_x,
        logical_z=logical_z,
    )
    _LAYOUTS[d] = layout
    return layout


def logical_ops(layout: CodeLayout) -> tuple[BitVec, BitVec]:
    return layout.logical_x, layout.logical_z


def _syndrome(checks, e: BitVec, n: int) -> BitVec:
    if e.length != n:
        raise ValueError(f"error length {e.length} != {n}")
    bits = 0
    for s, c in enumerate(checks):
        bits |= ((c.value & e.value).bit_count() & 1) << s
    return BitVec(bits, len(checks))


def syndrome_bitflip(layout: CodeLayout, e: BitVec) -> BitVec:
    """Z-stabilizer outcomes for an X-type error string."""
    return _syndrome(layout.z_stabilizers, e, layout.n_qubits)


def syndrome_phaseflip(layout: CodeLayout, e: BitVec) -> BitVec:
    """X-stabilizer (column strip) outcomes for a Z-type error string."""
    return _syndrome(layout.x_stabilizers, e, layout.n_qubits)


def syndrome(layout: CodeLayout, e_x: BitVec, e_z: BitVec) -> Syndrome:
    return Syndrome(syndrome_bitflip(layout, e_x), syndrome_phaseflip(layout, e_z))


def batch_syndrome(checks: np.ndarray, errors: np.ndarray) -> np.ndarray:
    """Syndromes for an ``(N, n)`` 0/1 error array against an ``(m, n)`` check matrix."""
    errors = np.asarray(errors, dtype=np.uint8)
    return ((errors.astype(np.int32) @ checks.T.astype(np.int32)) & 1).astype(np.uint8)


def verify_layout(layout: CodeLayout) -> list[str]:
    """Return a list of violated structural invariants (empty when consistent)."""
    problems = []
    d = layout.d
    expected = {
        "x_gauge_generators": (d * d - 1) // 2,
        "z_gauge_generators": d * (d - 1),
        "z_stabilizers": (d * d - 1) // 2,
        "x_stabilizers": d - 1,
    }
    for name, n in expected.items():
        if len(getattr(layout, name)) != n:
            problems.append(f"{name}: expected {n}, got {len(getattr(layout, name))}")

    xg = reduce(GF2Matrix.from_bitvecs(layout.x_gauge_generators))
    zg = reduce(GF2Matrix.from_bitvecs(layout.z_gauge_generators))
    for k, s in enumerate(layout.z_stabilizers):
        if not in_span(zg, s):
            problems.append(f"z_stabilizer {k} not in Z gauge span")
    for k, s in enumerate(layout.x_stabilizers):
        if not in_span(xg, s):
            problems.append(f"x_stabilizer {k} not in X gauge span")

    def odd(a, b):
        return (a.value & b.value).bit_count() & 1

    for a, g in enumerate(layout.x_gauge_generators):
        for b, s in enumerate(layout.z_stabilizers):
            if odd(g, s):
                problems.append(f"x_gauge {a} anticommutes with z_stabilizer {b}")
    for a, g in enumerate(layout.z_gauge_generators):
        for b, s in enumerate(layout.x_stabilizers):
            if odd(g, s):
                problems.append(f"z_gauge {a} anticommutes with x_stabilizer {b}")
    for b, s in enumerate(layout.z_stabilizers):
        if odd(layout.logical_x, s):
            problems.append(f"logical_x anticommutes with z_stabilizer {b}")
    for b, s in enumerate(layout.x_stabilizers):
        if odd(layout.logical_z, s):
            problems.append(f"logical_z anticommutes with x_stabilizer {b}")
    if not odd(layout.logical_x, layout.logical_z):
        problems.append("logical_x and logical_z commute")
    if in_span(xg, layout.logical_x):
        problems.append("logical_x lies in the X gauge span")
    if in_span(zg, layout.logical_z):
        problems.append("logical_z lies in the Z gauge span")
    return problems


def pack_rows(vs) -> np.ndarray:
    return pack_bits(GF2Matrix.from_bitvecs(vs).to_array())
