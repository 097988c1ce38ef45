import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavyhex.code import (
    batch_syndrome,
    build_layout,
    logical_ops,
    syndrome,
    syndrome_bitflip,
    syndrome_phaseflip,
    verify_layout,
)
from heavyhex.gf2 import BitVec, GF2Matrix, in_span, reduce
from oracles import D3_X_GAUGE, D3_X_STABS, D3_Z_STABS, parity_syndrome, span_ints, to_int


def supports(vs):
    return sorted(sorted(v.indices()) for v in vs)


@pytest.mark.parametrize("d,counts", [(3, (4, 6, 4, 2)), (5, (12, 20, 12, 4)), (7, (24, 42, 24, 6))])
def test_generator_counts(d, counts):
    L = build_layout(d)
    assert (
        len(L.x_gauge_generators),
        len(L.z_gauge_generators),
        len(L.z_stabilizers),
        len(L.x_stabilizers),
    ) == counts
    assert counts == ((d * d - 1) // 2, d * (d - 1), (d * d - 1) // 2, d - 1)


@pytest.mark.parametrize("d", [2, 4, 1, 0, -3])
def test_bad_distance_rejected(d):
    with pytest.raises(ValueError):
        build_layout(d)


def test_d3_supports_match_hand_instantiation():
    L = build_layout(3)
    assert supports(L.x_gauge_generators) == sorted(D3_X_GAUGE)
    assert [sorted(s.indices()) for s in L.z_stabilizers] == D3_Z_STABS
    assert [sorted(s.indices()) for s in L.x_stabilizers] == D3_X_STABS


@pytest.mark.parametrize("d", [3, 5, 7, 9])
def test_layout_invariants(d):
    assert verify_layout(build_layout(d)) == []


@pytest.mark.parametrize("d", [3, 5, 7])
def test_invariants_checked_directly(d):
    L = build_layout(d)
    xg = reduce(GF2Matrix.from_bitvecs(L.x_gauge_generators))
    zg = reduce(GF2Matrix.from_bitvecs(L.z_gauge_generators))
    for s in L.z_stabilizers:
        assert in_span(zg, s)
        for g in L.x_gauge_generators:
            assert (s.value & g.value).bit_count() % 2 == 0
    for s in L.x_stabilizers:
        assert in_span(xg, s)
        for g in L.z_gauge_generators:
            assert (s.value & g.value).bit_count() % 2 == 0
    lx, lz = logical_ops(L)
    assert lx.indices() == list(range(0, d * d, d))
    assert lz.indices() == list(range(d))
    assert all((lx.value & s.value).bit_count() % 2 == 0 for s in L.z_stabilizers)
    assert all((lz.value & s.value).bit_count() % 2 == 0 for s in L.x_stabilizers)
    assert (lx.value & lz.value).bit_count() % 2 == 1


def test_syndrome_examples_d3():
    L = build_layout(3)
    assert str(syndrome_bitflip(L, BitVec.from_indices([4], 9))) == "1100"
    assert str(syndrome_bitflip(L, BitVec.from_indices([3, 6, 7], 9))) == "1100"
    assert str(syndrome_bitflip(L, BitVec.zeros(9))) == "0000"
    assert str(syndrome_phaseflip(L, BitVec.from_indices([0], 9))) == "10"
    assert str(syndrome_phaseflip(L, BitVec.from_indices([6], 9))) == "10"
    assert str(syndrome_phaseflip(L, BitVec.zeros(9))) == "00"
    s = syndrome(L, BitVec.from_indices([4], 9), BitVec.from_indices([0], 9))
    assert (str(s.z_bits), str(s.x_bits)) == ("1100", "10")


def test_syndrome_length_mismatch():
    with pytest.raises(ValueError):
        syndrome_bitflip(build_layout(3), BitVec.zeros(8))


def test_logicals_d3():
    L = build_layout(3)
    lx, lz = logical_ops(L)
    assert sorted(lx.indices()) == [0, 3, 6]
    assert str(syndrome_bitflip(L, lx)) == "0000"
    assert to_int([0, 3, 6]) not in span_ints(D3_X_GAUGE)
    assert str(syndrome_phaseflip(L, lz)) == "00"


def test_bitflip_syndrome_matches_oracle_exhaustive_d3():
    L = build_layout(3)
    for v in range(512):
        assert syndrome_bitflip(L, BitVec(v, 9)).to_array().tolist() == parity_syndrome(v, D3_Z_STABS)


def test_d3_class_structure():
    # 16 syndromes x 2 cosets = 32 (syndrome, coset) classes
    L = build_layout(3)
    gauge = span_ints(D3_X_GAUGE)
    classes = {(syndrome_bitflip(L, BitVec(v, 9)).value, min(v ^ g for g in gauge)) for v in range(512)}
    assert len({s for s, _ in classes}) == 16
    assert len(classes) == 32


def test_batch_syndrome_agrees_with_scalar():
    L = build_layout(5)
    rng = np.random.default_rng(1)
    e = rng.integers(0, 2, size=(200, 25), dtype=np.uint8)
    got = batch_syndrome(L.z_check_matrix, e)
    for row, s in zip(e, got):
        assert syndrome_bitflip(L, BitVec.from_bits(row)).to_array().tolist() == s.tolist()


@pytest.mark.parametrize("d", [3, 5, 7])
def test_gauge_invariance_random_pairs(d):
    L = build_layout(d)
    n = d * d
    rng = np.random.default_rng(d)
    trials = 10_000
    e_x = rng.integers(0, 2, size=(trials, n), dtype=np.uint8)
    e_z = rng.integers(0, 2, size=(trials, n), dtype=np.uint8)
    gx = np.array([g.to_array() for g in L.x_gauge_generators])
    gz = np.array([g.to_array() for g in L.z_gauge_generators])
    cx = rng.integers(0, 2, size=(trials, len(gx)))
    cz = rng.integers(0, 2, size=(trials, len(gz)))
    span_x = ((cx @ gx) & 1).astype(np.uint8)
    span_z = ((cz @ gz) & 1).astype(np.uint8)
    assert np.array_equal(batch_syndrome(L.z_check_matrix, e_x), batch_syndrome(L.z_check_matrix, e_x ^ span_x))
    assert np.array_equal(batch_syndrome(L.x_check_matrix, e_z), batch_syndrome(L.x_check_matrix, e_z ^ span_z))


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.data())
def test_syndrome_linearity(d, data):
    L = build_layout(d)
    n = d * d
    a = BitVec(data.draw(st.integers(0, 2**n - 1)), n)
    b = BitVec(data.draw(st.integers(0, 2**n - 1)), n)
    assert syndrome_bitflip(L, a ^ b) == syndrome_bitflip(L, a) ^ syndrome_bitflip(L, b)
    assert syndrome_phaseflip(L, a ^ b) == syndrome_phaseflip(L, a) ^ syndrome_phaseflip(L, b)


def test_layout_json_counts():
    info = build_layout(3).to_json()
    assert info["counts"] == {"x_gauge_generators": 4, "z_gauge_generators": 6, "z_stabilizers": 4, "x_stabilizers": 2}
