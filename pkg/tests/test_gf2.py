import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavyhex.gf2 import (
    BitVec,
    GF2Matrix,
    in_span,
    pack_bits,
    project_to_leader,
    project_to_leader_packed,
    rank,
    reduce,
    span_elements,
    unpack_bits,
    xor,
)
from oracles import D3_X_GAUGE, coset_min, gf2_rank_bruteforce, span_ints, to_int


def d3_gauge():
    return GF2Matrix.from_bitvecs([BitVec.from_indices(g, 9) for g in D3_X_GAUGE])


def test_string_form_index_zero_leftmost():
    v = BitVec.from_str("000010000")
    assert v.indices() == [4]
    assert str(v) == "000010000"
    assert v.value == 16


def test_xor_examples():
    assert str(xor(BitVec.from_str("000010000"), BitVec.from_str("000110110"))) == "000100110"
    v = BitVec.from_str("101100111")
    assert xor(v, v) == BitVec.zeros(9)
    assert xor(v, BitVec.zeros(9)) == v


def test_xor_length_mismatch():
    with pytest.raises(ValueError):
        xor(BitVec.zeros(3), BitVec.zeros(4))


def test_bitvec_rejects_out_of_range():
    with pytest.raises(ValueError):
        BitVec(8, 3)
    with pytest.raises(ValueError):
        BitVec.from_str("01a")


def test_rank_examples():
    assert rank(GF2Matrix((0, 0, 0, 0), 9)) == 0
    assert rank(GF2Matrix(tuple(1 << k for k in range(9)), 9)) == 9
    m = d3_gauge()
    assert rank(m) == gf2_rank_bruteforce(m.rows) == 4


def test_rank_does_not_modify_input():
    m = d3_gauge()
    before = m.rows
    rank(m)
    assert m.rows == before


def test_reduce_identity():
    m = GF2Matrix(tuple(1 << k for k in range(9)), 9)
    red = reduce(m)
    assert red.pivot_cols == tuple(range(8, -1, -1))
    assert sorted(red.rows) == sorted(m.rows)


def test_reduce_single_row():
    red = reduce(GF2Matrix((0b10110,), 5))
    assert red.rows == (0b10110,)
    assert red.pivot_cols == (4,)


def test_reduce_d3_gauge_span_and_pivots():
    red = reduce(d3_gauge())
    assert red.rank == 4
    assert span_ints([[k for k in range(9) if r >> k & 1] for r in red.rows]) == span_ints(D3_X_GAUGE)
    # highest attainable pivots: greedy over all span elements' top bits
    tops = sorted({s.bit_length() - 1 for s in span_ints(D3_X_GAUGE) if s}, reverse=True)
    assert list(red.pivot_cols) == tops[:4]
    assert list(red.pivot_cols) == sorted(red.pivot_cols, reverse=True)
    for r, p in zip(red.rows, red.pivot_cols):
        assert r.bit_length() - 1 == p
        assert all(not (o >> p & 1) for o in red.rows if o != r)


def test_reduce_idempotent():
    red = reduce(d3_gauge())
    again = reduce(red.basis)
    assert again.rows == red.rows and again.pivot_cols == red.pivot_cols


def test_in_span_examples():
    red = reduce(d3_gauge())
    assert in_span(red, BitVec.from_indices([3, 4, 6, 7], 9))
    assert not in_span(red, BitVec.from_indices([0, 3, 6], 9))
    assert in_span(red, BitVec.zeros(9))
    with pytest.raises(ValueError):
        in_span(red, BitVec.zeros(8))


def test_project_to_leader_examples():
    red = reduce(d3_gauge())
    assert str(project_to_leader(red, BitVec.from_str("010000000"))) == "100000000"
    assert str(project_to_leader(red, BitVec.from_str("000100110"))) == "000010000"
    for g in D3_X_GAUGE:
        assert project_to_leader(red, BitVec.from_indices(g, 9)) == BitVec.zeros(9)


def test_project_to_leader_exhaustive_d3():
    red = reduce(d3_gauge())
    for v in range(512):
        assert project_to_leader(red, BitVec(v, 9)).value == coset_min(v, D3_X_GAUGE)


def test_packed_projection_matches_scalar():
    red = reduce(d3_gauge())
    arr = np.arange(512, dtype=np.uint64)
    out = project_to_leader_packed(red, arr)
    assert out.tolist() == [project_to_leader(red, BitVec(v, 9)).value for v in range(512)]


def test_span_elements_closed_and_distinct():
    span = span_elements([to_int(g) for g in D3_X_GAUGE])
    assert len(span) == 16 and len(set(span.tolist())) == 16
    assert set(span.tolist()) == span_ints(D3_X_GAUGE)


def test_pack_unpack_roundtrip():
    bits = np.random.default_rng(0).integers(0, 2, size=(50, 49), dtype=np.uint8)
    assert np.array_equal(unpack_bits(pack_bits(bits), 49), bits)


rows_strategy = st.lists(st.integers(0, 2**12 - 1), min_size=1, max_size=8)


@settings(max_examples=200, deadline=None)
@given(rows_strategy, st.integers(0, 2**12 - 1))
def test_rank_append_property(rows, v):
    m = GF2Matrix(tuple(rows), 12)
    r = rank(m)
    red = reduce(m)
    assert rank(red.basis) == r
    grown = rank(GF2Matrix(tuple(rows) + (v,), 12))
    if in_span(red, BitVec(v, 12)):
        assert grown == r
    else:
        assert grown == r + 1


@settings(max_examples=200, deadline=None)
@given(rows_strategy, st.integers(0, 2**12 - 1), st.integers(0, 2**8 - 1))
def test_leader_coset_invariance_and_idempotence(rows, v, combo):
    red = reduce(GF2Matrix(tuple(rows), 12))
    g = 0
    for k, r in enumerate(rows):
        if combo >> k & 1:
            g ^= r
    a = project_to_leader(red, BitVec(v, 12))
    assert project_to_leader(red, BitVec(v ^ g, 12)) == a
    assert project_to_leader(red, a) == a
    assert a.value <= v
