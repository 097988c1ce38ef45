import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavyhex.code import build_layout
from heavyhex.gf2 import BitVec
from heavyhex.noise import (
    NoiseConfig,
    apply_syndrome_noise,
    derive_seed,
    effective_cycle_prob,
    make_rng,
    p_step_for,
    sample_bitflip,
    sample_depolarizing,
    sample_errors,
    sample_phaseflip,
)


def test_cycle_prob_exact_oracle():
    # exact rational evaluation of 1 - (1 - p)^11
    exact = 1 - (1 - Fraction(1, 1000)) ** 11
    assert abs(effective_cycle_prob(0.001, 11) - float(exact)) < 1e-15
    assert abs(effective_cycle_prob(0.001, 11) - 0.010945) < 1e-6


def test_cycle_prob_edges():
    assert effective_cycle_prob(0.0, 11) == 0.0
    assert effective_cycle_prob(1.0, 11) == 1.0
    for bad in (-0.1, 1.5, math.nan):
        with pytest.raises(ValueError):
            effective_cycle_prob(bad, 11)
    with pytest.raises(ValueError):
        effective_cycle_prob(0.1, 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.integers(1, 30), st.integers(1, 30))
def test_cycle_prob_monotone(p1, p2, s1, s2):
    lo, hi = sorted((p1, p2))
    slo, shi = sorted((s1, s2))
    assert effective_cycle_prob(lo, s1) <= effective_cycle_prob(hi, s1) + 1e-15
    assert effective_cycle_prob(lo, slo) <= effective_cycle_prob(lo, shi) + 1e-15


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 0.999), st.integers(1, 30))
def test_p_step_inverse(q, steps):
    assert abs(effective_cycle_prob(p_step_for(q, steps), steps) - q) < 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        NoiseConfig("amplitude", 0.1)
    with pytest.raises(ValueError):
        NoiseConfig("bitflip", 1.2)
    assert NoiseConfig("bitflip", 0.001).q == effective_cycle_prob(0.001, 11)


def test_bitflip_edges():
    L = build_layout(3)
    rng = make_rng(0)
    s = sample_bitflip(L, 0.0, rng)
    assert s.e_x == BitVec.zeros(9) and s.e_z == BitVec.zeros(9)
    s = sample_bitflip(L, 1.0, rng)
    assert s.e_x.weight() == 9 and s.e_z.weight() == 0
    s = sample_phaseflip(L, 1.0, rng)
    assert s.e_z.weight() == 9 and s.e_x.weight() == 0


def test_bitflip_mean_weight():
    e_x, e_z = sample_errors("bitflip", 9, 0.1, make_rng(11), 100_000)
    assert abs(e_x.sum(axis=1).mean() - 0.9) < 0.03
    assert e_z.sum() == 0


def test_depolarizing_marginals():
    e_x, e_z = sample_errors("depolarizing", 9, 0.3, make_rng(12), 100_000)
    assert np.all(np.abs(e_x.mean(axis=0) - 0.2) < 0.01)
    assert np.all(np.abs(e_z.mean(axis=0) - 0.2) < 0.01)
    e_x, e_z = sample_errors("depolarizing", 9, 1.0, make_rng(13), 100_000)
    assert np.all(e_x | e_z)
    assert abs((e_x & e_z).mean() - 1 / 3) < 0.01


def test_depolarizing_scalar_sample_zero():
    s = sample_depolarizing(build_layout(3), 0.0, make_rng(0))
    assert s.e_x.weight() == 0 and s.e_z.weight() == 0


def test_syndrome_noise():
    rng = make_rng(3)
    s = BitVec.from_str("1010")
    assert apply_syndrome_noise(s, 0.0, rng) == s
    assert str(apply_syndrome_noise(s, 1.0, rng)) == "0101"
    flips = apply_syndrome_noise(np.zeros((100_000, 1), dtype=np.uint8), 0.5, make_rng(4))
    assert abs(flips.mean() - 0.5) < 0.01


def test_reproducible_streams():
    a = sample_errors("depolarizing", 25, 0.1, make_rng(7, 2), 1000)
    b = sample_errors("depolarizing", 25, 0.1, make_rng(7, 2), 1000)
    c = sample_errors("depolarizing", 25, 0.1, make_rng(7, 3), 1000)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], c[0])


def test_derive_seed_stable_and_distinct():
    assert derive_seed(5, 3, 1) == derive_seed(5, 3, 1)
    assert len({derive_seed(5, 3, i) for i in range(100)}) == 100
