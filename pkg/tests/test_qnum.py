import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tavis_lab.qnum import (Amplitudes, BlockSpec, DomainError, HalfInt, allowed_r, block_dim,
                            coupling_C, coupling_from_cavity, degeneracy_P)

half_ints = st.integers(-400, 400).map(HalfInt)


@pytest.mark.parametrize("text,doubled", [("12.5", 25), ("25/2", 25), (12.5, 25), (3, 6),
                                          ("-7/2", -7), (Fraction(5, 2), 5), ("0", 0)])
def test_halfint_parsing(text, doubled):
    assert HalfInt.of(text).doubled == doubled


@pytest.mark.parametrize("bad", ["1/3", 0.25, "abc", float("nan")])
def test_halfint_rejects(bad):
    with pytest.raises(DomainError):
        HalfInt.of(bad)


@given(half_ints, half_ints)
def test_halfint_arithmetic_is_integer_exact(a, b):
    assert (a + b).doubled == a.doubled + b.doubled
    assert (a - b) == HalfInt(a.doubled - b.doubled)
    assert (a < b) == (a.doubled < b.doubled)
    assert HalfInt.of(a.fraction_str()) == a == HalfInt.of(a.decimal_str())


def test_coupling_examples():
    assert coupling_C(0.5, -0.5) == pytest.approx(1.0, abs=1e-15)
    assert coupling_C(7, 7) == 0.0
    assert coupling_C(1, 0) == pytest.approx(math.sqrt(2), abs=1e-15)
    with pytest.raises(DomainError, match="r=1.0, M=2.0"):
        coupling_C(1, 2)


@given(st.integers(0, 200), st.data())
def test_coupling_identity(r2, data):
    m2 = data.draw(st.integers(-r2 - 2, r2).filter(lambda m: (m - r2) % 2 == 0))
    r, M = r2 / 2, m2 / 2
    assert coupling_C(HalfInt(r2), HalfInt(m2)) ** 2 + M * (M + 1) == pytest.approx(r * (r + 1), abs=1e-12 * max(1, r * r))


def test_block_dim_examples():
    assert block_dim(BlockSpec(25, 2500)) == 51
    assert block_dim(BlockSpec(0.5, 0.5)) == 2
    assert block_dim(BlockSpec(127.5, -102.5)) == 26


@given(st.integers(0, 120))
def test_block_dim_limits(r2):
    r = HalfInt(r2)
    assert BlockSpec(r, -r).dim == 1
    assert BlockSpec(r, r).dim == r2 + 1
    assert BlockSpec(r, r + 7).dim == r2 + 1


def test_blockspec_validation():
    with pytest.raises(DomainError):
        BlockSpec(1, 0.5)
    with pytest.raises(DomainError):
        BlockSpec(1, -2)
    with pytest.raises(DomainError):
        BlockSpec(1, 1, kappa_abs=0.0)
    spec = BlockSpec("25/2", "127.5")
    assert spec.n_min == 115 and spec.n_max == 140
    assert np.all(spec.inversions() + spec.photon_numbers() == 127.5)


def test_degeneracy_examples():
    assert degeneracy_P(2, 1) == 1
    assert degeneracy_P(4, 1) == 3
    assert degeneracy_P(9, 4.5) == 1
    with pytest.raises(DomainError):
        degeneracy_P(4, 0.5)


@pytest.mark.parametrize("N", range(0, 65))
def test_degeneracy_sum_rule(N):
    assert sum((r.doubled + 1) * degeneracy_P(N, r) for r in allowed_r(N)) == 2 ** N


def test_cavity_coupling_scaling():
    base = coupling_from_cavity(1.47e-18, 40.0, 2e10)
    assert coupling_from_cavity(1.47e-18, 160.0, 2e10) == pytest.approx(base / 2)
    assert coupling_from_cavity(2.94e-18, 40.0, 2e10) == pytest.approx(base * 2)
    # ammonia inversion line in a few tens of cm^3: a few cycles per second
    assert 0.5 < base < 50
    with pytest.raises(DomainError):
        coupling_from_cavity(0.0, 1.0, 1.0)


def test_amplitudes():
    a = Amplitudes(3, [0.6, 0.8])
    assert list(a.photon_numbers) == [3, 4]
    mean, var = a.photon_stats()
    assert mean == pytest.approx(3.64) and var == pytest.approx(0.2304)
    assert np.allclose(a.with_phase(np.pi), [0.6 * np.exp(-3j * np.pi), 0.8 * np.exp(-4j * np.pi)])
    assert a.overlap(Amplitudes(4, [1.0])) == pytest.approx(0.8)
    with pytest.raises(ValueError):
        Amplitudes(0, [1.0, 1.0])
