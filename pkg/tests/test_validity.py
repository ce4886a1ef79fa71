import math
import warnings

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from tavis_lab.approx import diffeq_params, diffeq_q
from tavis_lab.exact import full_eigensystem, solve_spectrum
from tavis_lab.qnum import BlockSpec, DomainError, HalfInt
from tavis_lab.validity import (ValidityReport, _raise_elements, cubic_perturbed_q, doubling_W2,
                                doubling_hamiltonian, doubling_validity)


def test_report_satisfied_iff_margin_below_one():
    assert ValidityReport("doubling", 0.99).satisfied
    assert not ValidityReport("doubling", 1.0).satisfied


# ---------------------------------------------------------------- cubic correction

def test_cubic_margin_formula():
    spec = BlockSpec(25, 2500)
    a2 = diffeq_params(spec).alpha2
    for j in (0, 3):
        _, rep = cubic_perturbed_q(spec, j)
        assert rep.criterion == "cubic"
        assert rep.margin == pytest.approx((30 * j * j + 30 * j + 11) / (4 * a2 * a2))
        assert rep.satisfied


def test_cubic_ordering_at_large_block():
    spec = BlockSpec(25, 2500)
    q_c, _ = cubic_perturbed_q(spec, 0)
    q_d = diffeq_q(spec, 0)
    q_x = solve_spectrum(spec).q[0]
    assert q_c > q_d
    assert abs(q_c - q_x) >= abs(q_d - q_x)


def test_cubic_limit_of_large_alpha2():
    prev = None
    for c in (100, 10_000, 1_000_000):
        spec = BlockSpec(5, c)
        rel = abs(cubic_perturbed_q(spec, 0)[0] / diffeq_q(spec, 0) - 1)
        if prev is not None:
            assert rel < prev
        prev = rel
    assert prev < 1e-12


def test_cubic_diverging_denominator():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(DomainError, match="diverges"):
            cubic_perturbed_q(BlockSpec(0.5, -0.5), 3)


@pytest.mark.filterwarnings("ignore::UserWarning")
@settings(max_examples=60, deadline=None)
@given(st.integers(2, 200), st.integers(1, 4000), st.integers(0, 5))
@example(r2=3, off=3, j=1)
def test_cubic_degrades_gracefully(r2, off, j):
    spec = BlockSpec(HalfInt(r2), HalfInt(-r2 + 2 * off))
    if j >= spec.dim // 2:
        return
    q_c, rep = cubic_perturbed_q(spec, j)
    if rep.margin < 0.1:
        q_d = diffeq_q(spec, j)
        assert abs(q_c - q_d) <= 1e-2 * abs(q_d)


# ---------------------------------------------------------------- doubling terms

def test_doubling_validity_examples():
    rep = doubling_validity(BlockSpec(0.5, 1.5, kappa_abs=0.01))
    assert rep.margin == pytest.approx(0.01 * math.sqrt(2) / 2) and rep.satisfied
    rep = doubling_validity(BlockSpec(127.5, -102.5, kappa_abs=0.1))
    assert rep.margin == pytest.approx(0.1 * 25 * math.sqrt(255) / 2, rel=0.05) and not rep.satisfied
    assert doubling_validity(BlockSpec(300, 300, kappa_abs=1e-12)).satisfied


def test_doubling_margin_monotone_in_kappa():
    ks = np.geomspace(1e-4, 1, 15)
    margins = [doubling_validity(BlockSpec(12.5, 127.5, kappa_abs=k)).margin for k in ks]
    assert np.all(np.diff(margins) > 0)


def test_diagonal_cross_term_identity():
    spec = BlockSpec(25, 2500)
    lower, here = full_eigensystem(BlockSpec(25, 2498)), full_eigensystem(spec)
    elem = _raise_elements(lower, here, spec.r.doubled)[0, 0]
    assert elem ** 2 == pytest.approx(here.spectrum.q[0] ** 2 / 4, rel=1e-3)


def test_w2_scales_as_kappa_squared():
    a = doubling_W2(BlockSpec(2, 5, kappa_abs=1e-4), 0)
    b = doubling_W2(BlockSpec(2, 5, kappa_abs=2e-4), 0)
    assert np.isfinite(a) and b / a == pytest.approx(4, rel=1e-3)


def test_w2_rejects_bad_index():
    with pytest.raises(DomainError):
        doubling_W2(BlockSpec(0.5, 1.5), 2)


def test_doubling_hamiltonian_reduces_to_blocks_without_counter_terms():
    # the rotating part alone, restricted to one excitation sector, is the block matrix
    H, n, m = doubling_hamiltonian(1, 6, 1.0)
    assert np.allclose(H, H.T)
    assert H.shape == (21, 21)
    assert np.allclose(np.diag(H), n + m)


@pytest.mark.parametrize("c", [-0.5, 0.5, 1.5, 2.5])
def test_w2_matches_brute_force(c):
    k = 1e-3
    spec = BlockSpec(0.5, c, kappa_abs=k)
    es = full_eigensystem(spec)
    H, _, _ = doubling_hamiltonian(0.5, int(c + 0.5 + 10), k)
    w = np.linalg.eigvalsh(H)
    for j, lam in enumerate(es.spectrum.lam):
        shift = w[np.argmin(np.abs(w - lam))] - lam
        assert doubling_W2(spec, j) == pytest.approx(shift, rel=0.05)
