import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tavis_lab.oracle import (TridiagMatrix, build_tridiagonal, inverse_iteration, oracle_eigensystem,
                              refined_eigenpair, sturm_count, sturm_eigenvalues)
from tavis_lab.qnum import BlockSpec

S6 = math.sqrt(6)


def random_tridiag(draw_d, draw_e):
    return TridiagMatrix(np.array(draw_d), np.array(draw_e))


tridiags = st.integers(1, 25).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-50, 50), min_size=n, max_size=n),
    st.lists(st.floats(0.01, 30), min_size=n - 1, max_size=n - 1))).map(lambda de: random_tridiag(*de))


def test_build_examples():
    T = build_tridiagonal(BlockSpec(1, 1))
    assert np.allclose(T.diag, 0) and np.allclose(T.offdiag, [math.sqrt(2), 2])
    assert np.allclose(build_tridiagonal(BlockSpec(0.5, 1.5)).offdiag, [math.sqrt(2)])
    T = build_tridiagonal(BlockSpec(2, -2))
    assert T.dim == 1 and T.diag[0] == 0
    T = build_tridiagonal(BlockSpec(3, 10, beta=0.5))
    assert np.allclose(T.diag, -0.5 * np.arange(7, 14))
    assert np.all(T.offdiag > 0)


def test_sturm_examples():
    assert np.allclose(sturm_eigenvalues(build_tridiagonal(BlockSpec(1, 1))), [S6, 0, -S6], atol=1e-14)
    assert sturm_eigenvalues(TridiagMatrix([2.5], [])) == pytest.approx([2.5])


@settings(max_examples=60, deadline=None)
@given(tridiags)
def test_sturm_matches_dense(T):
    ev = sturm_eigenvalues(T)
    ref = np.sort(np.linalg.eigvalsh(T.dense()))[::-1]
    lo, hi = T.gershgorin()
    assert np.allclose(ev, ref, atol=1e-10 * max(1.0, abs(lo), abs(hi)))
    assert np.all(np.diff(ev) <= 0)
    assert np.all((ev >= lo - 1e-9) & (ev <= hi + 1e-9))


@settings(max_examples=40, deadline=None)
@given(tridiags, st.floats(-60, 60), st.floats(-60, 60))
def test_sturm_count_difference(T, a, b):
    a, b = min(a, b), max(a, b)
    ev = np.linalg.eigvalsh(T.dense())
    ca, cb = sturm_count(T, [a, b])
    inside = np.sum((ev >= a) & (ev < b))
    close = np.any(np.isclose(ev, a, atol=1e-9)) or np.any(np.isclose(ev, b, atol=1e-9))
    if not close:
        assert cb - ca == inside


@settings(max_examples=30, deadline=None)
@given(tridiags)
def test_trace_frobenius_and_sign_flip(T):
    ev = sturm_eigenvalues(T)
    scale = max(1.0, float(np.max(np.abs(T.diag))), float(np.max(np.abs(T.offdiag), initial=0)))
    assert ev.sum() == pytest.approx(T.diag.sum(), abs=1e-9 * T.dim * scale)
    fro = np.sum(T.dense() ** 2)
    assert np.sum(ev ** 2) == pytest.approx(fro, rel=1e-9, abs=1e-12)
    flipped = TridiagMatrix(T.diag, -T.offdiag)
    assert np.allclose(sturm_eigenvalues(flipped), ev, atol=1e-10 * scale)


def test_inverse_iteration_examples():
    v = inverse_iteration(build_tridiagonal(BlockSpec(1, 1)), 0.0).values
    v = v * np.sign(v[0])
    assert np.allclose(v, [math.sqrt(2 / 3), 0, -math.sqrt(1 / 3)], atol=1e-12)
    assert np.allclose(inverse_iteration(TridiagMatrix([4.0], []), 4.0).values, [1.0])
    v = inverse_iteration(build_tridiagonal(BlockSpec(0.5, 1.5)), math.sqrt(2)).values
    assert np.allclose(np.abs(v), [1 / math.sqrt(2)] * 2) and v[0] * v[1] > 0


@settings(max_examples=40, deadline=None)
@given(tridiags, st.data())
def test_inverse_iteration_residual(T, data):
    ev = sturm_eigenvalues(T)
    k = data.draw(st.integers(0, T.dim - 1))
    mu = ev[k] + data.draw(st.floats(-1e-7, 1e-7))
    vec, mu_ref = refined_eigenpair(T, mu)
    v = vec.values
    scale = max(1.0, float(np.max(np.abs(T.diag))), float(np.max(np.abs(T.offdiag), initial=0)))
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert np.max(np.abs(T.matvec(v) - mu_ref * v)) <= 1e-10 * scale


def test_singular_shift_is_perturbed():
    T = build_tridiagonal(BlockSpec(1, 1))
    # q = 0 exactly is singular for the shifted solve; the retry path must still converge
    v = inverse_iteration(T, 0.0).values
    assert np.max(np.abs(T.matvec(v))) < 1e-10


def test_oracle_eigensystem_orthonormal():
    T = build_tridiagonal(BlockSpec(30, 45, beta=0.5))
    q, V = oracle_eigensystem(T)
    assert np.allclose(V @ V.T, np.eye(T.dim), atol=1e-10)
    assert np.allclose(np.stack([T.matvec(v) for v in V]), q[:, None] * V, atol=1e-9 * np.max(np.abs(q)))


def test_oracle_dimension_cap():
    with pytest.raises(ValueError):
        TridiagMatrix(np.zeros(10_001), np.ones(10_000))
