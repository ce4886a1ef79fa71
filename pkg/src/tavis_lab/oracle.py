"""Brute-force symmetric tridiagonal eigensolver.

Sturm-sequence bisection for eigenvalues and shifted inverse iteration for
eigenvectors. Nothing here shares code with the characteristic-polynomial
route in :mod:`tavis_lab.exact`; that independence is what makes it useful
as a check, and as the fallback for blocks too large for the polynomial.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qnum import Amplitudes, BlockSpec, coupling_C2

MAX_ORACLE_DIM = 10_000
_START_SEED = 20_240_601


@dataclass(frozen=True)
class TridiagMatrix:
    diag: np.ndarray
    offdiag: np.ndarray
    n_min: int = 0

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if e.size != max(d.size - 1, 0):
            raise ValueError(f"offdiag must have {d.size - 1} entries, got {e.size}")
        if d.size > MAX_ORACLE_DIM:
            raise ValueError(f"oracle is capped at dimension {MAX_ORACLE_DIM}")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def dim(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def gershgorin(self) -> tuple[float, float]:
        rad = np.zeros_like(self.diag)
        rad[:-1] += np.abs(self.offdiag)
        rad[1:] += np.abs(self.offdiag)
        return float(np.min(self.diag - rad)), float(np.max(self.diag + rad))


def build_tridiagonal(spec: BlockSpec) -> TridiagMatrix:
    """Matrix whose eigenvalues are the effective eigenvalues ``q`` of the block."""
    n = spec.photon_numbers().astype(float)
    diag = -spec.beta * n
    if spec.dim == 1:
        return TridiagMatrix(diag, np.empty(0), spec.n_min)
    # M = c - n - 1 for n = n_min .. n_max - 1
    m2 = spec.c.doubled - 2 * spec.photon_numbers()[:-1] - 2
    off = np.sqrt(n[:-1] + 1.0) * np.sqrt(coupling_C2(spec.r.doubled, m2))
    return TridiagMatrix(diag, off, spec.n_min)


def sturm_count(T: TridiagMatrix, x) -> np.ndarray:
    """Number of eigenvalues strictly below each shift in ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    e2 = T.offdiag ** 2
    scale = max(1.0, float(np.max(np.abs(T.diag), initial=0.0)), float(np.max(np.abs(T.offdiag), initial=0.0)))
    tiny = np.finfo(float).eps * scale * 1e-3
    d = T.diag[0] - x
    d = np.where(d == 0.0, -tiny, d)
    count = (d < 0).astype(np.int64)
    for k in range(1, T.dim):
        d = (T.diag[k] - x) - e2[k - 1] / d
        d = np.where(d == 0.0, -tiny, d)
        count += d < 0
    return count


def sturm_eigenvalues(T: TridiagMatrix) -> np.ndarray:
    """All eigenvalues by bisection, sorted descending.

    Every bracket is halved until it can no longer be split in floating
    point, which is tighter than ``1e-12`` times the Gershgorin radius.
    """
    n = T.dim
    if n == 1:
        return T.diag.copy()
    lo_g, hi_g = T.gershgorin()
    pad = 1e-12 * max(1.0, abs(lo_g), abs(hi_g))
    lo = np.full(n, lo_g - pad)
    hi = np.full(n, hi_g + pad)
    idx = np.arange(n)  # idx-th smallest eigenvalue
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not active.any():
            break
        cnt = sturm_count(T, mid[active])
        above = cnt > idx[active]
        a_lo, a_hi = lo[active], hi[active]
        a_hi = np.where(above, mid[active], a_hi)
        a_lo = np.where(above, a_lo, mid[active])
        lo[active], hi[active] = a_lo, a_hi
    return (0.5 * (lo + hi))[::-1]


def _solve_shifted(T: TridiagMatrix, mu: np.ndarray, rhs: np.ndarray):
    """Solve ``(T - mu_i) x_i = rhs_i`` for a batch of shifts by partial pivoting.

    Returns ``(x, singular)`` where ``singular[i]`` flags an exact zero pivot.
    """
    n = T.dim
    k_shifts = mu.size
    a = T.diag[:, None] - mu[None, :]
    b = T.offdiag
    u0 = np.empty((n, k_shifts))
    u1 = np.zeros((n, k_shifts))
    u2 = np.zeros((n, k_shifts))
    y = rhs.copy()
    p, q, r = a[0].copy(), np.full(k_shifts, b[0] if n > 1 else 0.0), np.zeros(k_shifts)
    for k in range(n - 1):
        bk = b[k]
        bnext = b[k + 1] if k + 1 < n - 1 else 0.0
        swap = np.abs(p) < abs(bk)
        # pivot row stored in U
        u0[k] = np.where(swap, bk, p)
        u1[k] = np.where(swap, a[k + 1], q)
        u2[k] = np.where(swap, bnext, r)
        with np.errstate(divide="ignore", invalid="ignore"):
            ell = np.where(swap, p / bk, bk / np.where(p == 0.0, 1.0, p))
        new_p = np.where(swap, q - ell * a[k + 1], a[k + 1] - ell * q)
        new_q = np.where(swap, r - ell * bnext, bnext - ell * r)
        yk, yk1 = y[k].copy(), y[k + 1].copy()
        y[k] = np.where(swap, yk1, yk)
        y[k + 1] = np.where(swap, yk, yk1) - ell * y[k]
        p, q, r = new_p, new_q, np.zeros(k_shifts)
    u0[n - 1] = p
    singular = np.any(u0 == 0.0, axis=0)
    u0 = np.where(u0 == 0.0, 1.0, u0)
    x = np.empty_like(y)
    x[n - 1] = y[n - 1] / u0[n - 1]
    if n > 1:
        x[n - 2] = (y[n - 2] - u1[n - 2] * x[n - 1]) / u0[n - 2]
    for k in range(n - 3, -1, -1):
        x[k] = (y[k] - u1[k] * x[k + 1] - u2[k] * x[k + 2]) / u0[k]
    return x, singular


def inverse_iteration_many(T: TridiagMatrix, mus) -> tuple[np.ndarray, np.ndarray]:
    """Unit eigenvectors (columns) and refined eigenvalues for a batch of shifts."""
    mus = np.atleast_1d(np.asarray(mus, dtype=float)).copy()
    n = T.dim
    if n == 1:
        return np.ones((1, mus.size)), T.diag.repeat(mus.size)
    rng = np.random.default_rng(_START_SEED)
    v = rng.standard_normal((n, mus.size)) + 1.0
    v /= np.linalg.norm(v, axis=0)
    shift = mus.copy()
    for attempt in range(6):
        x, singular = _solve_shifted(T, shift, v)
        if not singular.any():
            break
        bump = 1e-13 * np.maximum(1.0, np.abs(shift))
        shift = np.where(singular, shift + bump, shift)
    for _ in range(3):
        x /= np.linalg.norm(x, axis=0)
        v = x
        x, _ = _solve_shifted(T, shift, v)
    v = x / np.linalg.norm(x, axis=0)
    v = _reorthogonalize(v, mus, T)
    tv = np.stack([T.matvec(v[:, i]) for i in range(v.shape[1])], axis=1)
    refined = np.einsum("ij,ij->j", v, tv)
    # deterministic sign: largest component positive
    lead = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])]
    v *= np.where(lead < 0, -1.0, 1.0)
    return v, refined


def _reorthogonalize(v: np.ndarray, mus: np.ndarray, T: TridiagMatrix) -> np.ndarray:
    lo, hi = T.gershgorin()
    tol = 1e-7 * max(1.0, abs(lo), abs(hi))
    order = np.argsort(mus)
    for a, b in zip(order[:-1], order[1:]):
        if abs(mus[b] - mus[a]) < tol:
            v[:, b] -= (v[:, a] @ v[:, b]) * v[:, a]
            v[:, b] /= np.linalg.norm(v[:, b])
    return v


def inverse_iteration(T: TridiagMatrix, mu: float) -> Amplitudes:
    """Eigenvector for the eigenvalue nearest ``mu``, as unit amplitudes."""
    v, _ = inverse_iteration_many(T, [mu])
    return Amplitudes(T.n_min, v[:, 0])


def refined_eigenpair(T: TridiagMatrix, mu: float) -> tuple[Amplitudes, float]:
    v, refined = inverse_iteration_many(T, [mu])
    return Amplitudes(T.n_min, v[:, 0]), float(refined[0])


def oracle_eigensystem(T: TridiagMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching unit eigenvectors as rows."""
    q = sturm_eigenvalues(T)
    v, _ = inverse_iteration_many(T, q)
    return q, v.T
