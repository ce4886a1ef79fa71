"""Exact eigenvalues and eigenvectors of one ``(r, c)`` block.

The effective eigenvalues ``q`` are the roots of the block's characteristic
polynomial, generated by the three-term recursion over photon number.
Roots come from Newton iteration with implicit (Maehly) deflation and are
polished on the undeflated polynomial. Eigenvectors are built by running the
difference equation forwards from the bottom of the ladder and backwards
from the top, joined at one row.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .qnum import Amplitudes, BlockSpec, DomainError, HalfInt, coupling_C2

MAX_POLY_DIM = 120
MAX_NEWTON_ITER = 200
_BIG = 1e150


class NumericalError(ArithmeticError):
    """A computed quantity failed its accuracy check."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _polish_iterations() -> int:
    mode = os.environ.get("TAVIS_LAB_PRECISION", "strict").strip().lower()
    if mode not in ("fast", "strict"):
        raise DomainError(f"TAVIS_LAB_PRECISION must be 'fast' or 'strict', got {mode!r}")
    return 2 if mode == "fast" else 8


@dataclass(frozen=True)
class CharPoly:
    """Characteristic polynomial ``det(x - T/sqrt(scale))`` in ``x = q / sqrt(scale)``.

    ``coeffs`` are highest power first. ``shift`` and ``weights`` keep the
    recursion data (scaled diagonal offsets ``beta n / sqrt(s)`` and scaled
    couplings ``C_t / s``) used for numerically stable evaluation.
    """

    coeffs: np.ndarray
    scale: float
    shift: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, q):
        """Polynomial value at unscaled ``q`` (via the coefficients)."""
        return np.polyval(self.coeffs, np.asarray(q, dtype=float) / math.sqrt(self.scale))

    def eval_recursive(self, x: float) -> tuple[float, float]:
        return _eval(x, self.shift, self.weights)


@dataclass(frozen=True)
class Spectrum:
    q: np.ndarray
    c: HalfInt
    kappa_abs: float
    method: str

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "c", HalfInt.of(self.c))

    def __len__(self):
        return self.q.size

    @property
    def lam(self) -> np.ndarray:
        """Energies ``lambda_j = c - |kappa| q_j`` in units of the molecular frequency."""
        return self.c.value() - self.kappa_abs * self.q


@dataclass(frozen=True)
class EigenSystem:
    spec: BlockSpec
    spectrum: Spectrum
    vectors: list
    m_mean: np.ndarray
    n_mean: np.ndarray
    n_var: np.ndarray

    def matrix(self) -> np.ndarray:
        """Amplitudes as a ``(dim, dim)`` array, row ``j`` is state ``j``."""
        return np.stack([v.values for v in self.vectors])


def _couplings(spec: BlockSpec) -> np.ndarray:
    """``C_t = (t+alpha) C^2_{r, c-(t+alpha)}`` for t = 1 .. dim-1."""
    n_plus = np.arange(spec.n_min + 1, spec.n_max + 1)
    m2 = spec.c.doubled - 2 * n_plus
    return n_plus * coupling_C2(spec.r.doubled, m2)


def _recursion_data(diag: np.ndarray, b2: np.ndarray):
    s = float(np.max(b2)) if b2.size else 1.0
    if s <= 0:
        s = 1.0
    return s, -diag / math.sqrt(s), b2 / s


def _coefficients(shift: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Monomial coefficients of ``P_t = (x + shift_t) P_{t-1} - w_t P_{t-2}``."""
    prev2 = np.array([0.0])
    prev = np.array([1.0])
    for t, a in enumerate(shift):
        cur = np.polymul(prev, [1.0, a])
        if t > 0:
            cur = np.polysub(cur, weights[t - 1] * prev2)
        prev2, prev = prev, cur
        if not np.all(np.isfinite(cur)) or np.max(np.abs(cur)) > 1e300:
            raise NumericalError("characteristic polynomial coefficients overflow")
    return prev


def _poly_from_tridiagonal(diag, b2) -> CharPoly:
    s, shift, weights = _recursion_data(np.asarray(diag, float), np.asarray(b2, float))
    return CharPoly(_coefficients(shift, weights), s, shift, weights)


def char_poly(spec: BlockSpec) -> CharPoly:
    if spec.dim > MAX_POLY_DIM:
        raise DomainError(f"block dimension {spec.dim} exceeds {MAX_POLY_DIM}; use the oracle path")
    diag = -spec.beta * spec.photon_numbers().astype(float)
    return _poly_from_tridiagonal(diag, _couplings(spec))


def _eval(x: float, shift: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    """``(p, p')`` at scaled ``x`` by the recursion, rescaled against overflow."""
    p2, p1 = 0.0, 1.0
    d2, d1 = 0.0, 0.0
    for t in range(shift.size):
        f = x + shift[t]
        if t == 0:
            p, d = f * p1, p1 + f * d1
        else:
            w = weights[t - 1]
            p = f * p1 - w * p2
            d = p1 + f * d1 - w * d2
        p2, p1, d2, d1 = p1, p, d1, d
        big = max(abs(p1), abs(d1))
        if big > _BIG:
            p2, p1, d2, d1 = p2 / _BIG, p1 / _BIG, d2 / _BIG, d1 / _BIG
    return p1, d1


def _newton_correction(x, shift, weights, found):
    p, d = _eval(x, shift, weights)
    if p == 0.0:
        return 0.0, 0.0
    ratio = d / p - sum(1.0 / (x - z) for z in found)
    if ratio == 0.0 or not math.isfinite(ratio):
        return None, p
    return 1.0 / ratio, p


def _converged(delta, x) -> bool:
    return abs(delta) <= 4e-16 * max(1.0, abs(x))


def _seeded_roots(seeds, shift, weights):
    found = []
    for x in seeds:
        for _ in range(MAX_NEWTON_ITER):
            delta, _ = _newton_correction(x, shift, weights, found)
            if delta is None:
                return None
            x -= delta
            if _converged(delta, x):
                break
        else:
            return None
        found.append(x)
    return found


def _descending_roots(upper, shift, weights, dim):
    """Roots from the top down; each Newton sequence is monotone from above."""
    found = []
    start = upper
    for _ in range(dim):
        x = start
        double = True
        _, p_old = _newton_correction(x, shift, weights, found)
        sign_old = math.copysign(1.0, p_old) * _deflation_sign(x, found)
        for _ in range(MAX_NEWTON_ITER):
            delta, _ = _newton_correction(x, shift, weights, found)
            if delta is None:
                return None
            if double:
                trial = x - 2.0 * delta
                _, p_new = _newton_correction(trial, shift, weights, found)
                sign_new = math.copysign(1.0, p_new) * _deflation_sign(trial, found)
                if sign_new == sign_old and p_new != 0.0:
                    x = trial
                    continue
                double = False
            x_new = x - delta
            if x_new >= x or _converged(delta, x_new):
                x = min(x, x_new)
                break
            x = x_new
        else:
            return None
        found.append(x)
        start = x + 1e-7 * max(1.0, abs(x))
    return found


def _deflation_sign(x, found):
    neg = sum(1 for z in found if x < z)
    return -1.0 if neg % 2 else 1.0


def _polish(roots, shift, weights, iters):
    roots = np.sort(np.asarray(roots, float))[::-1]
    out = roots.copy()
    for k, x in enumerate(roots):
        gap = np.inf
        if k > 0:
            gap = min(gap, roots[k - 1] - x)
        if k + 1 < roots.size:
            gap = min(gap, x - roots[k + 1])
        y = x
        for _ in range(iters):
            p, d = _eval(y, shift, weights)
            if p == 0.0 or d == 0.0:
                break
            step = p / d
            if abs(y - step - x) > 0.5 * gap:
                break
            y -= step
            if _converged(step, y):
                break
        out[k] = y
    return out


def _distinct(roots, dim) -> bool:
    if roots is None or len(roots) != dim:
        return False
    r = np.sort(np.asarray(roots))
    if not np.all(np.isfinite(r)):
        return False
    return dim < 2 or np.min(np.diff(r)) > 1e-9 * max(1.0, float(np.max(np.abs(r))))


def tridiagonal_roots(diag, b2, seeds=None, method="exact-poly") -> tuple[np.ndarray, str]:
    """Roots (descending) of ``det(q - T)`` for a symmetric tridiagonal ``T``.

    ``b2`` are the squared off-diagonal entries. Falls back to the Sturm
    oracle if Newton iteration does not converge.
    """
    diag = np.asarray(diag, float)
    b2 = np.asarray(b2, float)
    dim = diag.size
    if dim == 1:
        return diag.copy(), method
    s, shift, weights = _recursion_data(diag, b2)
    rs = math.sqrt(s)
    roots = None
    if seeds is not None:
        roots = _seeded_roots(list(np.asarray(seeds, float) / rs), shift, weights)
    if not _distinct(roots, dim):
        rad = np.zeros(dim)
        b = np.sqrt(b2)
        rad[:-1] += b
        rad[1:] += b
        upper = float(np.max(diag + rad)) / rs * (1 + 1e-12) + 1e-12
        roots = _descending_roots(upper, shift, weights, dim)
    if not _distinct(roots, dim):
        T = oracle.TridiagMatrix(diag, np.sqrt(b2))
        return oracle.sturm_eigenvalues(T), "oracle"
    x = _polish(roots, shift, weights, _polish_iterations())
    return x * rs, method


def _default_seeds(spec: BlockSpec):
    dim = spec.dim
    if spec.beta == 0.0:
        if dim < 3:
            return None
        from .approx import diffeq_q

        half = [diffeq_q(spec, j) for j in range(dim // 2)]
        seeds = half + ([0.0] if dim % 2 else []) + [-q for q in reversed(half)]
        return seeds
    if dim > 40:
        return oracle.sturm_eigenvalues(oracle.build_tridiagonal(spec))
    return None


def solve_spectrum(spec: BlockSpec, seeds=None) -> Spectrum:
    """All effective eigenvalues of the block, descending (``q_0`` is the ground state)."""
    if spec.dim > MAX_POLY_DIM:
        raise DomainError(f"block dimension {spec.dim} exceeds {MAX_POLY_DIM}; use the oracle path")
    if seeds is None:
        seeds = _default_seeds(spec)
    diag = -spec.beta * spec.photon_numbers().astype(float)
    q, method = tridiagonal_roots(diag, _couplings(spec), seeds)
    return Spectrum(q, spec.c, spec.kappa_abs, method)


def _two_sided(diag, off, q, prefer=None):
    """Eigenvector of a tridiagonal matrix for eigenvalue ``q``.

    The forward and backward sweeps are joined at the row whose equation
    the joined vector satisfies best; ties go to the row nearest ``prefer``.
    Returns (vector, join index).
    """
    dim = diag.size
    if dim == 1:
        return np.ones(1), 0
    fwd = np.zeros(dim)
    fwd[0] = 1.0
    fwd[1] = (q - diag[0]) / off[0]
    for k in range(1, dim - 1):
        fwd[k + 1] = ((q - diag[k]) * fwd[k] - off[k - 1] * fwd[k - 1]) / off[k]
        if abs(fwd[k + 1]) > _BIG:
            fwd[: k + 2] /= _BIG
    bwd = np.zeros(dim)
    bwd[-1] = 1.0
    bwd[-2] = (q - diag[-1]) / off[-1]
    for k in range(dim - 2, 0, -1):
        bwd[k - 1] = ((q - diag[k]) * bwd[k] - off[k] * bwd[k + 1]) / off[k - 1]
        if abs(bwd[k - 1]) > _BIG:
            bwd[k - 1:] /= _BIG

    best, best_key = 0, None
    for m in range(dim):
        if bwd[m] == 0.0 and m < dim - 1:
            continue
        scale = fwd[m] / bwd[m] if bwd[m] != 0.0 else 0.0
        left = off[m - 1] * fwd[m - 1] if m > 0 else 0.0
        right = off[m] * bwd[m + 1] * scale if m < dim - 1 else 0.0
        res = abs((diag[m] - q) * fwd[m] + left + right)
        size = abs((diag[m] - q) * fwd[m]) + abs(left) + abs(right)
        if size == 0.0:
            continue
        rel = res / size
        dist = abs(m - prefer) if prefer is not None else 0.0
        key = (round(rel, 14), dist)
        if best_key is None or key < best_key:
            best, best_key = m, key
    m = best
    v = np.empty(dim)
    v[: m + 1] = fwd[: m + 1]
    if m < dim - 1:
        v[m + 1:] = bwd[m + 1:] * (fwd[m] / bwd[m])
    v /= np.linalg.norm(v)
    if v[m] < 0 or (v[m] == 0 and v[np.argmax(np.abs(v))] < 0):
        v = -v
    return v, m


def _check_residual(T: oracle.TridiagMatrix, v, q):
    res = float(np.max(np.abs(T.matvec(v) - q * v)))
    bound = 1e-8 * float(np.linalg.norm(v))
    if res > bound:
        raise NumericalError(f"eigenvector residual {res:.3e} exceeds {bound:.3e}", residual=res)


def _preferred_join(spec: BlockSpec) -> float:
    x = spec.c.value() + 0.5
    y = spec.r.value() + 0.5
    n_o = 2 * x / 3 + math.sqrt(3 * y * y + x * x) / 3
    idx = round(n_o) - spec.n_min
    return float(min(max(idx, 1), max(spec.dim - 2, 0)))


def eigenvector(spec: BlockSpec, q_j: float) -> Amplitudes:
    """Unit eigenvector for effective eigenvalue ``q_j`` by two-sided recursion."""
    T = oracle.build_tridiagonal(spec)
    v, _ = _two_sided(T.diag, T.offdiag, float(q_j), _preferred_join(spec))
    _check_residual(T, v, float(q_j))
    return Amplitudes(spec.n_min, v)


def zero_q_eigenvector(spec: BlockSpec) -> Amplitudes:
    """Closed-form eigenvector for ``q = 0`` (resonant blocks of odd dimension)."""
    if spec.beta != 0.0 or spec.dim % 2 == 0:
        raise DomainError("q = 0 is an eigenvalue only for beta = 0 and odd block dimension")
    cc = _couplings(spec)  # cc[t-1] = C_t
    v = np.zeros(spec.dim)
    v[0] = 1.0
    for t in range(0, spec.dim - 2, 2):
        v[t + 2] = -v[t] * math.sqrt(cc[t] / cc[t + 1])
    return Amplitudes(spec.n_min, v / np.linalg.norm(v))


def _observables(spec, vectors):
    n = spec.photon_numbers().astype(float)
    P = np.stack([v.values for v in vectors]) ** 2
    n_mean = P @ n
    n_var = P @ n ** 2 - n_mean ** 2
    return spec.c.value() - n_mean, n_mean, np.maximum(n_var, 0.0)


def full_eigensystem(spec: BlockSpec) -> EigenSystem:
    """Spectrum, every eigenvector and the per-state photon observables."""
    if spec.dim > MAX_POLY_DIM:
        T = oracle.build_tridiagonal(spec)
        q, vecs = oracle.oracle_eigensystem(T)
        spectrum = Spectrum(q, spec.c, spec.kappa_abs, "oracle")
        vectors = [Amplitudes(spec.n_min, v) for v in vecs]
    else:
        spectrum = solve_spectrum(spec)
        vectors = [eigenvector(spec, q) for q in spectrum.q]
    m_mean, n_mean, n_var = _observables(spec, vectors)
    return EigenSystem(spec, spectrum, vectors, m_mean, n_mean, n_var)
