"""Approximate spectra and states, each comparable against the exact solver.

Every builder returns an :class:`ApproxResult`. Effective eigenvalues ``q``
follow the exact solver's convention ``lambda = c - |kappa| q`` so the two can
be compared index by index.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from numpy.polynomial import hermite as npherm

from .exact import Spectrum, tridiagonal_roots
from .qnum import Amplitudes, BlockSpec, DomainError, HalfInt, coupling_C2

# Calibrated correction for the modified two-level-molecule spectrum, as a fraction of r.
MODTLM_ALPHA_FRACTION = 0.45
MAX_HERMITE_ORDER = 200


@dataclass(frozen=True)
class DiffEqParams:
    x: float
    y: float
    n_o: float
    alpha1: float
    alpha2: float

    def stationarity_residual(self) -> float:
        """Relative residual of ``3 n_o^2 - 4 n_o x - (y^2 - x^2) = 0``."""
        lhs = 3 * self.n_o ** 2 - 4 * self.n_o * self.x - (self.y ** 2 - self.x ** 2)
        scale = max(3 * self.n_o ** 2, abs(4 * self.n_o * self.x), abs(self.y ** 2 - self.x ** 2), 1.0)
        return abs(lhs) / scale


@dataclass(frozen=True)
class ApproxResult:
    method: str
    q: np.ndarray
    c: HalfInt
    kappa_abs: float
    states: list | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "c", HalfInt.of(self.c))

    @property
    def spectrum(self) -> Spectrum:
        return Spectrum(self.q, self.c, self.kappa_abs, self.method)

    @property
    def energies(self) -> np.ndarray:
        return self.spectrum.lam


def diffeq_params(spec: BlockSpec) -> DiffEqParams:
    if spec.dim < 3:
        warnings.warn("the continuum approximation is unreliable for blocks with fewer than 3 states",
                      stacklevel=2)
    x = spec.c.value() + 0.5
    y = spec.r.value() + 0.5
    root = math.sqrt(3 * y * y + x * x)
    n_o = 2 * x / 3 + root / 3
    alpha1 = 4 * n_o * (y * y - (x - n_o) ** 2)
    return DiffEqParams(x, y, n_o, max(alpha1, 0.0), 4 * root)


def _diffeq_q_direct(p: DiffEqParams, j: int) -> float:
    h = j + 0.5
    s2 = math.sqrt(p.alpha2)
    return -s2 * h + math.sqrt(h * h * p.alpha2 + p.alpha1)


def diffeq_q(spec: BlockSpec, j: int) -> float:
    """Continuum estimate of ``q_j``; upper-half states are mirrored as ``-q``."""
    dim = spec.dim
    if not 0 <= j < dim:
        raise DomainError(f"j={j} outside 0..{dim - 1}")
    if dim == 1:
        return 0.0  # single state: no coupling, and alpha1 is not exactly zero at c = -r
    half = dim // 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = diffeq_params(spec)
    if j < half:
        return _diffeq_q_direct(p, j)
    if dim % 2 and j == half:
        raise DomainError(f"j={j} is the centre state; the continuum formula does not cover it")
    return -_diffeq_q_direct(p, dim - 1 - j)


def diffeq_vector(spec: BlockSpec, j: int) -> Amplitudes:
    """Hermite-Gaussian continuum eigenvector sampled on the block's photon numbers."""
    q = diffeq_q(spec, j)
    if q <= 0:
        raise DomainError(f"q_{j} = {q} <= 0; Gaussian width undefined")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = diffeq_params(spec)
    n = spec.photon_numbers().astype(float)
    u = n - p.n_o
    r = spec.r.value()
    tilt = -j * u / r if r > 0 else np.zeros_like(u)
    log_env = tilt - math.sqrt(p.alpha2) * u ** 2 / (2 * q)
    coef = np.zeros(j + 1)
    coef[j] = 1.0
    herm = npherm.hermval((p.alpha2 / q ** 2) ** 0.25 * u, coef)
    vals = np.exp(log_env - log_env.max()) * herm
    nrm = np.linalg.norm(vals)
    if nrm == 0:
        raise DomainError("continuum vector vanishes on the block")
    vals /= nrm
    peak = np.argmin(np.abs(u))
    if vals[peak] < 0 or (vals[peak] == 0 and vals[np.argmax(np.abs(vals))] < 0):
        vals = -vals
    return Amplitudes(spec.n_min, vals)


def diffeq_sigma2(spec: BlockSpec) -> float:
    """Ground-state photon-number variance of the continuum Gaussian."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = diffeq_params(spec)
    return _diffeq_q_direct(p, 0) / (2 * math.sqrt(p.alpha2))


def diffeq(spec: BlockSpec) -> ApproxResult:
    q = []
    for j in range(spec.dim):
        try:
            q.append(diffeq_q(spec, j))
        except DomainError:
            q.append(0.0)
    p = diffeq_params(spec)
    return ApproxResult("diffeq", q, spec.c, spec.kappa_abs,
                        meta={"n_o": p.n_o, "alpha1": p.alpha1, "alpha2": p.alpha2})


# ---------------------------------------------------------------- average field

def avgfield_spectrum_poly(spec: BlockSpec) -> ApproxResult:
    """Field operators replaced by ``sqrt(n_o)``: roots of the ladder-only recursion."""
    if spec.beta != 0.0:
        raise DomainError("the average-field spectrum is defined at resonance (beta = 0)")
    p = diffeq_params(spec)
    m2 = spec.c.doubled - 2 * np.arange(spec.n_min + 1, spec.n_max + 1)
    b2 = coupling_C2(spec.r.doubled, m2)
    q_f, method = tridiagonal_roots(np.zeros(spec.dim), b2)
    meta = {"n_o": p.n_o, "q_f": q_f, "solver": method}
    return ApproxResult("avgfield-poly", math.sqrt(p.n_o) * q_f, spec.c, spec.kappa_abs, meta=meta)


def _check_j_field(spec, j):
    if not 0 <= j <= spec.r.doubled:
        raise DomainError(f"j={j} outside 0..2r={spec.r.doubled}")


def avgfield_lambda_closed(spec: BlockSpec, j: int, use_n_o: bool = False) -> float:
    """``c - 2(r - j)|kappa| sqrt(n)`` with ``n = c`` (default) or the continuum ``n_o``."""
    _check_j_field(spec, j)
    c = spec.c.value()
    if c <= 0:
        raise DomainError(f"c={c} must be positive")
    n = diffeq_params(spec).n_o if use_n_o else c
    return c - 2 * (spec.r.value() - j) * spec.kappa_abs * math.sqrt(n)


def avgfield_closed(spec: BlockSpec, use_n_o: bool = False) -> ApproxResult:
    lam = np.array([avgfield_lambda_closed(spec, j, use_n_o) for j in range(spec.r.doubled + 1)])
    q = (spec.c.value() - lam) / spec.kappa_abs
    return ApproxResult("avgfield-closed", q, spec.c, spec.kappa_abs, meta={"use_n_o": use_n_o})


def avgfield_lambda_diffeq(spec: BlockSpec, j: int) -> float:
    """Average-field energy with the ladder spectrum from the continuum treatment."""
    _check_j_field(spec, j)
    n_o = diffeq_params(spec).n_o
    h = j + 0.5
    bracket = -h + math.sqrt(h * h + ((spec.r.value() + 1) / 2) ** 2)
    return spec.c.value() - 2 * spec.kappa_abs * math.sqrt(n_o) * bracket


# ---------------------------------------------------------------- rotated ladder states

def _rotated_sums(N: int, j: int) -> list[int]:
    """Integer sums ``S_L = sum_k (-1)^k C(L, k) C(N-L, j-k)`` for ``L = 0..N``."""
    return [sum((-1) ** k * math.comb(L, k) * math.comb(N - L, j - k)
                for k in range(max(0, j - (N - L)), min(L, j) + 1))
            for L in range(N + 1)]


def rotated_state_squares(N: int, j: int) -> list[Fraction]:
    """Exact squared amplitudes ``S_L^2 C(N, L) / (C(N, j) 2^N)`` of the quarter-turn state."""
    cnj = math.comb(N, j)
    return [Fraction(s * s * math.comb(N, L), cnj * 2 ** N)
            for L, s in enumerate(_rotated_sums(N, j))]


def _exact_rotated(N: int, j: int) -> list[float]:
    out = []
    for s, sq in zip(_rotated_sums(N, j), rotated_state_squares(N, j)):
        mag = math.sqrt(float(sq)) if s else 0.0
        out.append(math.copysign(mag, s) if s else 0.0)
    return out


def rotated_state(N: int, j: int, theta: float | None = None) -> np.ndarray:
    """Ladder state ``j`` of a spin ``N/2`` rotated by ``2 theta``, over ``L = 0..N``.

    Weights are ``cos(theta)`` for an unflipped and ``sin(theta)`` for a
    flipped constituent. ``theta = None`` is the quarter turn, evaluated in
    exact integer arithmetic.
    """
    if not 0 <= j <= N:
        raise DomainError(f"j={j} outside 0..{N}")
    if theta is None:
        vals = np.array(_exact_rotated(N, j))
    else:
        with mpmath.workdps(40):
            ct, st = mpmath.cos(theta), mpmath.sin(theta)
            norm = mpmath.sqrt(mpmath.mpf(1) / math.comb(N, j))
            vals = []
            for L in range(N + 1):
                acc = mpmath.mpf(0)
                for k in range(max(0, j - (N - L)), min(L, j) + 1):
                    acc += ((-1) ** k * math.comb(L, k) * math.comb(N - L, j - k)
                            * ct ** (N - L - j + 2 * k) * st ** (L + j - 2 * k))
                vals.append(float(acc * norm * mpmath.sqrt(math.comb(N, L))))
            vals = np.array(vals)
    return vals / np.linalg.norm(vals)


def avgfield_state(spec: BlockSpec, j: int) -> Amplitudes:
    """Average-field eigenstate on ``|c - m>|r, m>``, ``m = r - L``, indexed by photon number."""
    _check_j_field(spec, j)
    N = spec.r.doubled
    vals = rotated_state(N, j)
    n0 = (spec.c.doubled - spec.r.doubled) // 2
    for L, a in enumerate(vals):
        if a != 0.0 and n0 + L < 0:
            m = HalfInt(spec.r.doubled - 2 * L)
            raise DomainError(f"state populates m={m} with negative photon number c - m = {n0 + L}")
    if n0 < 0:
        first = int(np.flatnonzero(vals)[0])
        vals = vals[-n0:]
        if first < -n0:
            raise DomainError("negative photon number populated")
        n0 = 0
    return Amplitudes(n0, vals)


# ---------------------------------------------------------------- modified TLM

def modtlm_lambda(spec: BlockSpec, j: int, alpha_corr: float = 0.0) -> float:
    """``c - (c + r - 2j)|kappa| sqrt(2r - alpha_corr)``."""
    top = (spec.c.doubled + spec.r.doubled) // 2
    if not 0 <= j <= top:
        raise DomainError(f"j={j} outside 0..c+r={top}")
    rad = 2 * spec.r.value() - alpha_corr
    if rad < 0:
        raise DomainError(f"2r - alpha_corr = {rad} < 0")
    return spec.c.value() - (top - 2 * j) * spec.kappa_abs * math.sqrt(rad)


def modtlm(spec: BlockSpec, corrected: bool = False) -> ApproxResult:
    alpha = MODTLM_ALPHA_FRACTION * spec.r.value() if corrected else 0.0
    top = (spec.c.doubled + spec.r.doubled) // 2
    lam = np.array([modtlm_lambda(spec, j, alpha) for j in range(top + 1)])
    q = (spec.c.value() - lam) / spec.kappa_abs
    return ApproxResult("modtlm-corrected" if corrected else "modtlm", q, spec.c, spec.kappa_abs,
                        meta={"alpha_corr": alpha})


def modtlm_state(spec: BlockSpec, j: int) -> Amplitudes:
    """Modified-TLM eigenstate on ``|L>|r, c - L>``, ``L = 0..c+r``."""
    if spec.c.doubled > spec.r.doubled:
        raise DomainError("the modified-TLM states need c <= r")
    top = (spec.c.doubled + spec.r.doubled) // 2
    if not 0 <= j <= top:
        raise DomainError(f"j={j} outside 0..c+r={top}")
    return Amplitudes(0, rotated_state(top, j))


# ---------------------------------------------------------------- average TLM

def avgtlm_spectrum(spec: BlockSpec) -> ApproxResult:
    """Ladder operators replaced by their average: a displaced-oscillator ladder.

    ``q_a`` are the eigenvalues of the photon-only Jacobi matrix (Hermite
    zeros times ``sqrt 2``); the comparable ``q`` multiplies each by the
    state average of ``sqrt(R^2 - R_3^2 + R_3)``.
    """
    if spec.beta != 0.0:
        raise DomainError("the average-TLM spectrum is defined at resonance (beta = 0)")
    dim = spec.dim
    if dim > MAX_HERMITE_ORDER:
        raise DomainError(f"Hermite order {dim} exceeds {MAX_HERMITE_ORDER}")
    n = spec.photon_numbers()
    if spec.n_min == 0:
        x, _ = npherm.hermgauss(dim)
        x = np.sort(x)[::-1]
        q_a = math.sqrt(2.0) * x
        vecs = _hermite_vectors(x, dim)
    else:
        q_a, _ = tridiagonal_roots(np.zeros(dim), (n[:-1] + 1).astype(float))
        vecs = _jacobi_vectors(q_a, (n[:-1] + 1).astype(float))
    cm = np.sqrt(coupling_C2(spec.r.doubled, spec.c.doubled - 2 * n - 2))
    avg_c = (vecs ** 2) @ cm
    states = [Amplitudes(spec.n_min, v) for v in vecs]
    return ApproxResult("avgtlm", q_a * avg_c, spec.c, spec.kappa_abs, states=states,
                        meta={"q_a": q_a, "q_prime": q_a / math.sqrt(2.0), "kappa_bar": spec.kappa_abs * avg_c})


def _hermite_vectors(x: np.ndarray, dim: int) -> np.ndarray:
    """Normalised Hermite recursion ``h_{n+1} = (sqrt2 x h_n - sqrt(n) h_{n-1}) / sqrt(n+1)``."""
    h = np.zeros((x.size, dim))
    h[:, 0] = 1.0
    if dim > 1:
        h[:, 1] = math.sqrt(2.0) * x
    for k in range(1, dim - 1):
        h[:, k + 1] = (math.sqrt(2.0) * x * h[:, k] - math.sqrt(k) * h[:, k - 1]) / math.sqrt(k + 1)
    return h / np.linalg.norm(h, axis=1, keepdims=True)


def _jacobi_vectors(q: np.ndarray, b2: np.ndarray) -> np.ndarray:
    b = np.sqrt(b2)
    dim = b.size + 1
    h = np.zeros((q.size, dim))
    h[:, 0] = 1.0
    if dim > 1:
        h[:, 1] = q / b[0]
    for k in range(1, dim - 1):
        h[:, k + 1] = (q * h[:, k] - b[k - 1] * h[:, k - 1]) / b[k]
    return h / np.linalg.norm(h, axis=1, keepdims=True)


def agreement(result: ApproxResult, exact_q) -> dict:
    """Deviation of an approximate spectrum from exact ``q`` values, scaled by ``|q_0|``.

    Compares the first ``len(result.q)`` exact values; ``three_figures`` is
    true when every deviation is below ``1e-3``.
    """
    exact_q = np.asarray(exact_q, dtype=float)
    k = min(result.q.size, exact_q.size)
    dev = np.abs(result.q[:k] - exact_q[:k]) / abs(exact_q[0])
    worst = float(dev.max()) if k else 0.0
    return {"method": result.method, "deviation": dev, "max_deviation": worst,
            "three_figures": worst <= 1e-3}


# ---------------------------------------------------------------- classical limits

def _poisson_cutoff(kappa_bar: float) -> int:
    mean = kappa_bar ** 2
    return int(math.ceil(max(20 * mean, mean + 12 * kappa_bar + 30)))


def classical_tlm(spec: BlockSpec, kappa_bar: float, offset: float = 0.0) -> ApproxResult:
    """Field driven by a classical dipole: displaced oscillator levels and a coherent ground state."""
    if kappa_bar < 0:
        raise DomainError("kappa_bar must be >= 0")
    mean = kappa_bar ** 2
    levels = np.arange(spec.dim, dtype=float)
    lam = levels - mean + offset
    cutoff = _poisson_cutoff(kappa_bar)
    k = np.arange(cutoff + 1)
    if mean == 0:
        probs = (k == 0).astype(float)
    else:
        logp = -mean + k * math.log(mean) - np.array([math.lgamma(i + 1) for i in k])
        probs = np.exp(logp)
    q = (spec.c.value() - lam) / spec.kappa_abs
    meta = {"kappa_bar": kappa_bar, "mean_a": kappa_bar, "sigma2": mean, "cutoff": cutoff,
            "poisson": probs, "offset": offset}
    return ApproxResult("classical-tlm", q, spec.c, spec.kappa_abs,
                        states=[Amplitudes(0, np.sqrt(probs), normalized=False)], meta=meta)


def classical_field(spec: BlockSpec) -> ApproxResult:
    """Molecules in a classical resonant field: a rotated ladder split by ``sqrt(1 + 4 kappa^2)``.

    States are indexed by ``L`` with inversion ``m = L - r``. Energies have
    no photon term, so the returned ``q`` uses ``c = 0``: ``lambda = -|kappa| q``.
    """
    if spec.r.doubled < 1:
        raise DomainError("the classical-field approach needs r >= 1/2")
    k = spec.kappa_abs
    theta = 0.5 * math.atan(2 * k)
    r = spec.r.value()
    N = spec.r.doubled
    j = np.arange(N + 1)
    lam = -(r - j) * math.sqrt(1 + 4 * k * k)
    states = [Amplitudes(0, rotated_state(N, int(jj), theta)) for jj in j]
    p0 = states[0].values ** 2
    m_ground = float(p0 @ (np.arange(N + 1) - r))
    meta = {"theta": theta, "m_ground": m_ground,
            "m_ground_closed": r * (math.sin(theta) ** 2 - math.cos(theta) ** 2)}
    return ApproxResult("classical-field", -lam / k, 0, k, states=states, meta=meta)


# ---------------------------------------------------------------- detuned blocks

def _detuned_regime(spec: BlockSpec) -> str:
    if spec.beta == 0.0:
        raise DomainError("beta = 0: use the resonant closed forms instead")
    if spec.c.doubled > spec.r.doubled:
        return "high"
    if spec.c.doubled < 0:
        return "low"
    raise DomainError(f"no detuned formula for 0 <= c={spec.c} <= r={spec.r}")


def detuned_lambda(spec: BlockSpec, j: int) -> float:
    """Energy of state ``j`` far from resonance, in units of the molecular frequency.

    ``|Omega - omega| / Omega = |beta| |kappa|`` and ``omega / Omega = 1 + beta |kappa|``.
    """
    regime = _detuned_regime(spec)
    b, k = spec.beta, spec.kappa_abs
    c, r = spec.c.value(), spec.r.value()
    if regime == "high":
        _check_j_field(spec, j)
        return c - abs(b) * k * (r - j) * math.sqrt(1 + 4 * c / b ** 2)
    top = (spec.c.doubled + spec.r.doubled) // 2
    if not 0 <= j <= top:
        raise DomainError(f"j={j} outside 0..c+r={top}")
    return ((1 + b * k) * c + 0.5 * (r - c) * b * k
            - abs(b) * k * ((c + r) / 2 - j) * math.sqrt(1 + 8 * r / b ** 2))


def detuned(spec: BlockSpec) -> ApproxResult:
    regime = _detuned_regime(spec)
    count = spec.r.doubled + 1 if regime == "high" else (spec.c.doubled + spec.r.doubled) // 2 + 1
    lam = np.array([detuned_lambda(spec, j) for j in range(count)])
    q = (spec.c.value() - lam) / spec.kappa_abs
    tag = "detuned-high-c" if regime == "high" else "detuned-low-c"
    return ApproxResult(tag, q, spec.c, spec.kappa_abs, meta=decoupling_threshold(spec))


def decoupling_threshold(spec: BlockSpec) -> dict:
    """Detuning scales beyond which a block decouples, and the surviving basis state.

    The state index is the photon number that dominates the ground state
    (largest ``q``) once ``|beta|`` is far above threshold.
    """
    c = spec.c.value()
    return {
        "beta_high_c": math.sqrt(4 * max(c, 0.0)),
        "beta_low_c": math.sqrt(8 * spec.r.value()),
        "uncoupled_state_index": spec.n_min if spec.beta >= 0 else spec.n_max,
    }
