"""Validity checks for the continuum approximation and the rotating-wave approximation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .approx import _diffeq_q_direct, diffeq_params
from .exact import EigenSystem, full_eigensystem, solve_spectrum
from .qnum import BlockSpec, DomainError, coupling_C2

_DEGENERATE_TOL = 1e-9


@dataclass(frozen=True)
class ValidityReport:
    criterion: str
    margin: float
    detail: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.margin < 1.0


def _cubic_factor(j: int, alpha2: float) -> float:
    return (30 * j * j + 30 * j + 11) / (4 * alpha2 ** 2)


def cubic_perturbed_q(spec: BlockSpec, j: int) -> tuple[float, ValidityReport]:
    """Continuum ``q_j`` with the second-order shift from the dropped cubic term."""
    p = diffeq_params(spec)
    g = _cubic_factor(j, p.alpha2)
    if 1.0 - g <= 0:
        raise DomainError(f"cubic correction diverges: (30j^2+30j+11)/(4 alpha2^2) = {g}")
    h = j + 0.5
    q = (-math.sqrt(p.alpha2) * h + math.sqrt(p.alpha2 * h * h + p.alpha1 * (1.0 - g))) / (1.0 - g)
    report = ValidityReport("cubic", g, {"alpha2": p.alpha2, "j": j,
                                             "q_uncorrected": _diffeq_q_direct(p, j)})
    return q, report


def doubling_validity(spec: BlockSpec, q0: float | None = None) -> ValidityReport:
    """Counter-rotating terms are negligible while ``|kappa| q_0 / 2`` stays below one."""
    if q0 is None:
        q0 = float(solve_spectrum(spec).q[0]) if spec.dim <= 120 else float(full_eigensystem(spec).spectrum.q[0])
    margin = spec.kappa_abs * q0 / 2
    return ValidityReport("doubling", margin, {"q0": q0, "kappa_abs": spec.kappa_abs})


def _neighbour(spec: BlockSpec, shift: int) -> EigenSystem | None:
    c2 = spec.c.doubled + 2 * shift
    if c2 < -spec.r.doubled:
        return None
    return full_eigensystem(spec.with_(c=spec.c.fraction() + shift))


def _raise_elements(lower: EigenSystem, upper: EigenSystem, r2: int) -> np.ndarray:
    """``<upper, j | a^dag R_+ | lower, j'>`` for blocks with ``c_upper = c_lower + 2``."""
    lo_spec = lower.spec
    n = lo_spec.photon_numbers()
    m2 = lo_spec.c.doubled - 2 * n
    coef = np.sqrt(n + 1.0) * np.sqrt(coupling_C2(r2, m2))
    A_lo = lower.matrix()
    A_up = upper.matrix()
    out = np.zeros((A_up.shape[0], A_lo.shape[0]))
    up_min = upper.spec.n_min
    for k, nn in enumerate(n):
        target = nn + 1 - up_min
        if 0 <= target < A_up.shape[1] and coef[k] != 0.0:
            out += coef[k] * np.outer(A_up[:, target], A_lo[:, k])
    return out


def doubling_W2(spec: BlockSpec, j: int, systems: dict | None = None) -> float:
    """Second-order energy shift of state ``j`` from the counter-rotating terms.

    Couples to the ``c - 2`` block through ``a^dag R_+`` and to the ``c + 2``
    block through ``a R_-``; blocks below ``c = -r`` do not exist and
    contribute nothing.
    """
    if not 0 <= j < spec.dim:
        raise DomainError(f"j={j} outside 0..{spec.dim - 1}")
    k = spec.kappa_abs
    here = full_eigensystem(spec)
    q = here.spectrum.q[j]
    total = 0.0
    below = _neighbour(spec, -2)
    if below is not None:
        elems = _raise_elements(below, here, spec.r.doubled)[j]
        den = 2.0 - k * (q - below.spectrum.q)
        _check_denominators(den, spec.c.value() - 2)
        total += float(np.sum(elems ** 2 / den))
    above = _neighbour(spec, 2)
    elems = _raise_elements(here, above, spec.r.doubled)[:, j]
    den = 2.0 - k * (above.spectrum.q - q)
    _check_denominators(den, spec.c.value() + 2)
    total -= float(np.sum(elems ** 2 / den))
    return k * k * total


def _check_denominators(den, c_other):
    bad = np.flatnonzero(np.abs(den) < _DEGENERATE_TOL)
    if bad.size:
        raise DomainError(f"vanishing denominator for j'={int(bad[0])} in block c'={c_other}")


def doubling_hamiltonian(r, n_max: int, kappa_abs: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense Hamiltonian with all four coupling terms on ``n <= n_max``.

    Returns ``(H, n, m)`` with basis labels. Units of the molecular
    frequency at resonance. Test oracle only: it grows as ``(n_max+1)(2r+1)``.
    """
    from .qnum import HalfInt

    r2 = HalfInt.of(r).doubled
    m2 = np.arange(-r2, r2 + 1, 2)
    nn, mm = np.meshgrid(np.arange(n_max + 1), m2, indexing="ij")
    nn, mm = nn.ravel(), mm.ravel()
    dim = nn.size
    index = {(int(a), int(b)): i for i, (a, b) in enumerate(zip(nn, mm))}
    H = np.diag(nn + mm / 2.0).astype(float)
    for i, (n, m) in enumerate(zip(nn, mm)):
        up = math.sqrt(max((r2 * (r2 + 2) - m * (m + 2)) / 4.0, 0.0))  # R_+ on m
        for dn in (1, -1):  # a^dag R_+ and a R_+ ; hermitian partners fill the rest
            tgt = index.get((int(n + dn), int(m + 2)))
            if tgt is None or up == 0.0:
                continue
            amp = math.sqrt(n + 1) if dn == 1 else math.sqrt(n)
            H[tgt, i] -= kappa_abs * amp * up
            H[i, tgt] -= kappa_abs * amp * up
    return H, nn, mm / 2.0
