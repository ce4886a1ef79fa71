"""Field observables after exact evolution from a product initial state.

Time is measured in units of the inverse molecular frequency, so phases
read ``exp(-i lambda t)`` with ``lambda = c - |kappa| q``. A single excited
molecule in the vacuum gives ``<E^- E^+> = sin^2(|kappa| t)``. The
field-strength prefactor ``gamma / mu`` is factored out of both observables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exact import full_eigensystem
from .qnum import BlockSpec, DomainError, HalfInt, allowed_r, degeneracy_P

MAX_MOLECULES = 8
MAX_CUTOFF = 40
MAX_SUPERRADIANT_N = 20
PREFACTOR_NOTE = "gamma/mu factored out; exp(-i t) carrier phase retained"


class CostError(DomainError):
    """The requested evolution exceeds the configured cost guard."""


@dataclass(frozen=True)
class FieldState:
    kind: str  # fock | coherent | thermal
    n0: int = 0
    amplitude: complex = 0.0
    nbar: float = 0.0
    cutoff: int = 0

    def __post_init__(self):
        if self.kind not in ("fock", "coherent", "thermal"):
            raise DomainError(f"unknown field state {self.kind!r}")
        if self.kind == "fock":
            if self.n0 < 0:
                raise DomainError("photon number must be >= 0")
            object.__setattr__(self, "cutoff", max(self.cutoff, self.n0))
        else:
            mean = abs(self.amplitude) ** 2 if self.kind == "coherent" else self.nbar
            if self.kind == "thermal" and self.nbar < 0:
                raise DomainError("nbar must be >= 0")
            if self.cutoff < 5 * mean:
                raise DomainError(f"cutoff {self.cutoff} is below 5x the mean photon number {mean}")

    def density(self) -> np.ndarray:
        dim = self.cutoff + 1
        if self.kind == "fock":
            rho = np.zeros((dim, dim), complex)
            rho[self.n0, self.n0] = 1.0
            return rho
        n = np.arange(dim)
        if self.kind == "coherent":
            a = complex(self.amplitude)
            logfac = np.array([math.lgamma(k + 1) for k in n]) / 2
            if a == 0:
                psi = (n == 0).astype(complex)
            else:
                psi = np.exp(n * np.log(abs(a)) - logfac) * np.exp(1j * n * np.angle(a))
            psi /= np.linalg.norm(psi)
            return np.outer(psi, psi.conj())
        nb = self.nbar
        p = (n == 0).astype(float) if nb == 0 else (nb / (1 + nb)) ** n / (1 + nb)
        return np.diag(p / p.sum()).astype(complex)


@dataclass(frozen=True)
class MolecularState:
    kind: str  # all-excited | pure | thermal
    N: int = 1
    r: HalfInt | None = None
    m: HalfInt | None = None
    beta_t: float = 0.0

    def __post_init__(self):
        if self.kind not in ("all-excited", "pure", "thermal"):
            raise DomainError(f"unknown molecular state {self.kind!r}")
        if self.kind == "pure":
            r, m = HalfInt.of(self.r), HalfInt.of(self.m)
            if abs(m.doubled) > r.doubled or (r.doubled - m.doubled) % 2:
                raise DomainError(f"m={m} not in the ladder of r={r}")
            object.__setattr__(self, "r", r)
            object.__setattr__(self, "m", m)
            object.__setattr__(self, "N", r.doubled)
        elif self.N < 1:
            raise DomainError("N must be >= 1")

    def components(self) -> list[tuple[float, HalfInt, HalfInt]]:
        """``(weight, r, m)`` triples; degenerate copies of a multiplet share one entry."""
        if self.kind == "all-excited":
            top = HalfInt(self.N)
            return [(1.0, top, top)]
        if self.kind == "pure":
            return [(1.0, self.r, self.m)]
        out = []
        for r in allowed_r(self.N):
            P = degeneracy_P(self.N, r)
            for m2 in range(-r.doubled, r.doubled + 1, 2):
                out.append((P * math.exp(-m2 / 2 * self.beta_t), r, HalfInt(m2)))
        z = sum(w for w, _, _ in out)
        return [(w / z, r, m) for w, r, m in out if w / z > 0.0]


@dataclass(frozen=True)
class InitialStateSpec:
    field: FieldState
    molecules: MolecularState
    beta: float = 0.0
    kappa_abs: float = 1.0

    def check_cost(self):
        if self.molecules.N > MAX_MOLECULES or self.field.cutoff > MAX_CUTOFF:
            blocks = (self.field.cutoff + 1) * (self.molecules.N + 1) ** 2
            raise CostError(f"N={self.molecules.N}, cutoff={self.field.cutoff} exceed the guard "
                            f"(N <= {MAX_MOLECULES}, cutoff <= {MAX_CUTOFF}); "
                            f"about {blocks} block propagators would be needed")


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    observable: str
    prefactor_convention: str = PREFACTOR_NOTE
    time_unit: str = "1/Omega"
    meta: dict = field(default_factory=dict)


@lru_cache(maxsize=512)
def _block(r2: int, c2: int, beta: float, kappa_abs: float):
    spec = BlockSpec(HalfInt(r2), HalfInt(c2), beta, kappa_abs)
    es = full_eigensystem(spec)
    return spec.n_min, es.matrix(), es.spectrum.lam


def _propagator(r: HalfInt, c2: int, beta, kappa_abs, t):
    """``G[k, n] = <k| exp(-iHt) |n>`` within block ``c`` in its photon-number basis."""
    n_min, A, lam = _block(r.doubled, c2, beta, kappa_abs)
    G = (A.T * np.exp(-1j * lam * t)) @ A
    return n_min, G


def field_density_matrix(init: InitialStateSpec, t: float) -> np.ndarray:
    """Reduced field density operator at time ``t`` (photon numbers 0 .. cutoff + N)."""
    init.check_cost()
    rho0 = init.field.density()
    cut = init.field.cutoff
    size = cut + init.molecules.N + 1
    out = np.zeros((size, size), complex)
    nz = [(a, b) for a, b in zip(*np.nonzero(rho0))]
    for w, r, m in init.molecules.components():
        props = {}
        for n in range(cut + 1):
            c2 = 2 * n + m.doubled
            props[n] = _propagator(r, c2, init.beta, init.kappa_abs, t)
        for a, b in nz:
            na, Ga = props[a]
            nb, Gb = props[b]
            # <k|rho|k'> receives G_c[k, a] conj(G_c'[k', b]) with k' - k = b - a
            col_a = Ga[:, a - na]
            col_b = Gb[:, b - nb]
            ks = np.arange(na, na + col_a.size)
            kps = ks + (b - a)
            ok = (kps >= nb) & (kps < nb + col_b.size)
            out[ks[ok], kps[ok]] += w * rho0[a, b] * col_a[ok] * np.conj(col_b[kps[ok] - nb])
    return out


def field_density_element(init: InitialStateSpec, t: float, n: int, n_prime: int) -> complex:
    rho = field_density_matrix(init, t)
    if not (0 <= n < rho.shape[0] and 0 <= n_prime < rho.shape[0]):
        return 0.0j
    return complex(rho[n, n_prime])


def _series(init, times, reduce, observable):
    times = np.asarray(times, dtype=float)
    vals = [reduce(field_density_matrix(init, t)) for t in times]
    return TimeSeries(times, np.array(vals), observable)


def expectation_Eminus(init: InitialStateSpec, times) -> TimeSeries:
    """``<E^-(t)>`` as ``-<a^dag(t)>``."""
    def reduce(rho):
        n = np.arange(rho.shape[0] - 1)
        return -np.sum(np.sqrt(n + 1.0) * np.diagonal(rho, 1))
    return _series(init, times, reduce, "E-")


def expectation_EmEp(init: InitialStateSpec, times) -> TimeSeries:
    """``<E^- E^+(t)>`` as the mean photon number."""
    def reduce(rho):
        return float(np.real(np.arange(rho.shape[0]) @ np.diagonal(rho)))
    ts = _series(init, times, reduce, "E-E+")
    return TimeSeries(ts.times, ts.values.astype(float), ts.observable)


def trace_series(init: InitialStateSpec, times) -> np.ndarray:
    return np.array([np.real(np.trace(field_density_matrix(init, t))) for t in times])


def superradiant_vacuum_EmEp(N: int, times, kappa_abs: float = 1.0, mixed_r: bool = False,
                             slowest_only: bool = False) -> TimeSeries:
    """Mean photon number for all molecules excited and an empty field.

    ``sum_m (r - m) |sum_j A_{r-m}^{(j)} A_0^{(j)} exp(i |kappa| q_j t)|^2`` on the
    block ``c = r = N/2``. ``mixed_r`` instead averages every ``r`` allowed for
    ``N`` with weight ``P(r)``. ``slowest_only`` keeps only pairs ``|j - j'| <= 1``
    of the double sum over eigenstates.
    """
    if not 1 <= N <= MAX_SUPERRADIANT_N:
        raise DomainError(f"need 1 <= N <= {MAX_SUPERRADIANT_N}")
    times = np.asarray(times, dtype=float)
    rs = allowed_r(N) if mixed_r else [HalfInt(N)]
    weights = np.array([degeneracy_P(N, r) if mixed_r else 1 for r in rs], dtype=float)
    weights /= weights.sum()
    total = np.zeros(times.size)
    for w, r in zip(weights, rs):
        spec = BlockSpec(r, r, 0.0, kappa_abs)
        es = full_eigensystem(spec)
        A = es.matrix()  # A[j, n], n = 0 .. 2r
        q = es.spectrum.q
        nphot = np.arange(A.shape[1])
        if slowest_only:
            coef = A * A[:, :1]  # coef[j, n] = A_n^j A_0^j
            jj = np.arange(q.size)
            keep = np.abs(jj[:, None] - jj[None, :]) <= 1
            phase = np.exp(1j * kappa_abs * (q[:, None] - q[None, :])[None] * times[:, None, None])
            pair = np.einsum("jn,kn,n->jk", coef, coef, nphot)
            vals = np.real(np.sum(phase * (pair * keep)[None], axis=(1, 2)))
        else:
            phase = np.exp(1j * kappa_abs * np.outer(times, q))  # [t, j]
            amp = phase @ (A * A[:, :1])  # [t, n]
            vals = np.abs(amp) ** 2 @ nphot
        total += w * vals
    meta = {"mixed_r": mixed_r, "slowest_only": slowest_only}
    return TimeSeries(times, total, "E-E+", meta=meta)
