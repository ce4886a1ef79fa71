"""Thermal and combinatorial statistics of the cooperation number."""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .qnum import DomainError, HalfInt, allowed_r, degeneracy_P

MAX_BRUTE_N = 40
_DPS = 60


@dataclass(frozen=True)
class ThermalEnsemble:
    """``N`` molecules in equilibrium; ``beta_t`` is the level splitting over ``kT``."""

    N: int
    beta_t: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        if not math.isfinite(self.beta_t):
            raise DomainError("beta_t must be finite")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "beta_t", float(self.beta_t))


def thermal_inversion(e: ThermalEnsemble) -> float:
    return -(e.N / 2) * math.tanh(e.beta_t / 2)


def thermal_m_variance(e: ThermalEnsemble) -> float:
    m = thermal_inversion(e)
    return e.N / 4 - m * m / e.N


def _check_m(N: int, m) -> HalfInt:
    m = HalfInt.of(m)
    if abs(m.doubled) > N:
        raise DomainError(f"|m| = {abs(m.doubled) / 2} exceeds N/2 = {N / 2}")
    if (m.doubled - N) % 2:
        raise DomainError(f"m={m} has the wrong parity for N={N}")
    return m


def mean_r_r1_given_m(N: int, m) -> float:
    """Average of ``r(r+1)`` over all states with inversion ``m``."""
    mv = _check_m(N, m).value()
    return mv * mv + N / 2


def var_r_r1_given_m(N: int, m) -> float:
    mv = _check_m(N, m).value()
    return N * N / 4 - mv * mv


def partition_function(e: ThermalEnsemble) -> float:
    """Closed form ``2^N cosh^N(beta/2)``."""
    return float(mpmath.power(2 * mpmath.cosh(mpmath.mpf(e.beta_t) / 2), e.N))


def partition_function_sum(e: ThermalEnsemble) -> float:
    """``sum_r P(r) sinh((r + 1/2) beta) / sinh(beta/2)``, the ``beta = 0`` limit being ``sum (2r+1) P(r)``."""
    with mpmath.workdps(_DPS):
        b = mpmath.mpf(e.beta_t)
        total = mpmath.mpf(0)
        for r in allowed_r(e.N):
            rv = mpmath.mpf(r.doubled) / 2
            if b == 0:
                term = 2 * rv + 1
            else:
                term = mpmath.sinh((rv + mpmath.mpf(1) / 2) * b) / mpmath.sinh(b / 2)
            total += degeneracy_P(e.N, r) * term
        return float(total)


@dataclass(frozen=True)
class BruteStats:
    m_mean: float
    m_var: float
    r_r1_mean_by_m: dict
    r_r1_var_by_m: dict
    partition: float


def brute_thermal_stats(e: ThermalEnsemble) -> BruteStats:
    """Direct sums over every ``(r, m)`` multiplet with weights ``P(r) exp(-m beta)``.

    Keys of the per-``m`` dictionaries are doubled inversions ``2m``.
    """
    if e.N > MAX_BRUTE_N:
        raise DomainError(f"enumeration is limited to N <= {MAX_BRUTE_N}")
    with mpmath.workdps(_DPS):
        b = mpmath.mpf(e.beta_t)
        Z = s1 = s2 = mpmath.mpf(0)
        by_m = {}
        for r in allowed_r(e.N):
            P = degeneracy_P(e.N, r)
            rr1 = mpmath.mpf(r.doubled * (r.doubled + 2)) / 4
            for m2 in range(-r.doubled, r.doubled + 1, 2):
                m = mpmath.mpf(m2) / 2
                w = P * mpmath.exp(-m * b)
                Z += w
                s1 += w * m
                s2 += w * m * m
                acc = by_m.setdefault(m2, [0, 0, 0])
                acc[0] += P
                acc[1] += P * rr1
                acc[2] += P * rr1 * rr1
        mean = s1 / Z
        var = s2 / Z - mean * mean
        means, variances = {}, {}
        for m2, (w, a1, a2) in sorted(by_m.items()):
            mu = a1 / w
            means[m2] = float(mu)
            variances[m2] = float(a2 / w - mu * mu)
        return BruteStats(float(mean), float(var), means, variances, float(Z))
