"""Quantum-number arithmetic shared by every solver.

Cooperation numbers ``r``, excitation numbers ``c`` and inversions ``m`` are
integers or half-integers, so they are stored doubled (``r = 25/2`` is kept as
``25``) and every parity or range test is an integer comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

# Bessel-function constant J1(2.405) for the lowest TM mode of a cylindrical cavity.
J1_CYLINDER = 0.5191
HBAR_CGS = 1.0545718e-27  # erg s


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


@dataclass(frozen=True, order=True)
class HalfInt:
    doubled: int

    def __post_init__(self):
        if not isinstance(self.doubled, (int, np.integer)) or isinstance(self.doubled, bool):
            raise TypeError(f"doubled must be an integer, got {self.doubled!r}")
        object.__setattr__(self, "doubled", int(self.doubled))

    @classmethod
    def of(cls, value) -> "HalfInt":
        """Coerce ``12.5``, ``"25/2"``, ``"12.5"``, ``Fraction(25, 2)`` or an int."""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, (bool, np.bool_)):
            raise TypeError("booleans are not quantum numbers")
        if isinstance(value, (int, np.integer)):
            return cls(2 * int(value))
        if isinstance(value, (float, np.floating)):
            if not math.isfinite(value):
                raise DomainError(f"{value!r} is not a half-integer")
            twice = 2.0 * float(value)
            if twice != round(twice):
                raise DomainError(f"{value!r} is not a half-integer")
            return cls(int(round(twice)))
        try:
            frac = Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse {value!r} as a half-integer") from exc
        twice = 2 * frac
        if twice.denominator != 1:
            raise DomainError(f"{value!r} is not a half-integer")
        return cls(int(twice))

    def value(self) -> float:
        return self.doubled / 2

    def fraction(self) -> Fraction:
        return Fraction(self.doubled, 2)

    @property
    def is_integer(self) -> bool:
        return self.doubled % 2 == 0

    def decimal_str(self) -> str:
        return str(self.doubled // 2) if self.is_integer else f"{self.doubled / 2:.1f}"

    def fraction_str(self) -> str:
        return str(self.doubled // 2) if self.is_integer else f"{self.doubled}/2"

    def __add__(self, other):
        return HalfInt(self.doubled + HalfInt.of(other).doubled)

    __radd__ = __add__

    def __sub__(self, other):
        return HalfInt(self.doubled - HalfInt.of(other).doubled)

    def __rsub__(self, other):
        return HalfInt(HalfInt.of(other).doubled - self.doubled)

    def __neg__(self):
        return HalfInt(-self.doubled)

    def __float__(self):
        return self.value()

    def __str__(self):
        return self.decimal_str()


def _as_int(h: HalfInt) -> int:
    if not h.is_integer:
        raise DomainError(f"{h} is not an integer")
    return h.doubled // 2


@dataclass(frozen=True)
class BlockSpec:
    """One invariant ``(r, c)`` sector of the Hamiltonian plus its couplings.

    ``beta`` is the relative tuning ``(omega - Omega) / (|kappa| Omega)``,
    ``kappa_abs`` is ``|gamma| / Omega`` and ``phi`` the combined phase.
    The block spans photon numbers ``n_min .. n_max`` with inversion
    ``m = c - n``.
    """

    r: HalfInt
    c: HalfInt
    beta: float = 0.0
    kappa_abs: float = 1.0
    phi: float = 0.0
    dim: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r = HalfInt.of(self.r)
        c = HalfInt.of(self.c)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "c", c)
        if r.doubled < 0:
            raise DomainError(f"cooperation number must be >= 0, got r={r}")
        if c.doubled < -r.doubled:
            raise DomainError(f"c={c} lies below -r={-r}")
        if (r.doubled - c.doubled) % 2:
            raise DomainError(f"r={r} and c={c} differ by a half-integer")
        for name in ("beta", "kappa_abs", "phi"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if self.kappa_abs <= 0:
            raise DomainError(f"kappa_abs must be > 0, got {self.kappa_abs}")
        object.__setattr__(self, "dim", min(r.doubled + 1, (r.doubled + c.doubled) // 2 + 1))

    @property
    def n_min(self) -> int:
        return max(0, (self.c.doubled - self.r.doubled) // 2)

    @property
    def n_max(self) -> int:
        return (self.c.doubled + self.r.doubled) // 2

    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def inversions(self) -> np.ndarray:
        """``m = c - n`` for each photon number of the block."""
        return self.c.value() - self.photon_numbers()

    def with_(self, **changes) -> "BlockSpec":
        kw = dict(r=self.r, c=self.c, beta=self.beta, kappa_abs=self.kappa_abs, phi=self.phi)
        kw.update(changes)
        return BlockSpec(**kw)


@dataclass(frozen=True)
class Amplitudes:
    """Real amplitudes ``A_n`` (phase convention ``phi = 0``) on ``n_min..``."""

    n_min: int
    values: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if self.normalized and vals.size and abs(vals @ vals - 1.0) > 1e-12:
            raise ValueError(f"amplitudes flagged normalized have norm^2 {vals @ vals!r}")

    def __len__(self):
        return self.values.size

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_min + self.values.size)

    def with_phase(self, phi: float) -> np.ndarray:
        """Complex amplitudes with the ``exp(-i n phi)`` factor restored."""
        return self.values * np.exp(-1j * self.photon_numbers * phi)

    def photon_stats(self) -> tuple[float, float]:
        p = self.values ** 2
        p = p / p.sum()
        n = self.photon_numbers
        mean = float(p @ n)
        return mean, float(p @ (n - mean) ** 2)

    def overlap(self, other: "Amplitudes") -> float:
        """``<self|other>`` over the common photon range."""
        lo = max(self.n_min, other.n_min)
        hi = min(self.n_min + len(self), other.n_min + len(other))
        if hi <= lo:
            return 0.0
        a = self.values[lo - self.n_min:hi - self.n_min]
        b = other.values[lo - other.n_min:hi - other.n_min]
        return float(a @ b)


def coupling_C(r, M) -> float:
    """``sqrt(r(r+1) - M(M+1))``, the ladder matrix element ``<M+1|R+|M>``."""
    r2 = HalfInt.of(r).doubled
    m2 = HalfInt.of(M).doubled
    # 4 * [r(r+1) - M(M+1)] in integers
    rad4 = r2 * (r2 + 2) - m2 * (m2 + 2)
    if rad4 < 0:
        raise DomainError(f"negative radicand for C(r={r2 / 2}, M={m2 / 2})")
    return math.sqrt(rad4) / 2


def coupling_C2(r2: int, m2: np.ndarray) -> np.ndarray:
    """Vectorised ``C^2`` from doubled ``r`` and an array of doubled ``M``."""
    m2 = np.asarray(m2, dtype=np.int64)
    rad4 = r2 * (r2 + 2) - m2 * (m2 + 2)
    if np.any(rad4 < 0):
        bad = m2[rad4 < 0][0]
        raise DomainError(f"negative radicand for C(r={r2 / 2}, M={bad / 2})")
    return rad4 / 4.0


def block_dim(spec: BlockSpec) -> int:
    return spec.dim


def degeneracy_P(N: int, r) -> int:
    """Number of ``(r, m)`` multiplets among the ``2**N`` product states."""
    N = int(N)
    r2 = HalfInt.of(r).doubled
    if N < 0 or r2 < 0 or r2 > N:
        raise DomainError(f"need 0 <= r <= N/2, got N={N}, r={r2 / 2}")
    if (N - r2) % 2:
        raise DomainError(f"parity mismatch: N={N}, r={r2 / 2}")
    hi = (N + r2) // 2 + 1
    lo = (N - r2) // 2
    return math.factorial(N) * (r2 + 1) // (math.factorial(hi) * math.factorial(lo))


def allowed_r(N: int) -> list[HalfInt]:
    """Cooperation numbers present for ``N`` molecules, ascending."""
    return [HalfInt(d) for d in range(N % 2, N + 1, 2)]


def coupling_from_cavity(dipole: float, volume: float, omega: float) -> float:
    """|gamma| for molecules on the axis of a cylindrical TM010 cavity.

    Gaussian units: ``dipole`` in esu cm, ``volume`` in cm^3. The result
    carries the time unit of ``omega`` (pass cycles/s to get cycles/s).
    """
    for name, val in (("dipole", dipole), ("volume", volume), ("omega", omega)):
        if not val > 0:
            raise DomainError(f"{name} must be positive, got {val!r}")
    return dipole / J1_CYLINDER * math.sqrt(2 * math.pi * omega / (HBAR_CGS * volume))
