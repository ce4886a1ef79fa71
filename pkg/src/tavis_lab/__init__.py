"""Exact and approximate spectra of N two-level molecules coupled to one field mode."""
from .exact import EigenSystem, Spectrum, full_eigensystem, solve_spectrum
from .qnum import Amplitudes, BlockSpec, DomainError, HalfInt

__all__ = ["Amplitudes", "BlockSpec", "DomainError", "EigenSystem", "HalfInt", "Spectrum",
           "full_eigensystem", "solve_spectrum"]
__version__ = "0.1.0"
