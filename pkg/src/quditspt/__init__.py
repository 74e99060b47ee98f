"""Qudit MBQC toolkit on Z_d^3 SPT resource states."""

from .core import PrimeDim, QuditError, ZdElem, PhaseExp, half_times, mod_inverse, omega_complex
from .statevector import LocalUnitary, MeasBasis, StateVector, fidelity_up_to_phase, new_plus_state

__version__ = "0.1.0"

__all__ = [
    "PrimeDim", "QuditError", "ZdElem", "PhaseExp", "half_times", "mod_inverse", "omega_complex",
    "LocalUnitary", "MeasBasis", "StateVector", "fidelity_up_to_phase", "new_plus_state",
]
