"""Photon blockade in a loop-coupled two-cavity optomechanical system.

Analytic weak-drive amplitudes and a master-equation reference solver.
"""

from .analytic import g2_analytic, occupations, steady_amplitudes
from .fock import TruncationSpec
from .lindblad import build_liouvillian, observables, steady_state
from .model import ModelParams

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "TruncationSpec",
    "build_liouvillian",
    "g2_analytic",
    "observables",
    "occupations",
    "steady_amplitudes",
    "steady_state",
]
