"""Parameters and Hamiltonians of the loop-coupled optomechanical system.

All frequencies and rates are in units of the mechanical frequency unless
``omega_M`` is set otherwise. ``scale`` only converts printed values to
physical units and never enters the dynamics.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import scipy.sparse as sp

from .fock import TruncationSpec, mode_operators


class WeakDrivingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters; defaults are the reference set at zero detuning."""

    delta_L: float = 0.0
    delta_R: float = 0.0
    J: float = 0.05
    g_L: float = 0.2
    g_R: float = 0.2
    Omega: float = 0.002
    kappa_L: float = 0.01
    kappa_R: float = 0.01
    kappa_b: float = 0.001
    n_bar_b: float = 0.0
    omega_M: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.omega_M > 0:
            raise ValueError("omega_M must be positive")
        for name in ("kappa_L", "kappa_R", "kappa_b", "n_bar_b"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.J < 0:
            raise ValueError(
                "J must be non-negative; a negative hopping is removed by the phase "
                "change a_R -> -a_R, so pass |J| instead"
            )
        if self.Omega > 0.5 * self.kappa_L:
            warnings.warn(
                f"Omega={self.Omega} exceeds 0.5*kappa_L={0.5 * self.kappa_L}; "
                "the two-photon perturbative picture may not hold",
                WeakDrivingWarning,
                stacklevel=3,
            )

    def replace(self, **changes) -> ModelParams:
        return dataclasses.replace(self, **changes)

    def with_detuning(self, delta: float) -> ModelParams:
        return self.replace(delta_L=delta, delta_R=delta)

    def swapped(self) -> ModelParams:
        """Relabel L <-> R (the drive stays on the mode called L)."""
        return self.replace(
            delta_L=self.delta_R, delta_R=self.delta_L,
            g_L=self.g_R, g_R=self.g_L,
            kappa_L=self.kappa_R, kappa_R=self.kappa_L,
        )

    @property
    def degenerate(self) -> bool:
        return self.g_L == self.g_R and self.delta_L == self.delta_R


def _number_ops(t: TruncationSpec):
    a_L, a_R, b = mode_operators(t)
    return a_L, a_R, b, (a_L.conj().T @ a_L).tocsr(), (a_R.conj().T @ a_R).tocsr()


def build_h_sys(p: ModelParams, t: TruncationSpec) -> sp.csr_matrix:
    """Undriven Hamiltonian in the frame rotating at the drive frequency."""
    a_L, a_R, b, n_L, n_R = _number_ops(t)
    x = b + b.conj().T
    h = (
        p.delta_L * n_L
        + p.delta_R * n_R
        + p.omega_M * (b.conj().T @ b)
        + p.J * (a_L.conj().T @ a_R + a_R.conj().T @ a_L)
        - p.g_L * (n_L @ x)
        - p.g_R * (n_R @ x)
    )
    return sp.csr_matrix(h)


def build_h_I(p: ModelParams, t: TruncationSpec) -> sp.csr_matrix:
    """H_sys plus the coherent drive Omega (a_L^dag + a_L)."""
    a_L = mode_operators(t)[0]
    return sp.csr_matrix(build_h_sys(p, t) + p.Omega * (a_L + a_L.conj().T))


def build_h_eff(p: ModelParams, t: TruncationSpec) -> sp.csr_matrix:
    """Non-Hermitian Hamiltonian with cavity losses only (no mechanical damping)."""
    _, _, _, n_L, n_R = _number_ops(t)
    return sp.csr_matrix(build_h_I(p, t) - 0.5j * (p.kappa_L * n_L + p.kappa_R * n_R))


def photon_number_operator(t: TruncationSpec) -> sp.csr_matrix:
    _, _, _, n_L, n_R = _number_ops(t)
    return sp.csr_matrix(n_L + n_R)


class Diagnostic(NamedTuple):
    name: str
    ok: bool
    message: str


# "much greater than" thresholds used by validate_params
SIDEBAND_RATIO = 10.0
NORMAL_MODE_RATIO = 2.0
WEAK_DRIVE_RATIO = 0.5


def validate_params(p: ModelParams) -> list[Diagnostic]:
    """Regime flags: resolved sidebands, resolvable normal modes, weak drive."""
    kappa = max(p.kappa_L, p.kappa_R)
    out = []
    ok = p.omega_M >= SIDEBAND_RATIO * kappa
    out.append(Diagnostic(
        "resolved_sideband", ok,
        f"omega_M/kappa = {p.omega_M / kappa if kappa else float('inf'):.3g} "
        f"(need >= {SIDEBAND_RATIO:g})",
    ))
    ok = p.J >= NORMAL_MODE_RATIO * kappa
    out.append(Diagnostic(
        "normal_mode_resolvable", ok,
        f"J/kappa = {p.J / kappa if kappa else float('inf'):.3g} (need >= {NORMAL_MODE_RATIO:g})",
    ))
    ok = p.Omega <= WEAK_DRIVE_RATIO * p.kappa_L
    out.append(Diagnostic(
        "weak_driving", ok,
        f"Omega/kappa_L = {p.Omega / p.kappa_L if p.kappa_L else float('inf'):.3g} "
        f"(need <= {WEAK_DRIVE_RATIO:g})",
    ))
    return out
