"""Weak-drive steady-state amplitudes and equal-time correlations.

Amplitudes C[m, n, k] live on the displaced basis |m, n>|k~(m, n)> with
m + n <= 2 and C[0, 0, 0] = 1. Two routes are provided: the closed forms for
equal couplings and equal cavity losses, and a general route that solves the
first- and second-order amplitude equations as linear systems with exact
Franck-Condon overlaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fock import franck_condon_matrix
from .model import ModelParams
from .spectrum import bare_eigenvalue, conditional_displacement

SQRT2 = math.sqrt(2.0)
DEFAULT_K_MAX = 15
TAIL_WINDOW = 3
TAIL_TOL = 1e-8


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class AmplitudeSet:
    amplitudes: np.ndarray  # shape (3, 3, k_max + 1), zero where m + n > 2
    method: str
    k_max: int

    def __getitem__(self, key):
        return self.amplitudes[key]

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def first_order(self) -> np.ndarray:
        return np.stack([self.amplitudes[1, 0], self.amplitudes[0, 1]])

    def second_order(self) -> np.ndarray:
        return np.stack([self.amplitudes[2, 0], self.amplitudes[1, 1], self.amplitudes[0, 2]])

    def tail_fraction(self, window: int = TAIL_WINDOW) -> float:
        """Weight in the top ``window`` phonon indices relative to the excited amplitudes."""
        excited = self.amplitudes.copy()
        excited[0, 0] = 0
        total = np.sum(np.abs(excited) ** 2)
        if total == 0:
            return 0.0
        return float(np.sum(np.abs(excited[:, :, -window:]) ** 2) / total)


def pi_matrix(p: ModelParams, k_max: int) -> np.ndarray:
    """Pi[k, l] = <k|D(-g/omega_M)|l> for the equal-coupling case."""
    if p.g_L != p.g_R:
        raise PreconditionError("pi_matrix needs g_L == g_R; use franck_condon_matrix for each pair")
    return franck_condon_matrix(k_max, p.g_L / p.omega_M, 0.0).real


def _energies(p: ModelParams, k_max: int) -> dict[tuple[int, int], np.ndarray]:
    return {
        (m, n): np.array([bare_eigenvalue(m, n, k, p) for k in range(k_max + 1)])
        for m, n in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    }


def steady_amplitudes_closed(p: ModelParams, k_max: int = DEFAULT_K_MAX) -> AmplitudeSet:
    """Closed-form steady state for g_L = g_R and kappa_L = kappa_R."""
    if p.g_L != p.g_R or p.kappa_L != p.kappa_R:
        raise PreconditionError(
            "closed forms need g_L == g_R and kappa_L == kappa_R; use steady_amplitudes_linear"
        )
    E = _energies(p, k_max)
    J, Om, kap = p.J, p.Omega, p.kappa_L
    Pi = pi_matrix(p, k_max)
    e10, e01, e20, e11, e02 = E[1, 0], E[0, 1], E[2, 0], E[1, 1], E[0, 2]

    with np.errstate(divide="raise", invalid="raise"):
        try:
            den1 = 4 * J**2 - 4 * e01 * e10 + 2j * (e01 + e10) * kap + kap**2
            c01 = -4 * J * Om * Pi[:, 0] / den1
            c10 = 2 * Om * (2 * e01 - 1j * kap) * Pi[:, 0] / den1

            s10 = Pi @ c10
            s01 = Pi @ c01
            m_k = e11 * e20 + e02 * e11 + e02 * e20
            den2 = (
                2 * J**2 * (e02 + e20) - e02 * e11 * e20 + 1j * (m_k - 4 * J**2) * kap
                + (e02 + e11 + e20) * kap**2 - 1j * kap**3
            )
            den02 = 2 * J**2 * (e20 - 1j * kap) + (e02 - 1j * kap) * (
                2 * J**2 + (1j * e11 + kap) * (1j * e20 + kap)
            )
            c02 = SQRT2 * J * Om * (2 * J * s10 + (1j * kap - e20) * s01) / den02
            c20 = -SQRT2 * Om * (
                J * (e02 - 1j * kap) * s01 + (2 * J**2 + (1j * e11 + kap) * (1j * e02 + kap)) * s10
            ) / den2
            c11 = Om * (e02 - 1j * kap) * ((e20 - 1j * kap) * s01 - 2 * J * s10) / den2
        except FloatingPointError as exc:
            raise ZeroDivisionError("vanishing denominator in the closed-form amplitudes") from exc

    C = np.zeros((3, 3, k_max + 1), dtype=complex)
    C[0, 0, 0] = 1.0
    C[1, 0], C[0, 1] = c10, c01
    C[2, 0], C[1, 1], C[0, 2] = c20, c11, c02
    return AmplitudeSet(C, "closed_form", k_max)


def _overlap(k_max: int, p: ModelParams, bra: tuple[int, int], ket: tuple[int, int],
             zero_order: bool) -> np.ndarray:
    """F[k, l] = <k~(bra)|l~(ket)>."""
    if zero_order:
        return np.eye(k_max + 1)
    return franck_condon_matrix(
        k_max, conditional_displacement(*bra, p), conditional_displacement(*ket, p)
    )


def steady_amplitudes_linear(p: ModelParams, k_max: int = DEFAULT_K_MAX,
                             hopping_overlap: str = "exact") -> AmplitudeSet:
    """Perturbative steady state for arbitrary couplings and losses.

    The one-photon amplitudes are sourced by the drive acting on |0,0>|0>; the
    two-photon amplitudes by the drive acting on the one-photon amplitudes.
    All drive overlaps are exact. ``hopping_overlap="zero_order"`` replaces the
    overlaps in the hopping terms by delta_{k,l}, as in the analytic spectrum.
    """
    if hopping_overlap not in ("exact", "zero_order"):
        raise ValueError("hopping_overlap must be 'exact' or 'zero_order'")
    zo = hopping_overlap == "zero_order"
    K = k_max + 1
    E = _energies(p, k_max)
    J, Om = p.J, p.Omega
    kL, kR = p.kappa_L, p.kappa_R

    def diag(m, n):
        return np.diag(E[m, n] - 0.5j * (kL * m + kR * n))

    hop = J * _overlap(k_max, p, (1, 0), (0, 1), zo)
    H1 = np.block([[diag(1, 0), hop], [hop.conj().T, diag(0, 1)]])
    src1 = np.concatenate([_overlap(k_max, p, (1, 0), (0, 0), False)[:, 0], np.zeros(K)])
    c1 = _solve(H1, -Om * src1)
    c10, c01 = c1[:K], c1[K:]

    h_20_11 = SQRT2 * J * _overlap(k_max, p, (2, 0), (1, 1), zo)
    h_11_02 = SQRT2 * J * _overlap(k_max, p, (1, 1), (0, 2), zo)
    Z = np.zeros((K, K))
    H2 = np.block([
        [diag(2, 0), h_20_11, Z],
        [h_20_11.conj().T, diag(1, 1), h_11_02],
        [Z, h_11_02.conj().T, diag(0, 2)],
    ])
    src2 = np.concatenate([
        SQRT2 * _overlap(k_max, p, (2, 0), (1, 0), False) @ c10,
        _overlap(k_max, p, (1, 1), (0, 1), False) @ c01,
        np.zeros(K),
    ])
    c2 = _solve(H2, -Om * src2)

    C = np.zeros((3, 3, K), dtype=complex)
    C[0, 0, 0] = 1.0
    C[1, 0], C[0, 1] = c10, c01
    C[2, 0], C[1, 1], C[0, 2] = c2[:K], c2[K:2 * K], c2[2 * K:]
    return AmplitudeSet(C, "linear_solve", k_max)


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise ZeroDivisionError("singular amplitude equations (undamped resonance)") from exc
    if not np.all(np.isfinite(x)):
        raise ZeroDivisionError("singular amplitude equations (undamped resonance)")
    return x


def steady_amplitudes(p: ModelParams, k_max: int = DEFAULT_K_MAX, method: str = "auto",
                      tail_tol: float = TAIL_TOL) -> AmplitudeSet:
    """Pick a route and enlarge the phonon cutoff once if the tail carries weight."""
    if method == "auto":
        method = "closed" if (p.g_L == p.g_R and p.kappa_L == p.kappa_R) else "linear"
    solver = {"closed": steady_amplitudes_closed, "linear": steady_amplitudes_linear}[method]
    amps = solver(p, k_max)
    if amps.tail_fraction() > tail_tol:
        amps = solver(p, 2 * k_max)
    return amps


class Occupations(NamedTuple):
    P_L1: float
    P_R1: float
    P_L2: float
    P_R2: float
    norm: float


def occupations(a: AmplitudeSet, normalized: bool = True) -> Occupations:
    """Photon-number occupations from the amplitudes.

    With ``normalized=False`` the weak-drive shortcut norm = 1 is used.
    """
    C = a.amplitudes
    norm = a.norm
    div = norm if normalized else 1.0
    s = lambda m, n: float(np.sum(np.abs(C[m, n]) ** 2)) / div
    return Occupations(s(1, 0), s(0, 1), s(2, 0), s(0, 2), norm)


class G2(NamedTuple):
    value: float
    simplified: float


def g2_analytic(a: AmplitudeSet, mode: str) -> G2:
    """Equal-time g2 of cavity ``mode``.

    ``value`` is 2 P2 / (P1 + 2 P2)^2 with the exact norm; ``simplified`` is
    2 P2 / P1^2 with the norm set to one, which is drive independent.
    """
    if mode not in ("L", "R"):
        raise ValueError("mode must be 'L' or 'R'")
    occ = occupations(a)
    raw = occupations(a, normalized=False)
    if mode == "L":
        p1, p2, r1, r2 = occ.P_L1, occ.P_L2, raw.P_L1, raw.P_L2
    else:
        p1, p2, r1, r2 = occ.P_R1, occ.P_R2, raw.P_R1, raw.P_R2
    value = 2 * p2 / (p1 + 2 * p2) ** 2 if (p1 + p2) > 0 else math.nan
    simplified = 2 * r2 / r1**2 if r1 > 0 else math.nan
    return G2(value, simplified)
