"""Few-photon eigensystem of the undriven Hamiltonian in the displaced basis.

Within a fixed photon number N the hopping only connects displaced states of
the same phonon index when the two couplings are equal. For unequal couplings
the same block structure is used with the zero-order Franck-Condon
approximation, and every level carries ``approximate=True``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams

SQRT2 = math.sqrt(2.0)
ARCCOS_CLAMP = 1e-12


class NumericalDegeneracyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class EigenLevel:
    sector: int
    branch: str
    k: int
    value: float
    coeffs: tuple[float, ...]
    basis: tuple[tuple[int, int], ...]
    approximate: bool = False

    @property
    def label(self) -> str:
        if self.sector == 0:
            return f"eps_0,{self.k}"
        return f"eps_{self.sector}{self.branch},{self.k}"


def bare_eigenvalue(m: int, n: int, k: int, p: ModelParams) -> float:
    """Polaron-frame energy E_{m,n,k}."""
    if min(m, n, k) < 0:
        raise ValueError("photon and phonon numbers must be non-negative")
    return m * p.delta_L + n * p.delta_R + k * p.omega_M - (p.g_L * m + p.g_R * n) ** 2 / p.omega_M


def conditional_displacement(m: int, n: int, p: ModelParams) -> float:
    return (p.g_L * m + p.g_R * n) / p.omega_M


def _approximate(p: ModelParams) -> bool:
    return p.g_L != p.g_R


def zero_photon_level(k: int, p: ModelParams) -> EigenLevel:
    return EigenLevel(0, "0", k, bare_eigenvalue(0, 0, k, p), (1.0,), ((0, 0),), False)


def single_photon_eigs(k: int, p: ModelParams) -> tuple[EigenLevel, EigenLevel]:
    """Returns the (-, +) pair of one-photon levels for sideband k."""
    e10 = bare_eigenvalue(1, 0, k, p)
    e01 = bare_eigenvalue(0, 1, k, p)
    root = math.sqrt((e10 - e01) ** 2 + 4 * p.J**2)
    basis = ((1, 0), (0, 1))
    approx = _approximate(p)
    levels = []
    for branch, sign in (("-", -1.0), ("+", 1.0)):
        eps = 0.5 * (e10 + e01 + sign * root)
        if p.J == 0:
            # decoupled: the lower bare state takes the '-' label
            lower_is_10 = e10 <= e01
            on_10 = (sign < 0) == lower_is_10
            coeffs = (1.0, 0.0) if on_10 else (0.0, 1.0)
            eps = e10 if on_10 else e01
        else:
            norm = math.sqrt(p.J**2 + (eps - e10) ** 2)
            coeffs = (p.J / norm, (eps - e10) / norm)
        levels.append(EigenLevel(1, branch, k, eps, coeffs, basis, approx))
    return levels[0], levels[1]


def _cubic_roots(e20: float, e11: float, e02: float, J: float) -> tuple[float, float, float]:
    p_ = -(e02 + e11 + e20)
    q_ = e11 * e02 + e11 * e20 + e20 * e02 - 4 * J**2
    r_ = 2 * J**2 * (e02 + e20) - e11 * e02 * e20
    a = q_ - p_**2 / 3
    b = r_ + 2 * p_**3 / 27 - p_ * q_ / 3
    scale = max(abs(e20), abs(e11), abs(e02), abs(J), 1e-300)
    if -a <= (1e-14 * scale) ** 2:
        # triple root
        root = -p_ / 3
        return root, root, root
    arg = -3 * b * math.sqrt(-3 * a) / (2 * a**2)
    if abs(arg) > 1:
        if abs(arg) - 1 > ARCCOS_CLAMP:
            raise NumericalDegeneracyError(
                f"arccos argument {arg!r} outside [-1, 1] beyond tolerance"
            )
        arg = math.copysign(1.0, arg)
    phi = math.acos(arg)
    s = math.sqrt(-3 * a) / 3
    c, sn = math.cos(phi / 3), math.sin(phi / 3)
    minus = -p_ / 3 - s * (c + math.sqrt(3) * sn)
    zero = -p_ / 3 - s * (c - math.sqrt(3) * sn)
    plus = -p_ / 3 + 2 * s * c
    return minus, zero, plus


def _two_photon_vector(e20: float, e11: float, e02: float, J: float, eps: float) -> np.ndarray:
    rows = np.array([
        [e20 - eps, SQRT2 * J, 0.0],
        [SQRT2 * J, e11 - eps, SQRT2 * J],
        [0.0, SQRT2 * J, e02 - eps],
    ])
    # rows 1 x 3 gives the textbook closed form; fall back to the other pairs
    # when that product vanishes (e.g. the antisymmetric level at E20 = E02)
    candidates = [np.cross(rows[0], rows[2]), np.cross(rows[0], rows[1]), np.cross(rows[1], rows[2])]
    vec = max(candidates, key=lambda v: float(np.dot(v, v)))
    norm = math.sqrt(float(np.dot(vec, vec)))
    if norm == 0.0:
        raise NumericalDegeneracyError("eigenvector undetermined (degenerate block)")
    vec = vec / norm
    pivot = vec[np.argmax(np.abs(vec) > 1e-12)]
    return vec if pivot > 0 else -vec


def two_photon_eigs(k: int, p: ModelParams) -> tuple[EigenLevel, EigenLevel, EigenLevel]:
    """Returns the (-, 0, +) two-photon levels for sideband k."""
    e20 = bare_eigenvalue(2, 0, k, p)
    e11 = bare_eigenvalue(1, 1, k, p)
    e02 = bare_eigenvalue(0, 2, k, p)
    basis = ((2, 0), (1, 1), (0, 2))
    approx = _approximate(p)
    if p.J == 0:
        order = sorted(zip((e20, e11, e02), range(3)))
        out = []
        for branch, (val, idx) in zip(("-", "0", "+"), order):
            coeffs = [0.0, 0.0, 0.0]
            coeffs[idx] = 1.0
            out.append(EigenLevel(2, branch, k, val, tuple(coeffs), basis, approx))
        return tuple(out)
    roots = _cubic_roots(e20, e11, e02, p.J)
    out = []
    for branch, eps in zip(("-", "0", "+"), roots):
        vec = _two_photon_vector(e20, e11, e02, p.J, eps)
        out.append(EigenLevel(2, branch, k, eps, tuple(float(c) for c in vec), basis, approx))
    return tuple(out)


def sector_matrix(sector: int, p: ModelParams, k_max: int) -> np.ndarray:
    """Dense block of H_sys in the displaced basis, sidebands 0..k_max.

    Basis ordering follows the appendix matrices: for each k the states
    (1,0),(0,1) in the one-photon sector or (2,0),(1,1),(0,2) in the
    two-photon sector.
    """
    if sector == 0:
        return np.diag([bare_eigenvalue(0, 0, k, p) for k in range(k_max + 1)])
    if sector == 1:
        block = lambda k: np.array([
            [bare_eigenvalue(1, 0, k, p), p.J],
            [p.J, bare_eigenvalue(0, 1, k, p)],
        ])
        size = 2
    elif sector == 2:
        c = SQRT2 * p.J
        block = lambda k: np.array([
            [bare_eigenvalue(2, 0, k, p), c, 0.0],
            [c, bare_eigenvalue(1, 1, k, p), c],
            [0.0, c, bare_eigenvalue(0, 2, k, p)],
        ])
        size = 3
    else:
        raise ValueError("sector must be 0, 1 or 2")
    out = np.zeros((size * (k_max + 1),) * 2)
    for k in range(k_max + 1):
        out[size * k:size * (k + 1), size * k:size * (k + 1)] = block(k)
    return out


@dataclass(frozen=True)
class Resonance:
    kind: str  # "dip" (one-photon) or "peak" (two-photon)
    level: str
    delta: float


def resonance_detunings(k: int, p: ModelParams) -> list[Resonance]:
    """Drive detunings that put a one- or two-photon level of sideband k at zero.

    Both cavity detunings move together with the drive frequency, so one-photon
    levels shift one-for-one and two-photon levels twice as fast; the returned
    ``delta`` is the value of ``delta_L`` at resonance.
    """
    out = []
    for lev in single_photon_eigs(k, p):
        out.append(Resonance("dip", lev.label, p.delta_L - lev.value))
    for lev in two_photon_eigs(k, p):
        out.append(Resonance("peak", lev.label, p.delta_L - lev.value / 2))
    return out


def resonant_couplings(k: int, branch: str, p: ModelParams) -> list[float]:
    """Couplings where the one-photon (branch) and a two-photon resonance coincide.

    Valid for equal couplings and detunings; negative radicands are dropped.
    """
    if branch not in ("+", "-"):
        raise ValueError("branch must be '+' or '-'")
    w, J = p.omega_M, p.J
    if branch == "+":
        radicands = [(k * w**2 - 4 * J * w) / 2, (k * w**2 - 2 * J * w) / 2, k * w**2 / 2]
    else:
        radicands = [k * w**2 / 2, (k * w**2 + 2 * J * w) / 2, (k * w**2 + 4 * J * w) / 2]
    return [math.sqrt(r) for r in radicands if r >= 0]


def level_table(p: ModelParams, k_max: int = 2) -> list[EigenLevel]:
    levels: list[EigenLevel] = []
    for k in range(k_max + 1):
        levels.append(zero_photon_level(k, p))
        levels.extend(single_photon_eigs(k, p))
        levels.extend(two_photon_eigs(k, p))
    return levels
