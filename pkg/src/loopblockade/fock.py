"""Truncated Fock-space operators for the three-mode (L, R, b) system.

Operators are ``scipy.sparse.csr_matrix`` objects. The tensor order is fixed
to (L, R, b) with row-major flattening, so the bare state |m, n, k> sits at
index ``(m * (n_max_R + 1) + n) * (n_max_b + 1) + k``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

DROP_TOL = 1e-14

MODES = ("L", "R", "b")


@dataclass(frozen=True)
class TruncationSpec:
    """Fock cutoffs for the numerical and analytic solvers.

    ``k_max_analytic`` is the phonon-index cutoff of the displaced-basis
    amplitude sums and is independent of ``n_max_b``.
    """

    n_max_L: int = 3
    n_max_R: int = 3
    n_max_b: int = 12
    k_max_analytic: int = 15
    max_dim: int = 2000

    def __post_init__(self):
        for name in ("n_max_L", "n_max_R", "n_max_b", "k_max_analytic"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
        if self.dim > self.max_dim:
            raise ValueError(
                f"Hilbert dimension {self.dim} exceeds the memory budget "
                f"max_dim={self.max_dim}"
            )

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.n_max_L + 1, self.n_max_R + 1, self.n_max_b + 1)

    @property
    def dim(self) -> int:
        dL, dR, db = self.dims
        return dL * dR * db

    def index(self, m: int, n: int, k: int) -> int:
        """Flat index of the bare state |m, n>_LR |k>_b."""
        _, dR, db = self.dims
        return (m * dR + n) * db + k


def _prune(op) -> sp.csr_matrix:
    op = sp.csr_matrix(op, dtype=complex)
    op.sum_duplicates()
    op.data[np.abs(op.data) < DROP_TOL] = 0
    op.eliminate_zeros()
    return op


def annihilation(n_max: int) -> sp.csr_matrix:
    """Ladder operator on levels 0..n_max with <n-1|a|n> = sqrt(n)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return sp.diags(np.sqrt(np.arange(1, n_max + 1)), 1, format="csr", dtype=complex)


def creation(n_max: int) -> sp.csr_matrix:
    return annihilation(n_max).conj().T.tocsr()


def number(n_max: int) -> sp.csr_matrix:
    return sp.diags(np.arange(n_max + 1, dtype=float), 0, format="csr", dtype=complex)


def kron_embed(op, slot: str, trunc: TruncationSpec) -> sp.csr_matrix:
    """Lift a single-mode operator to the full (L, R, b) space."""
    if slot not in MODES:
        raise ValueError(f"slot must be one of {MODES}, got {slot!r}")
    dims = trunc.dims
    pos = MODES.index(slot)
    if op.shape != (dims[pos], dims[pos]):
        raise ValueError(
            f"operator shape {op.shape} does not match mode {slot} dimension {dims[pos]}"
        )
    factors = [sp.identity(d, format="csr", dtype=complex) for d in dims]
    factors[pos] = sp.csr_matrix(op, dtype=complex)
    out = sp.kron(sp.kron(factors[0], factors[1], format="csr"), factors[2], format="csr")
    return _prune(out)


@lru_cache(maxsize=16)
def mode_operators(trunc: TruncationSpec) -> tuple[sp.csr_matrix, sp.csr_matrix, sp.csr_matrix]:
    """Embedded annihilation operators (a_L, a_R, b)."""
    return (
        kron_embed(annihilation(trunc.n_max_L), "L", trunc),
        kron_embed(annihilation(trunc.n_max_R), "R", trunc),
        kron_embed(annihilation(trunc.n_max_b), "b", trunc),
    )


def laguerre_table(n_max: int, x: float) -> np.ndarray:
    """Associated Laguerre values ``L_n^alpha(x)`` as a table ``T[n, alpha]``.

    Uses the upward three-term recurrence in n for every alpha at once.
    """
    alpha = np.arange(n_max + 1, dtype=float)
    table = np.zeros((n_max + 1, n_max + 1))
    table[0] = 1.0
    if n_max >= 1:
        table[1] = 1.0 + alpha - x
    for n in range(1, n_max):
        table[n + 1] = ((2 * n + 1 + alpha - x) * table[n] - (n + alpha) * table[n - 1]) / (n + 1)
    return table


def _displacement_entry(k: int, l: int, beta: complex, lag: np.ndarray) -> complex:
    x = abs(beta) ** 2
    if k <= l:
        lo, hi, factor = k, l, -np.conj(beta)
    else:
        lo, hi, factor = l, k, beta
    power = hi - lo
    if power == 0:
        return complex(math.exp(-x / 2) * lag[lo, 0])
    log_mag = 0.5 * (math.lgamma(lo + 1) - math.lgamma(hi + 1)) - x / 2 + power * math.log(abs(beta))
    # from the angle: dividing by a subnormal |beta| overflows
    phase = cmath.exp(1j * power * cmath.phase(factor))
    return complex(math.exp(log_mag) * phase * lag[lo, power])


def displacement_matrix(beta: complex, n_max: int) -> np.ndarray:
    """Exact matrix elements <k|D(beta)|l> for k, l <= n_max.

    The elements are those of the untruncated operator, so the returned block
    is unitary only on levels well below ``n_max``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    beta = complex(beta)
    if beta == 0:
        return np.eye(n_max + 1, dtype=complex)
    lag = laguerre_table(n_max, abs(beta) ** 2)
    out = np.empty((n_max + 1, n_max + 1), dtype=complex)
    for k in range(n_max + 1):
        for l in range(n_max + 1):
            out[k, l] = _displacement_entry(k, l, beta, lag)
    out[np.abs(out) < DROP_TOL] = 0
    return out


def displacement_element(k: int, l: int, beta: complex) -> complex:
    beta = complex(beta)
    if beta == 0:
        return complex(k == l)
    lag = laguerre_table(max(k, l), abs(beta) ** 2)
    return _displacement_entry(k, l, beta, lag)


def franck_condon(k: int, k2: int, eta1: float, eta2: float) -> complex:
    """Overlap of the k-th phonon state displaced by ``eta1`` with the
    ``k2``-th displaced by ``eta2``, i.e. <k|D(eta2 - eta1)|k2>."""
    if k < 0 or k2 < 0:
        raise ValueError("phonon indices must be non-negative")
    return displacement_element(k, k2, eta2 - eta1)


def franck_condon_matrix(k_max: int, eta1: float, eta2: float) -> np.ndarray:
    """All overlaps ``F[k, k2] = franck_condon(k, k2, eta1, eta2)`` up to ``k_max``."""
    return displacement_matrix(eta2 - eta1, k_max)
