"""Master-equation steady state and observables on the truncated Fock space.

Vectorization is row-major, vec(rho)[i * dim + j] = rho[i, j], so that
A rho B maps to kron(A, B.T).

The superoperator of the default truncation is 43264 x 43264 and sparse LU
fills in to near-dense, so large systems are solved matrix-free: GMRES on
the Liouvillian, right-preconditioned by the exact inverse of its
non-Hermitian part rho -> -i (K rho - rho K^dag), which is diagonal in the
eigenbasis of K. Small systems use sparse LU with the trace row.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import TruncationSpec, mode_operators
from .model import ModelParams, build_h_I

log = logging.getLogger(__name__)

DIRECT_MAX_SUPERDIM = 4096
SDIRK_RESTART = 80
SDIRK_MAXITER = 10
UNDEFINED_N = 1e-14


class SolverError(RuntimeError):
    pass


class TraceDriftError(SolverError):
    pass


def _dag(op):
    return op.conj().T.tocsr()


@dataclass
class Liouvillian:
    """Generator of the master equation, kept in factored form.

    ``jumps`` carry the square roots of their rates; ``matrix`` assembles the
    sparse superoperator on first use.
    """

    hamiltonian: sp.csr_matrix
    jumps: list[sp.csr_matrix]
    trunc: TruncationSpec | None = None
    params: ModelParams | None = None

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @cached_property
    def nonhermitian(self) -> np.ndarray:
        """K = H - (i/2) sum_c c^dag c as a dense array."""
        k = self.hamiltonian.astype(complex)
        for c in self.jumps:
            k = k - 0.5j * (_dag(c) @ c)
        return np.asarray(sp.csr_matrix(k).toarray())

    @cached_property
    def _jump_pairs(self):
        return [(c, _dag(c)) for c in self.jumps]

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        d = self.dim
        eye = sp.identity(d, format="csr", dtype=complex)
        h = self.hamiltonian
        out = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
        for c in self.jumps:
            cdc = _dag(c) @ c
            out = out + sp.kron(c, c.conj()) - 0.5 * sp.kron(cdc, eye) - 0.5 * sp.kron(eye, cdc.T)
        out = sp.csr_matrix(out)
        out.eliminate_zeros()
        return out

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """L[rho] without forming the superoperator."""
        k = self.nonhermitian
        out = -1j * (k @ rho - rho @ k.conj().T)
        for c, cd in self._jump_pairs:
            out += c @ (cd.T @ rho.T).T
        return out

    @cached_property
    def _eig(self):
        lam, vec = np.linalg.eig(self.nonhermitian)
        inv = np.linalg.inv(vec)
        diag = -1j * (lam[:, None] - lam.conj()[None, :])
        return vec, inv, diag

    def _to_eigbasis(self, rho):
        vec, inv, _ = self._eig
        return inv @ rho @ inv.conj().T

    def _from_eigbasis(self, x):
        vec, _, _ = self._eig
        return vec @ x @ vec.conj().T


def build_liouvillian(p: ModelParams, t: TruncationSpec) -> Liouvillian:
    """Drift from H_I, cavity losses, and thermal mechanical damping."""
    a_L, a_R, b = mode_operators(t)
    jumps = []
    for rate, op in (
        (p.kappa_L, a_L),
        (p.kappa_R, a_R),
        (p.kappa_b * (p.n_bar_b + 1), b),
        (p.kappa_b * p.n_bar_b, _dag(b)),
    ):
        if rate > 0:
            jumps.append(sp.csr_matrix(math.sqrt(rate) * op))
    return Liouvillian(build_h_I(p, t), jumps, t, p)


@dataclass
class SteadyState:
    rho: np.ndarray
    residual: float
    method: str
    iterations: int = 0
    notes: list[str] = field(default_factory=list)


def _finish(liouv: Liouvillian, rho: np.ndarray) -> tuple[np.ndarray, float]:
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return rho, float(np.max(np.abs(liouv.apply(rho))))


def _trace_row(d: int) -> sp.csr_matrix:
    return sp.csr_matrix(
        (np.ones(d), (np.zeros(d, dtype=int), np.arange(d) * (d + 1))), shape=(1, d * d)
    )


def _solve_direct(liouv: Liouvillian):
    d = liouv.dim
    mat = sp.vstack([_trace_row(d), liouv.matrix[1:]]).tocsc()
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        x = spla.splu(mat).solve(rhs)
    except RuntimeError as exc:  # exactly singular factor
        raise SolverError(f"sparse factorization failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("sparse factorization produced non-finite values")
    return x.reshape(d, d), 0


def _rate_scale(liouv: Liouvillian) -> float:
    rates = [float(sp.linalg.norm(c) ** 2) / liouv.dim for c in liouv.jumps]
    return max(rates + [1e-12])


def _solve_krylov(liouv: Liouvillian, tol: float, guess: np.ndarray | None):
    d = liouv.dim
    _, _, diag = liouv._eig
    scale = _rate_scale(liouv)
    small = np.abs(diag) < 1e-3 * scale
    diag_reg = np.where(small, diag - 1e-3 * scale, diag)
    # rank-one trace term makes the system non-singular: T(x) = L(x) + r0 tr(x)
    r0 = np.eye(d, dtype=complex) * (scale / d)

    def precond(y):
        return liouv._from_eigbasis(liouv._to_eigbasis(y) / diag_reg)

    count = [0]

    def matvec(v):
        count[0] += 1
        rho = precond(v.reshape(d, d))
        return (liouv.apply(rho) + r0 * np.trace(rho)).ravel()

    op = spla.LinearOperator((d * d, d * d), matvec=matvec, dtype=complex)
    y0 = None
    if guess is not None:
        y0 = liouv._from_eigbasis(liouv._to_eigbasis(guess) * diag_reg).ravel()
    y, info = spla.gmres(op, r0.ravel(), x0=y0, rtol=tol, atol=0.0, restart=120, maxiter=10)
    if info < 0:
        raise SolverError(f"GMRES breakdown (info={info})")
    return precond(y.reshape(d, d)), count[0]


def steady_state(liouv: Liouvillian, method: str = "auto", tol: float = 1e-12,
                 guess: np.ndarray | None = None, max_residual: float = 1e-8) -> SteadyState:
    """Unit-trace null vector of the Liouvillian.

    ``method`` is "direct", "krylov" or "auto" (direct for small systems).
    If the linear solve fails or leaves a residual above ``max_residual``, the
    state is relaxed by time evolution and the result is labelled as such.
    """
    d = liouv.dim
    if not liouv.jumps:
        raise SolverError("no dissipation: the steady state is not unique")
    if method == "auto":
        method = "direct" if d * d <= DIRECT_MAX_SUPERDIM else "krylov"
    notes = []
    try:
        if method == "direct":
            rho, its = _solve_direct(liouv)
        elif method == "krylov":
            rho, its = _solve_krylov(liouv, tol, guess)
        else:
            raise ValueError(f"unknown method {method!r}")
        rho, res = _finish(liouv, rho)
        if res <= max_residual:
            return SteadyState(rho, res, method, its)
        notes.append(f"{method} residual {res:.3g} above {max_residual:g}")
    except (SolverError, np.linalg.LinAlgError) as exc:
        notes.append(f"{method} failed: {exc}")
    log.warning("steady state: %s; falling back to time evolution", notes[-1])
    rho0 = np.zeros((d, d), dtype=complex)
    rho0[0, 0] = 1.0
    t_relax = _relaxation_time(liouv)
    rho = evolve(liouv, rho0, t_relax, t_relax / 40, method="sdirk4")
    rho, res = _finish(liouv, rho)
    if not np.isfinite(res):
        raise SolverError("steady state could not be computed: " + "; ".join(notes))
    notes.append("relaxed by sdirk4 time evolution")
    return SteadyState(rho, res, "evolve", 0, notes)


def _relaxation_time(liouv: Liouvillian) -> float:
    rates = [float(np.max(np.abs((_dag(c) @ c).diagonal()))) for c in liouv.jumps]
    positive = [r for r in rates if r > 0]
    if not positive:
        raise SolverError("no dissipation: steady state is not unique")
    return 50.0 / min(positive)


# fourth-order, L-stable, stiffly accurate SDIRK (gamma = 1/4)
_SDIRK_A = (
    (),
    (1 / 2,),
    (17 / 50, -1 / 25),
    (371 / 1360, -137 / 2720, 15 / 544),
    (25 / 24, -49 / 48, 125 / 16, -85 / 12),
)
_SDIRK_GAMMA = 0.25


def _rk4(liouv: Liouvillian, rho: np.ndarray, dt: float, steps: int) -> np.ndarray:
    f = liouv.apply
    for _ in range(steps):
        k1 = f(rho)
        k2 = f(rho + 0.5 * dt * k1)
        k3 = f(rho + 0.5 * dt * k2)
        k4 = f(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


def _sdirk4(liouv: Liouvillian, rho: np.ndarray, dt: float, steps: int, tol: float) -> np.ndarray:
    d = liouv.dim
    _, _, diag = liouv._eig
    hg = dt * _SDIRK_GAMMA
    pre = 1.0 - hg * diag

    def precond(y):
        return liouv._from_eigbasis(liouv._to_eigbasis(y) / pre)

    def matvec(v):
        x = precond(v.reshape(d, d))
        return (x - hg * liouv.apply(x)).ravel()

    op = spla.LinearOperator((d * d, d * d), matvec=matvec, dtype=complex)
    for _ in range(steps):
        ks = []
        stage = rho
        for row in _SDIRK_A:
            rhs = rho.copy()
            for a_ij, k_j in zip(row, ks):
                rhs = rhs + dt * a_ij * k_j
            y0 = liouv._from_eigbasis(liouv._to_eigbasis(stage) * pre).ravel()
            y, info = spla.gmres(op, rhs.ravel(), x0=y0, rtol=tol,
                                 atol=0.0, restart=SDIRK_RESTART, maxiter=SDIRK_MAXITER)
            if info != 0:
                raise SolverError(f"implicit stage did not converge (info={info})")
            stage = precond(y.reshape(d, d))
            ks.append(liouv.apply(stage))
        rho = stage
    return rho


def evolve(liouv: Liouvillian, rho0: np.ndarray, t_final: float, dt: float,
           method: str = "rk4", drift_tol: float = 1e-8, tol: float = 1e-11) -> np.ndarray:
    """Fixed-step fourth-order integration of d rho / dt = L[rho].

    ``rk4`` is the classical explicit scheme (dt must resolve the fastest
    frequency, roughly dt < 2.8 / (n_max_b * omega_M)). ``sdirk4`` is
    L-stable and accepts steps far beyond that, which makes long relaxation
    runs affordable. Raises TraceDriftError if the trace moves by more than
    ``drift_tol``.
    """
    if t_final < 0 or dt <= 0:
        raise ValueError("need t_final >= 0 and dt > 0")
    rho = np.array(rho0, dtype=complex)
    if t_final == 0:
        return rho
    steps = max(1, int(math.ceil(t_final / dt - 1e-9)))
    dt = t_final / steps
    tr0 = np.trace(rho)
    if method == "rk4":
        rho = _rk4(liouv, rho, dt, steps)
    elif method == "sdirk4":
        rho = _sdirk4(liouv, rho, dt, steps, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    drift = abs(np.trace(rho) - tr0)
    if drift > drift_tol:
        raise TraceDriftError(f"trace drifted by {drift:.3g}")
    return rho


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


@dataclass(frozen=True)
class Observables:
    P_L: tuple[float, float, float]
    P_R: tuple[float, float, float]
    g2_L: float
    g2_R: float
    n_L: float
    n_R: float
    n_b: float


def _g2(dist: np.ndarray) -> tuple[float, float]:
    m = np.arange(dist.size)
    n = float(np.dot(m, dist))
    if n < UNDEFINED_N:
        return math.nan, n
    return float(np.dot(m * (m - 1), dist)) / n**2, n


def observables(rho: np.ndarray, t: TruncationSpec) -> Observables:
    """Occupations P[m] = <m|rho_mode|m> for m = 0, 1, 2 and equal-time g2.

    g2 is NaN when the mean photon number is below 1e-14.
    """
    pops = np.real(np.diag(rho)).reshape(t.dims)
    dist_L = pops.sum(axis=(1, 2))
    dist_R = pops.sum(axis=(0, 2))
    dist_b = pops.sum(axis=(0, 1))
    g2_L, n_L = _g2(dist_L)
    g2_R, n_R = _g2(dist_R)
    pad = lambda x: tuple(float(v) for v in np.pad(x, (0, max(0, 3 - x.size)))[:3])
    return Observables(
        P_L=pad(dist_L), P_R=pad(dist_R), g2_L=g2_L, g2_R=g2_R,
        n_L=n_L, n_R=n_R, n_b=float(np.dot(np.arange(dist_b.size), dist_b)),
    )


def solve(p: ModelParams, t: TruncationSpec, **kwargs) -> tuple[SteadyState, Observables]:
    ss = steady_state(build_liouvillian(p, t), **kwargs)
    return ss, observables(ss.rho, t)
