"""Reproduction checks shared by the test-suite and the ``validate`` command.

Each check returns a CriterionResult; none of them raises on a failed
comparison. Expensive sweeps are cached per process so checks that look at
the same curve do not recompute it.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .analytic import g2_analytic, steady_amplitudes
from .fock import TruncationSpec
from .io import shipped_configs
from .lindblad import build_liouvillian, evolve, observables, steady_state, trace_distance
from .model import ModelParams, WeakDrivingWarning
from .spectrum import sector_matrix, single_photon_eigs, two_photon_eigs
from .sweep import SweepConfig, compare_report, detect_extrema, run_sweep, select

# tolerances
SPLIT_TOL = 1e-12
DENSE_TOL = 1e-9
POSITION_TOL = 0.003
COUPLING_TOL = 0.01
ORACLE_TIME_KAPPA = 2000.0
ORACLE_DT = 1e4


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f} s)"


def _reference_params() -> ModelParams:
    return ModelParams()


@lru_cache(maxsize=None)
def equal_window_sweep(threads: int = 1):
    """Both solvers on delta in [-0.2, 0.2] with a 1e-3 grid at the reference parameters."""
    cfg = shipped_configs()["detuning_equal"].replace(grid=tuple(np.round(np.linspace(-0.2, 0.2, 401), 12)))
    t0 = time.perf_counter()
    a = run_sweep(cfg, methods=("analytic",), threads=threads)
    t1 = time.perf_counter()
    n = run_sweep(cfg, methods=("lindblad",), threads=threads)
    t2 = time.perf_counter()
    return a, n, t1 - t0, t2 - t1


@lru_cache(maxsize=None)
def opposite_window_sweep(threads: int = 1):
    cfg = shipped_configs()["detuning_opposite"].replace(grid=tuple(np.round(np.linspace(-0.06, 0.14, 201), 12)))
    a = run_sweep(cfg, methods=("analytic",), threads=threads)
    n = run_sweep(cfg, methods=("lindblad",), threads=threads)
    return a, n


def _g_scan(kappa: float, omega: float | None, lock: str = "+") -> SweepConfig:
    base = ModelParams(kappa_L=kappa, kappa_R=kappa, Omega=omega if omega else 0.2 * kappa)
    return SweepConfig(
        base=base, axis="g", grid=tuple(np.round(np.linspace(0.05, 0.9, 851), 12)),
        methods=("analytic",), lock_resonance=lock,
        drive_ratio=None if omega else 0.2,
    )


# 1 ---------------------------------------------------------------------------

def check_spectrum() -> CriterionResult:
    t0 = time.perf_counter()
    p = _reference_params()
    m1, p1 = single_photon_eigs(0, p)
    m2, z2, p2 = two_photon_eigs(0, p)
    w = p.omega_M
    splits = [p1.value - m1.value, p2.value - z2.value, z2.value - m2.value]
    split_err = max(abs(s - 0.1 * w) for s in splits)
    k_max = 4
    dense_err = 0.0
    for sector, levels in ((1, lambda k: single_photon_eigs(k, p)), (2, lambda k: two_photon_eigs(k, p))):
        dense = np.linalg.eigvalsh(sector_matrix(sector, p, k_max))
        mine = np.sort([lev.value for k in range(k_max + 1) for lev in levels(k)])
        dense_err = max(dense_err, float(np.max(np.abs(dense - mine))))
    dt = time.perf_counter() - t0
    ok = split_err < SPLIT_TOL and dense_err < DENSE_TOL and dt < 1.0
    return CriterionResult(
        1, "degenerate spectrum", ok,
        f"splitting error {split_err:.2e} (tol {SPLIT_TOL:g}), dense diagonalization "
        f"error {dense_err:.2e} (tol {DENSE_TOL:g})", dt,
    )


# 2 ---------------------------------------------------------------------------

def _nearest(ext, kind, target):
    cands = [e for e in ext if e.kind == kind]
    if not cands:
        return None
    return min(cands, key=lambda e: abs(e.refined - target))


def check_dip_position(threads: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    a, n, _, t_lind = equal_window_sweep(threads)
    p = _reference_params()
    target = p.g_L**2 / p.omega_M - p.J
    parts, ok = [], t_lind < 600
    for label, curve in (("analytic", a), ("lindblad", n)):
        dip = _nearest(detect_extrema(curve, "g2_L"), "dip", target)
        if dip is None:
            ok = False
            parts.append(f"{label}: no dip")
            continue
        good = abs(dip.refined - target) <= POSITION_TOL and dip.value < 1
        ok = ok and good
        parts.append(f"{label} dip at {dip.refined:+.5f} (g2 {dip.value:.4g})")
    parts.append(f"lindblad sweep {t_lind:.0f} s")
    return CriterionResult(2, "one-photon dip position", ok, "; ".join(parts), time.perf_counter() - t0)


# 3 ---------------------------------------------------------------------------

OPPOSITE_PEAKS = (-0.02403, 0.08, 0.10403)
OPPOSITE_DIPS = (-0.01, 0.09)


def check_opposite_positions(threads: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    a, n = opposite_window_sweep(threads)
    ok, parts, found = True, [], {}
    for label, curve in (("analytic", a), ("lindblad", n)):
        ext = detect_extrema(curve, "g2_L")
        misses = []
        for kind, targets in (("peak", OPPOSITE_PEAKS), ("dip", OPPOSITE_DIPS)):
            for target in targets:
                e = _nearest(ext, kind, target)
                if e is None or abs(e.refined - target) > POSITION_TOL:
                    where = "none" if e is None else f"{e.refined:+.5f}"
                    misses.append(f"{kind} {target:+.5f} (nearest {where})")
        found[label] = [(e.kind, e.refined, e.value) for e in ext]
        ok = ok and not misses
        parts.append(f"{label}: " + ("all matched" if not misses else "missed " + ", ".join(misses)))
    return CriterionResult(3, "opposite-coupling positions", ok, "; ".join(parts), time.perf_counter() - t0,
                           {"extrema": found})


# 4 ---------------------------------------------------------------------------

def check_agreement(threads: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    a, n, _, _ = equal_window_sweep(threads)
    rep = compare_report(a, n, "g2_L", tolerance=0.25, dip_tolerance=0.10)
    dips = ", ".join(f"{loc:+.3f}: {d:.3f}" for loc, d in rep.dips)
    detail = (
        f"max deviation {rep.max_deviation:.3f} at delta {rep.worst_location:+.3f} (tol 0.25), "
        f"dip deviations [{dips}] (tol 0.10)"
    )
    return CriterionResult(4, "analytic-numeric agreement", rep.passed, detail,
                           time.perf_counter() - t0, rep.summary())


# 5 ---------------------------------------------------------------------------

COHERENT_TRUNC = TruncationSpec(n_max_L=10, n_max_R=1, n_max_b=1)


def check_coherent_limit() -> CriterionResult:
    t0 = time.perf_counter()
    p = ModelParams(g_L=0.0, g_R=0.0, J=0.0)
    g2a = g2_analytic(steady_amplitudes(p), "L").simplified
    rho = steady_state(build_liouvillian(p, COHERENT_TRUNC)).rho
    ob = observables(rho, COHERENT_TRUNC)
    n_exact = abs(p.Omega / (p.delta_L - 0.5j * p.kappa_L)) ** 2
    ea, en, e_n = abs(g2a - 1), abs(ob.g2_L - 1), abs(ob.n_L - n_exact)
    ok = ea < 1e-6 and en < 1e-3 and e_n < 1e-6
    return CriterionResult(
        5, "coherent limit", ok,
        f"|g2_analytic - 1| = {ea:.1e} (tol 1e-6), |g2_lindblad - 1| = {en:.1e} (tol 1e-3), "
        f"|<n_L> - |alpha|^2| = {e_n:.1e} (tol 1e-6)", time.perf_counter() - t0,
    )


# 6 ---------------------------------------------------------------------------

def upper_resonant_couplings(k: int, p: ModelParams) -> list[float]:
    w, J = p.omega_M, p.J
    rads = [(k * w**2 - 4 * J * w) / 2, (k * w**2 - 2 * J * w) / 2, k * w**2 / 2]
    return [math.sqrt(r) for r in rads if r >= 0]


def _sideband_of(g: float, w: float) -> int:
    # the k-th envelope is centred on g = sqrt(k/2) omega_M
    return int(round(2 * (g / w) ** 2))


def check_resonant_couplings() -> CriterionResult:
    t0 = time.perf_counter()
    cfg = _g_scan(0.01, None)
    curve = run_sweep(cfg)
    lo, hi = cfg.grid[0], cfg.grid[-1]
    peaks = [e for e in detect_extrema(curve, "g2_L") if e.kind == "peak"]
    p = cfg.base
    ok, parts = True, []
    for k in (1, 2):
        for g in upper_resonant_couplings(k, p):
            if not lo <= g <= hi:
                parts.append(f"k={k} g={g:.4f} outside scan")
                continue
            near = min(peaks, key=lambda e: abs(e.refined - g), default=None)
            hit = near is not None and abs(near.refined - g) <= COUPLING_TOL
            ok = ok and hit
            where = "none" if near is None else f"{near.refined:.4f}"
            parts.append(f"k={k} g={g:.4f} -> {where}")
    stray = [e.refined for e in peaks if _sideband_of(e.refined, p.omega_M) >= 1 and not any(
        abs(e.refined - g) <= COUPLING_TOL for k in (1, 2) for g in upper_resonant_couplings(k, p))]
    if stray:
        ok = False
        parts.append("unexplained peaks " + ", ".join(f"{g:.4f}" for g in stray))
    return CriterionResult(6, "resonant-coupling peaks", ok, "; ".join(parts), time.perf_counter() - t0)


# 7 ---------------------------------------------------------------------------

def subpeaks_per_sideband(kappa: float, omega: float = 0.002) -> dict[int, int]:
    curve = run_sweep(_g_scan(kappa, omega))
    counts: dict[int, int] = {}
    for e in detect_extrema(curve, "g2_L"):
        k = _sideband_of(e.refined, 1.0)
        if e.kind == "peak" and k >= 1:
            counts[k] = counts.get(k, 0) + 1
    return counts


def check_coalescence() -> CriterionResult:
    t0 = time.perf_counter()
    narrow = subpeaks_per_sideband(0.01)
    wide = subpeaks_per_sideband(0.1)
    ok = bool(narrow) and all(c >= 2 for c in narrow.values()) and bool(wide) and all(
        c == 1 for c in wide.values())
    return CriterionResult(
        7, "subpeak coalescence", ok,
        f"subpeaks per sideband at kappa=0.01: {narrow}, at kappa=0.1: {wide}",
        time.perf_counter() - t0,
    )


# 8 ---------------------------------------------------------------------------

THERMAL_TRUNC = TruncationSpec(n_max_b=20)
THERMAL_NBAR = (0.0, 0.25, 0.5, 0.75, 1.0)


@lru_cache(maxsize=None)
def thermal_series(threads: int = 1):
    cfg = shipped_configs()["thermal_g0.2"].replace(grid=THERMAL_NBAR, truncation=THERMAL_TRUNC)
    return run_sweep(cfg, threads=threads)


def check_thermal(threads: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    rows = thermal_series(threads)
    gl = [r.g2_L for r in rows]
    gr = [r.g2_R for r in rows]
    ok = all(np.isfinite(gl + gr)) and all(np.diff(gl) >= 0) and all(np.diff(gr) >= 0)
    detail = "g2_L " + ", ".join(f"{v:.5g}" for v in gl) + "; g2_R " + ", ".join(f"{v:.5g}" for v in gr)
    return CriterionResult(8, "thermal trend", ok, detail, time.perf_counter() - t0)


# 9 ---------------------------------------------------------------------------

def physicality_cases() -> list[tuple[str, ModelParams, TruncationSpec]]:
    ref = _reference_params()
    return [
        ("one-photon dip", ref.with_detuning(-0.01), TruncationSpec()),
        ("two-photon peak", ref.with_detuning(0.03), TruncationSpec()),
        ("opposite-coupling dip", ModelParams(g_L=-0.2, g_R=0.2).with_detuning(0.09), TruncationSpec()),
        ("thermal n_bar=1", ref.replace(n_bar_b=1.0).with_detuning(-0.01), THERMAL_TRUNC),
        ("coherent limit", ModelParams(g_L=0.0, g_R=0.0, J=0.0), COHERENT_TRUNC),
    ]


def state_checks(rho: np.ndarray, residual: float) -> dict[str, float]:
    return {
        "trace_error": abs(np.trace(rho) - 1),
        "hermiticity": float(np.max(np.abs(rho - rho.conj().T))),
        "min_eigenvalue": float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))),
        "residual": residual,
    }


def _state_ok(c: dict[str, float]) -> bool:
    return (c["trace_error"] < 1e-10 and c["hermiticity"] < 1e-12 and c["min_eigenvalue"] > -1e-8
            and c["residual"] < 1e-8)


def check_physicality(threads: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    ok, parts, data = True, [], {}
    for label, p, trunc in physicality_cases():
        liouv = build_liouvillian(p, trunc)
        ss = steady_state(liouv)
        checks = state_checks(ss.rho, ss.residual)
        rho0 = np.zeros_like(ss.rho)
        rho0[0, 0] = 1.0
        t_final = ORACLE_TIME_KAPPA / p.kappa_L
        oracle = evolve(liouv, rho0, t_final, ORACLE_DT, method="sdirk4")
        checks["oracle_distance"] = trace_distance(oracle, ss.rho)
        good = _state_ok(checks) and checks["oracle_distance"] < 1e-6
        ok = ok and good
        data[label] = checks
        parts.append(f"{label}: {'ok' if good else 'BAD'} (oracle {checks['oracle_distance']:.1e}, "
                     f"min eig {checks['min_eigenvalue']:.1e})")
    # every steady state produced by the sweeps above must also be clean
    rows = list(select(equal_window_sweep(threads)[1])) + list(select(opposite_window_sweep(threads)[1]))
    rows += list(thermal_series(threads))
    bad = [r for r in rows if not (r.status.startswith("ok") and r.residual < 1e-8)]
    ok = ok and not bad
    parts.append(f"{len(rows)} sweep states, {len(bad)} with residual >= 1e-8 or failed")
    return CriterionResult(9, "solver physicality", ok, "; ".join(parts), time.perf_counter() - t0, data)


# 10 --------------------------------------------------------------------------

DRIVE_DETUNINGS = (-0.01, 0.0, 0.03, 0.09, 0.15)


def check_drive_invariance() -> CriterionResult:
    t0 = time.perf_counter()
    worst_s = worst_u = 0.0
    for d in DRIVE_DETUNINGS:
        p = _reference_params().with_detuning(d)
        ref = g2_analytic(steady_amplitudes(p), "L")
        for c in (0.5, 2.0):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", WeakDrivingWarning)
                g = g2_analytic(steady_amplitudes(p.replace(Omega=c * p.Omega)), "L")
            worst_s = max(worst_s, abs(g.simplified - ref.simplified) / ref.simplified)
            worst_u = max(worst_u, abs(g.value - ref.value) / ref.value)
    ok = worst_s <= 1e-12 and worst_u <= 1e-6
    return CriterionResult(
        10, "drive invariance", ok,
        f"simplified form max relative change {worst_s:.1e} (tol 1e-12), "
        f"unsimplified {worst_u:.1e} (tol 1e-6)", time.perf_counter() - t0,
    )


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: check_spectrum,
    2: check_dip_position,
    3: check_opposite_positions,
    4: check_agreement,
    5: check_coherent_limit,
    6: check_resonant_couplings,
    7: check_coalescence,
    8: check_thermal,
    9: check_physicality,
    10: check_drive_invariance,
}
THREADED = {2, 3, 4, 8, 9}


def run_criterion(number: int, threads: int = 1) -> CriterionResult:
    fn = CRITERIA[number]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WeakDrivingWarning)
        return fn(threads) if number in THREADED else fn()


def run_all(numbers=None, threads: int = 1, report=print) -> list[CriterionResult]:
    out = []
    for k in numbers or sorted(CRITERIA):
        res = run_criterion(k, threads)
        if report is not None:
            report(res.line())
        out.append(res)
    return out
