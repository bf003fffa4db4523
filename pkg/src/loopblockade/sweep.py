"""Parameter sweeps, extremum detection and analytic/numeric comparison."""

from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .analytic import g2_analytic, occupations, steady_amplitudes
from .fock import TruncationSpec
from .lindblad import SolverError, solve
from .model import ModelParams, WeakDrivingWarning

log = logging.getLogger(__name__)

AXES = ("delta", "g", "kappa", "n_bar_b")
METHODS = ("analytic", "lindblad")
BOUNDARY_STEPS = 3


@dataclass(frozen=True)
class SweepConfig:
    """One swept axis over a grid, evaluated with one or both solvers.

    ``lock_resonance`` ties the detuning to the coupling: "+" puts the drive on
    the upper one-photon level (delta = g^2/omega_M - J), "-" on the lower one
    (delta = g^2/omega_M + J). ``drive_ratio`` sets Omega = drive_ratio *
    kappa_L at every point. ``refine`` adds (start, stop, points) windows that
    are merged into the main grid.
    """

    base: ModelParams = field(default_factory=ModelParams)
    axis: str = "delta"
    grid: tuple[float, ...] = (0.0,)
    methods: tuple[str, ...] = ("analytic",)
    truncation: TruncationSpec = field(default_factory=TruncationSpec)
    output: str | None = None
    lock_resonance: str | None = None
    drive_ratio: float | None = None
    refine: tuple[tuple[float, float, int], ...] = ()
    threads: int = 1
    name: str = "sweep"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ValueError(f"methods must be a non-empty subset of {METHODS}")
        if self.lock_resonance not in (None, "+", "-"):
            raise ValueError("lock_resonance must be '+', '-' or unset")
        if len(self.grid) < 1:
            raise ValueError("grid is empty")
        diffs = np.diff(self.grid)
        if len(self.grid) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("grid must be strictly monotone")
        for lo, hi, n in self.refine:
            if n < 2 or hi <= lo:
                raise ValueError(f"bad refinement window {(lo, hi, n)}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def replace(self, **changes) -> SweepConfig:
        return dataclasses.replace(self, **changes)

    def values(self) -> np.ndarray:
        """Main grid merged with the refinement windows, sorted."""
        vals = list(self.grid)
        for lo, hi, n in self.refine:
            vals.extend(np.linspace(lo, hi, int(n)))
        arr = np.unique(np.round(np.asarray(vals, dtype=float), 12))
        return arr if len(self.grid) < 2 or self.grid[1] > self.grid[0] else arr[::-1]

    def params_at(self, value: float) -> ModelParams:
        p = self.base
        if self.axis == "delta":
            p = p.replace(delta_L=value, delta_R=value)
        elif self.axis == "g":
            # keep the relative sign of the two couplings
            sign = -1.0 if p.g_L * p.g_R < 0 else 1.0
            p = p.replace(g_L=value, g_R=sign * value)
        elif self.axis == "kappa":
            p = p.replace(kappa_L=value, kappa_R=value)
        else:
            p = p.replace(n_bar_b=value)
        if self.lock_resonance is not None:
            shift = -p.J if self.lock_resonance == "+" else p.J
            d = p.g_L**2 / p.omega_M + shift
            p = p.replace(delta_L=d, delta_R=d)
        if self.drive_ratio is not None:
            p = p.replace(Omega=self.drive_ratio * p.kappa_L)
        return p


class CurvePoint(NamedTuple):
    axis_value: float
    P_L1: float
    P_R1: float
    P_L2: float
    P_R2: float
    g2_L: float
    g2_R: float
    method: str
    residual: float
    status: str


CSV_FIELDS = CurvePoint._fields


def _failed(value: float, method: str, exc: Exception) -> CurvePoint:
    nan = math.nan
    msg = f"error: {type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
    return CurvePoint(value, nan, nan, nan, nan, nan, nan, method, nan, msg)


def evaluate_point(p: ModelParams, method: str, trunc: TruncationSpec,
                   value: float = math.nan) -> CurvePoint:
    """Solve one parameter set; failures come back as a row with status 'error: ...'.

    For the analytic method ``residual`` holds the phonon-tail weight of the
    amplitudes instead of a solver residual.
    """
    try:
        if method == "analytic":
            amps = steady_amplitudes(p, trunc.k_max_analytic)
            occ = occupations(amps)
            return CurvePoint(
                value, occ.P_L1, occ.P_R1, occ.P_L2, occ.P_R2,
                g2_analytic(amps, "L").value, g2_analytic(amps, "R").value,
                method, amps.tail_fraction(), "ok",
            )
        if method == "lindblad":
            ss, ob = solve(p, trunc)
            status = "ok" if ss.method != "evolve" else "ok: relaxed by time evolution"
            return CurvePoint(
                value, ob.P_L[1], ob.P_R[1], ob.P_L[2], ob.P_R[2],
                ob.g2_L, ob.g2_R, method, ss.residual, status,
            )
        raise ValueError(f"unknown method {method!r}")
    except (ArithmeticError, SolverError, np.linalg.LinAlgError, ValueError) as exc:
        return _failed(value, method, exc)


def _task(args) -> CurvePoint:
    p, method, trunc, value = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WeakDrivingWarning)
        return evaluate_point(p, method, trunc, value)


def run_sweep(cfg: SweepConfig, methods: Sequence[str] | None = None,
              threads: int | None = None, progress=None) -> list[CurvePoint]:
    """One CurvePoint per grid value per method, grouped by method in grid order.

    Points are independent, so ``threads > 1`` farms them out to processes;
    the returned order does not depend on the thread count.
    """
    methods = tuple(methods or cfg.methods)
    threads = threads or cfg.threads
    tasks = []
    for method in methods:
        for v in cfg.values():
            tasks.append((cfg.params_at(float(v)), method, cfg.truncation, float(v)))
    if threads == 1:
        rows = []
        for i, t in enumerate(tasks):
            rows.append(_task(t))
            if progress is not None:
                progress(i + 1, len(tasks))
        return rows
    with ProcessPoolExecutor(max_workers=threads) as pool:
        rows = []
        for i, row in enumerate(pool.map(_task, tasks, chunksize=4)):
            rows.append(row)
            if progress is not None:
                progress(i + 1, len(tasks))
    return rows


def select(curve: Sequence[CurvePoint], method: str | None = None) -> list[CurvePoint]:
    if method is None:
        return list(curve)
    return [pt for pt in curve if pt.method == method]


class Extremum(NamedTuple):
    kind: str  # "dip" or "peak"
    location: float
    refined: float
    value: float


def _quadratic_vertex(x, y) -> float:
    # vertex of the parabola through three points on a nonuniform grid
    a = np.polyfit(np.asarray(x) - x[1], y, 2)
    if a[0] == 0:
        return float(x[1])
    off = -a[1] / (2 * a[0])
    # a parabola through a strict extremum has its vertex between the neighbours
    return float(x[1] + np.clip(off, x[0] - x[1], x[2] - x[1]))


def detect_extrema(curve: Sequence[CurvePoint], fieldname: str = "g2_L",
                   method: str | None = None, boundary: int = BOUNDARY_STEPS,
                   min_prominence: float = 0.0) -> list[Extremum]:
    """Strict local extrema of log(field) along the axis.

    Locations are refined by a three-point quadratic fit of log(field).
    Extrema within ``boundary`` grid steps of either end are discarded, as
    are non-finite or non-positive values. ``min_prominence`` (in units of
    log(field)) drops shallow wiggles relative to the nearer neighbour
    extremum.
    """
    pts = sorted(
        (pt for pt in select(curve, method) if np.isfinite(getattr(pt, fieldname))
         and getattr(pt, fieldname) > 0),
        key=lambda pt: pt.axis_value,
    )
    if len(pts) < 3:
        return []
    x = np.array([pt.axis_value for pt in pts])
    y = np.log([getattr(pt, fieldname) for pt in pts])
    idx = []
    for i in range(1, len(x) - 1):
        if y[i] < y[i - 1] and y[i] < y[i + 1]:
            idx.append((i, "dip"))
        elif y[i] > y[i - 1] and y[i] > y[i + 1]:
            idx.append((i, "peak"))
    out = []
    for j, (i, kind) in enumerate(idx):
        if i < boundary or i > len(x) - 1 - boundary:
            continue
        if min_prominence > 0:
            left = y[idx[j - 1][0]] if j > 0 else y[0]
            right = y[idx[j + 1][0]] if j + 1 < len(idx) else y[-1]
            prom = min(abs(y[i] - left), abs(y[i] - right))
            if prom < min_prominence:
                continue
        refined = _quadratic_vertex(x[i - 1:i + 2], y[i - 1:i + 2])
        out.append(Extremum(kind, float(x[i]), refined, float(math.exp(y[i]))))
    return out


@dataclass
class CompareReport:
    fieldname: str
    axis: list[float]
    analytic: list[float]
    numeric: list[float]
    deviation: list[float]
    tolerance: float
    dip_tolerance: float
    dips: list[tuple[float, float]]  # (location, deviation) at analytic dips

    @property
    def max_deviation(self) -> float:
        vals = [d for d in self.deviation if np.isfinite(d)]
        return max(vals) if vals else math.nan

    @property
    def median_deviation(self) -> float:
        vals = [d for d in self.deviation if np.isfinite(d)]
        return float(np.median(vals)) if vals else math.nan

    @property
    def worst_location(self) -> float:
        dev = np.array(self.deviation, dtype=float)
        if not np.any(np.isfinite(dev)):
            return math.nan
        return self.axis[int(np.nanargmax(dev))]

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.max_deviation):
            return False
        ok = self.max_deviation < self.tolerance
        return ok and all(d < self.dip_tolerance for _, d in self.dips)

    def summary(self) -> dict:
        return {
            "field": self.fieldname,
            "points": len(self.axis),
            "max_relative_deviation": self.max_deviation,
            "median_relative_deviation": self.median_deviation,
            "worst_location": self.worst_location,
            "tolerance": self.tolerance,
            "dip_tolerance": self.dip_tolerance,
            "dips": [{"location": loc, "relative_deviation": d} for loc, d in self.dips],
            "passed": self.passed,
        }

    def table(self, every: int = 1) -> str:
        lines = [f"{'axis':>12} {'analytic':>13} {'numeric':>13} {'rel.dev':>9}"]
        for i in range(0, len(self.axis), every):
            lines.append(
                f"{self.axis[i]:12.6g} {self.analytic[i]:13.6g} {self.numeric[i]:13.6g} "
                f"{self.deviation[i]:9.3g}"
            )
        lines.append(
            f"max {self.max_deviation:.4g} at {self.worst_location:.6g}, "
            f"median {self.median_deviation:.4g}, tolerance {self.tolerance:g}"
        )
        for loc, d in self.dips:
            lines.append(f"dip at {loc:.6g}: deviation {d:.4g} (tolerance {self.dip_tolerance:g})")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def compare_report(analytic: Sequence[CurvePoint], numeric: Sequence[CurvePoint],
                   fieldname: str = "g2_L", tolerance: float = 0.25,
                   dip_tolerance: float = 0.10) -> CompareReport:
    """Pointwise |analytic - numeric| / numeric on the common grid values.

    Dip deviations are taken at the grid points of the dips detected in the
    analytic curve that fall below one.
    """
    num = {round(pt.axis_value, 12): getattr(pt, fieldname) for pt in numeric}
    axis, a_vals, n_vals, dev = [], [], [], []
    for pt in sorted(analytic, key=lambda q: q.axis_value):
        key = round(pt.axis_value, 12)
        if key not in num:
            continue
        a, n = getattr(pt, fieldname), num[key]
        axis.append(pt.axis_value)
        a_vals.append(a)
        n_vals.append(n)
        dev.append(abs(a - n) / abs(n) if np.isfinite(a) and np.isfinite(n) and n != 0 else math.nan)
    lookup = dict(zip(np.round(axis, 12), dev))
    dips = [
        (e.location, lookup[round(e.location, 12)])
        for e in detect_extrema(analytic, fieldname)
        if e.kind == "dip" and e.value < 1 and round(e.location, 12) in lookup
    ]
    return CompareReport(fieldname, axis, a_vals, n_vals, dev, tolerance, dip_tolerance, dips)
