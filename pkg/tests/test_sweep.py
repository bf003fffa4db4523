import math

import numpy as np
import pytest

from loopblockade.fock import TruncationSpec
from loopblockade.model import ModelParams
from loopblockade.sweep import (
    CurvePoint,
    SweepConfig,
    compare_report,
    detect_extrema,
    evaluate_point,
    run_sweep,
)


def curve_from(x, y, method="analytic"):
    return [CurvePoint(float(a), 0, 0, 0, 0, float(b), float(b), method, 0.0, "ok") for a, b in zip(x, y)]


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(axis="omega")
    with pytest.raises(ValueError):
        SweepConfig(grid=(0.0, 0.2, 0.1))
    with pytest.raises(ValueError):
        SweepConfig(methods=("exact",))
    with pytest.raises(ValueError):
        SweepConfig(lock_resonance="x")
    with pytest.raises(ValueError):
        SweepConfig(refine=((0.2, 0.1, 5),))


def test_values_merge_refinement():
    cfg = SweepConfig(grid=(0.0, 0.5, 1.0), refine=((0.2, 0.3, 3),))
    assert list(cfg.values()) == [0.0, 0.2, 0.25, 0.3, 0.5, 1.0]


def test_params_at_axes():
    base = ModelParams(g_L=-0.2, g_R=0.2)
    cfg = SweepConfig(base=base, axis="g", grid=(0.1, 0.3), lock_resonance="+", drive_ratio=0.2)
    p = cfg.params_at(0.3)
    assert (p.g_L, p.g_R) == (0.3, -0.3)
    assert p.delta_L == pytest.approx(0.09 - 0.05)
    assert p.Omega == pytest.approx(0.002)
    p = SweepConfig(axis="kappa", grid=(0.01, 0.1), drive_ratio=0.2).params_at(0.1)
    assert (p.kappa_L, p.kappa_R, p.Omega) == (0.1, 0.1, pytest.approx(0.02))
    p = SweepConfig(lock_resonance="-", axis="g", grid=(0.2, 0.3)).params_at(0.2)
    assert p.delta_R == pytest.approx(0.04 + 0.05)


def test_single_point_one_row_per_method():
    cfg = SweepConfig(grid=(-0.01,), methods=("analytic", "lindblad"), truncation=TruncationSpec(2, 2, 6))
    rows = run_sweep(cfg)
    assert [r.method for r in rows] == ["analytic", "lindblad"]
    assert all(r.status == "ok" for r in rows)
    assert all(0 <= v <= 1 for r in rows for v in (r.P_L1, r.P_R1, r.P_L2, r.P_R2))


def test_failed_point_recorded_in_row():
    p = ModelParams(kappa_L=0, kappa_R=0, Omega=0, g_L=0, g_R=0, J=0)
    row = evaluate_point(p, "analytic", TruncationSpec(), 0.0)
    assert row.status.startswith("error")
    assert math.isnan(row.g2_L)


def test_parallel_rows_match_serial():
    cfg = SweepConfig(grid=tuple(np.linspace(-0.05, 0.05, 6)), methods=("analytic", "lindblad"),
                      truncation=TruncationSpec(2, 2, 5))
    a = run_sweep(cfg, threads=1)
    b = run_sweep(cfg, threads=2)
    assert a == b


def test_detect_extrema_simple():
    x = np.linspace(-1, 1, 201)
    y = np.exp(-((x - 0.303) ** 2) / 0.01) + 0.1
    ext = detect_extrema(curve_from(x, y), "g2_L")
    assert len(ext) == 1 and ext[0].kind == "peak"
    assert abs(ext[0].refined - 0.303) < 1e-3
    assert abs(ext[0].location - 0.30) < 1e-12


def test_detect_extrema_nonuniform_refinement():
    x = np.concatenate([np.linspace(-1, 0, 11), np.linspace(0.01, 1, 7)])
    y = np.exp((x - 0.12) ** 2)  # log is a parabola, so the refinement is exact
    ext = detect_extrema(curve_from(x, y), "g2_L")
    assert ext[0].kind == "dip"
    assert ext[0].refined == pytest.approx(0.12, abs=1e-9)


def test_monotone_curve_has_no_extrema():
    x = np.linspace(0, 1, 50)
    assert detect_extrema(curve_from(x, np.exp(x)), "g2_L") == []


def test_boundary_extrema_discarded():
    x = np.linspace(0, 1, 50)
    y = (x - x[2]) ** 2 + 1
    assert detect_extrema(curve_from(x, y), "g2_L") == []


def test_nan_points_skipped():
    x = np.linspace(-1, 1, 41)
    y = x**2 + 0.5
    y[5] = np.nan
    ext = detect_extrema(curve_from(x, y), "g2_L")
    assert [e.kind for e in ext] == ["dip"]


def test_compare_identical_curves():
    x = np.linspace(-1, 1, 41)
    c = curve_from(x, x**2 + 0.5)
    rep = compare_report(c, curve_from(x, x**2 + 0.5, "lindblad"))
    assert rep.max_deviation == 0
    assert rep.passed
    assert rep.dips and rep.dips[0][1] == 0
    assert "PASS" in rep.table()
    assert rep.summary()["passed"] is True


def test_compare_flags_deviation():
    x = np.linspace(-1, 1, 41)
    rep = compare_report(curve_from(x, x**2 + 0.5), curve_from(x, 1.5 * (x**2 + 0.5), "lindblad"))
    assert rep.max_deviation == pytest.approx(1 / 3)
    assert not rep.passed
