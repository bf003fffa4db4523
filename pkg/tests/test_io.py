import math

import pytest

from loopblockade.fock import TruncationSpec
from loopblockade.io import (
    ConfigError,
    format_config,
    parse_config,
    read_csv,
    shipped_configs,
    write_csv,
    write_json,
)
from loopblockade.model import ModelParams
from loopblockade.sweep import CSV_FIELDS, CurvePoint, SweepConfig


def test_parse_basic():
    cfg = parse_config(
        """
        # comment line
        axis = g          # trailing comment
        grid = 0.05, 0.9, 18
        methods = analytic, lindblad
        lock_resonance = +
        drive_ratio = 0.2
        kappa = 0.03
        J = 0.04
        n_max_b = 10
        refine = 0.6, 0.7, 11
        """
    )
    assert cfg.axis == "g" and len(cfg.grid) == 18
    assert cfg.methods == ("analytic", "lindblad")
    assert cfg.base.kappa_L == cfg.base.kappa_R == 0.03
    assert cfg.base.J == 0.04
    assert cfg.truncation.n_max_b == 10
    assert cfg.refine == ((0.6, 0.7, 11),)


def test_round_trip():
    cfg = SweepConfig(
        base=ModelParams(g_L=-0.2, g_R=0.2, delta_L=0.01, delta_R=0.01, n_bar_b=0.3),
        axis="delta", grid=(-0.1, 0.0, 0.1), methods=("lindblad",),
        truncation=TruncationSpec(3, 3, 8), lock_resonance="-", drive_ratio=0.1,
        refine=((0.01, 0.02, 3),), output="out.csv", threads=2, name="rt",
    )
    again = parse_config(format_config(cfg))
    assert again == cfg
    assert again.base == cfg.base


@pytest.mark.parametrize(
    "text,match",
    [
        ("axis = delta\nbogus = 3\n", "line 2: unknown key 'bogus'"),
        ("J 0.05\n", "line 1: expected"),
        ("J = fast\n", "line 1: key 'J' expects a number"),
        ("grid = 0, 1\n", "key 'grid'"),
        ("n_max_b = 2.5\n", "key 'n_max_b' expects an integer"),
        ("axis =\n", "key 'axis' has no value"),
        ("axis = omega\n", "invalid configuration"),
    ],
)
def test_parse_errors_name_line_and_key(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_csv_round_trip(tmp_path):
    cfg = SweepConfig(grid=(0.0, 0.1))
    rows = [
        CurvePoint(0.0, 1e-3, 2e-4, 1e-7, 2e-9, 0.5, 0.25, "analytic", 0.0, "ok"),
        CurvePoint(0.1, math.nan, math.nan, math.nan, math.nan, math.nan, math.nan, "lindblad",
                   math.nan, "error: SolverError: boom"),
    ]
    path = tmp_path / "c.csv"
    write_csv(path, rows, cfg)
    text = path.read_text()
    assert text.startswith("# ")
    header = [line for line in text.splitlines() if not line.startswith("#")][0]
    assert header == ",".join(CSV_FIELDS)
    back, cfg2 = read_csv(path)
    assert cfg2 == cfg
    assert back[0] == rows[0]
    assert math.isnan(back[1].g2_L) and back[1].status == rows[1].status


def test_csv_deterministic(tmp_path):
    rows = [CurvePoint(0.1 * i, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, "analytic", 0.0, "ok") for i in range(5)]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(a, rows, SweepConfig())
    write_csv(b, rows, SweepConfig())
    assert a.read_bytes() == b.read_bytes()


def test_json_nan_as_null(tmp_path):
    path = tmp_path / "s.json"
    write_json(path, {"x": math.nan, "y": [1.0, math.inf]})
    assert '"x": null' in path.read_text()


def test_shipped_configs_parse():
    cfgs = shipped_configs()
    assert {"detuning_equal", "gscan_lock_plus", "gscan_lock_minus", "thermal_g0.2", "detuning_opposite"} <= set(cfgs)
    assert cfgs["detuning_equal"].grid[0] == -1.15 and len(cfgs["detuning_equal"].grid) == 1501
    assert cfgs["detuning_opposite"].base.g_L == -0.2 and cfgs["detuning_opposite"].base.g_R == 0.2
    assert all(c.base.Omega == 0.002 for k, c in cfgs.items() if k.startswith("gscan_fixed_drive"))
