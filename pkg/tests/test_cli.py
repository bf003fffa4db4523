import json

import pytest

from loopblockade.cli import main
from loopblockade.io import read_csv

CFG = """
axis = delta
grid = -0.05, 0.05, 21
methods = analytic, lindblad
drive_ratio = 0.2
n_max_L = 2
n_max_R = 2
n_max_b = 6
"""


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(CFG)
    return path


def test_spectrum(capsys):
    assert main(["spectrum", "--k-max", "1"]) == 0
    out = capsys.readouterr().out
    assert "eps_1+,0" in out and "-0.010000" in out


def test_sweep_extrema_compare(tmp_path, cfg_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(cfg_path), "--output", str(out), "--method", "analytic"]) == 0
    rows, cfg = read_csv(out)
    assert len(rows) == 21 and {r.method for r in rows} == {"analytic"}
    assert cfg.methods == ("analytic",)

    ext_json = tmp_path / "e.json"
    assert main(["extrema", str(out), "--output", str(ext_json)]) == 0
    payload = json.loads(ext_json.read_text())
    assert payload["extrema"]["analytic"][0]["kind"] == "dip"

    num = tmp_path / "n.csv"
    assert main(["sweep", "--config", str(cfg_path), "--output", str(num), "--method", "lindblad",
                 "--threads", "1"]) == 0
    summary = tmp_path / "c.json"
    code = main(["compare", str(out), str(num), "--output", str(summary), "--tolerance", "10",
                 "--dip-tolerance", "10"])
    assert code == 0
    assert json.loads(summary.read_text())["passed"] is True
    code = main(["compare", str(out), str(num), "--tolerance", "1e-9"])
    assert code == 3


def test_usage_errors(tmp_path, cfg_path):
    assert main(["sweep", "--config", str(cfg_path)]) == 1  # no output path
    assert main(["sweep", "--config", str(tmp_path / "missing.cfg"), "--output", "x.csv"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert main(["sweep", "--config", str(bad), "--output", "x.csv"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--method", "exact"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_solver_failure_exit_code(tmp_path):
    cfg = tmp_path / "undamped.cfg"
    cfg.write_text("axis = delta\ngrid_list = 0.0\nkappa = 0\nkappa_b = 0\nOmega = 0\ng = 0\nJ = 0\n")
    assert main(["sweep", "--config", str(cfg), "--output", str(tmp_path / "u.csv")]) == 2


def test_validate_subset(capsys):
    code = main(["validate", "--only", "1,5", "--criteria-only"])
    out = capsys.readouterr().out
    assert code == 0
    assert "criterion  1" in out and "criterion  5" in out
