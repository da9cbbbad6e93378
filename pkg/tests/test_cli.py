import csv
import json
import math

import numpy as np
import pytest

from gchsh import (
    SQRT2,
    THETA_MAX,
    THETA_MIN,
    BoundCurve,
    bound_at,
    load_table,
    local_bound,
    save_table,
)
from gchsh.cli import main, parse_theta

QUARTER_PI = math.pi / 4
TSIRELSON = 2 * SQRT2
BETA_TRIVIAL_CHSH = 2 * (8 + 7 * SQRT2) / 17


def synthetic_curve(theta):
    beta_local = local_bound(theta)
    beta_trivial = beta_local + 0.05 * (TSIRELSON - beta_local)
    return BoundCurve(
        theta=theta,
        beta_trivial=beta_trivial,
        beta_star=beta_local,
        fidelity_star=0.43,
        slope_star=(1 - 0.43) / (TSIRELSON - beta_local),
    )


@pytest.fixture
def table5(tmp_path):
    """Synthetic 5-theta table file matching --theta-points 5."""
    thetas = np.linspace(THETA_MIN, THETA_MAX, 5)
    path = str(tmp_path / "table5.txt")
    save_table([synthetic_curve(float(t)) for t in thetas], path)
    return path


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("GCHSH_TABLE", raising=False)


def parse_kv(out):
    pairs = {}
    for line in out.strip().splitlines():
        key, _, value = line.partition(" = ")
        pairs[key] = value
    return pairs


def test_parse_theta_forms():
    assert parse_theta("0.5") == 0.5
    assert parse_theta("pi/4") == pytest.approx(QUARTER_PI)
    assert parse_theta("3pi/16") == pytest.approx(3 * math.pi / 16)
    assert parse_theta("3*pi/16") == pytest.approx(3 * math.pi / 16)
    assert parse_theta(" PI/8 ") == pytest.approx(math.pi / 8)
    for bad in ("pi/0", "two", "pi4", "pi/"):
        with pytest.raises(ValueError):
            parse_theta(bad)


def test_unparseable_theta_exits_2(capsys):
    assert main(["bound", "--theta", "pi/0", "--score", "2.1"]) == 2
    assert "error:" in capsys.readouterr().err


def test_unsupported_theta_exits_2(capsys):
    assert main(["bound", "--theta", "0.01", "--score", "2.1"]) == 2


def test_superquantum_score_exits_2(table5, capsys):
    code = main(["--table", table5, "bound", "--theta", "pi/4", "--score", "2.9"])
    assert code == 2
    assert "quantum maximum" in capsys.readouterr().err


def test_missing_curve_exits_3(tmp_path, capsys):
    table = str(tmp_path / "nothing.txt")
    code = main(["--table", table, "bound", "--theta", "pi/4", "--score", "2.4"])
    assert code == 3
    assert "--compute-missing" in capsys.readouterr().err


def test_select_outside_region_exits_4(table5, capsys):
    code = main(
        ["--table", table5, "select", "--x", "1.0", "--y", "0.5", "--theta-points", "5"]
    )
    assert code == 4
    assert "X + Y" in capsys.readouterr().err


def test_mesh_unwritable_out_exits_5(table5, tmp_path, capsys):
    code = main(
        [
            "--table", table5,
            "mesh", "--delta", "0.5", "--out", str(tmp_path), "--theta-points", "5",
        ]
    )
    assert code == 5


def test_bound_happy_path(table5, capsys):
    code = main(["--table", table5, "bound", "--theta", "pi/4", "--score", "2.4"])
    assert code == 0
    pairs = parse_kv(capsys.readouterr().out)
    expected = bound_at(synthetic_curve(QUARTER_PI), 2.4)
    assert float(pairs["fidelity_bound"]) == pytest.approx(expected, rel=1e-9)
    assert float(pairs["score"]) == 2.4


def test_select_json_output(table5, capsys):
    code = main(
        [
            "--table", table5, "--json",
            "select", "--x", "0.6", "--y", "1.9", "--theta-points", "5",
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["normalized_x"] == pytest.approx(1.9)
    assert payload["normalized_y"] == pytest.approx(0.6)
    assert payload["transforms"] == "swap"
    assert THETA_MIN <= payload["theta_best"] <= THETA_MAX + 1e-12
    assert 0.5 <= payload["fidelity_bound"] <= 1.0
    assert payload["beta_at_best"] <= TSIRELSON + 1e-9


def test_table_env_var(table5, monkeypatch, capsys):
    monkeypatch.setenv("GCHSH_TABLE", table5)
    code = main(["bound", "--theta", "pi/4", "--score", "2.4"])
    assert code == 0


def test_table_flag_beats_env(table5, tmp_path, monkeypatch):
    monkeypatch.setenv("GCHSH_TABLE", str(tmp_path / "missing.txt"))
    code = main(["--table", table5, "bound", "--theta", "pi/4", "--score", "2.4"])
    assert code == 0


def test_config_file_table_path(table5, tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"table_path": table5, "restarts": 3}))
    code = main(["--config", str(config), "bound", "--theta", "pi/4", "--score", "2.4"])
    assert code == 0


def test_config_file_unknown_key_exits_2(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"bogus": 1}))
    code = main(["--config", str(config), "bound", "--theta", "pi/4", "--score", "2.4"])
    assert code == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_mesh_csv_output(table5, tmp_path, capsys):
    out = tmp_path / "mesh.csv"
    code = main(
        [
            "--table", table5,
            "mesh", "--delta", "0.5", "--out", str(out), "--theta-points", "5",
        ]
    )
    assert code == 0
    pairs = parse_kv(capsys.readouterr().out)
    with open(out, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["X", "Y", "fidelity", "theta"]
    assert int(pairs["rows"]) == len(rows) - 1 == 5
    coords = {(float(r[0]), float(r[1])) for r in rows[1:]}
    assert (2.0, 0.0) in coords
    assert any(abs(x - SQRT2) < 1e-9 and abs(y - SQRT2) < 1e-9 for x, y in coords)


def test_mesh_bad_delta_exits_2(table5):
    assert main(["--table", table5, "mesh", "--delta", "2.5", "--out", "x.csv"]) == 2
    assert main(["--table", table5, "mesh", "--delta", "0", "--out", "x.csv"]) == 2


def test_trivial_score_end_to_end(tmp_path, capsys):
    table = str(tmp_path / "real.txt")
    code = main(
        [
            "--table", table, "--restarts", "2", "--json",
            "trivial-score", "--theta", "pi/4",
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["beta_trivial"] == pytest.approx(BETA_TRIVIAL_CHSH, abs=1e-3)
    assert payload["beta_local"] == pytest.approx(2.0)

    # the stored curve now serves bound queries without recomputation
    code = main(["--table", table, "bound", "--theta", "pi/4", "--score", "2.6"])
    assert code == 0
    pairs = parse_kv(capsys.readouterr().out)
    assert float(pairs["fidelity_bound"]) == pytest.approx(0.8419417382415921, abs=1e-3)

    # recomputing the same theta replaces the entry instead of duplicating it,
    # and an identical seed reproduces the same curve
    code = main(
        [
            "--table", table, "--restarts", "2",
            "trivial-score", "--theta", str(QUARTER_PI),
        ]
    )
    assert code == 0
    stored = load_table(table)
    assert len(stored) == 1
    assert stored[0].beta_trivial == pytest.approx(payload["beta_trivial"], rel=1e-10)
