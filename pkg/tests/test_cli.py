"""Command-line driver: exit codes, determinism, output formats."""

import json

import pytest

from gfock.cli import main
from gfock import reports


def run(argv):
    return main(list(argv))


def test_suite_passes_on_cp1(tmp_path):
    out = tmp_path / "suite.json"
    assert run(["suite", "--preset", "cp1", "--m", "1..4", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "PASS"
    assert {s["check"] for s in doc["sections"]} >= {"space", "q_isometry", "guo"}
    assert doc["meta"]["seed"] == 20240601


def test_q_isometry_fit(tmp_path):
    out = tmp_path / "q.json"
    code = run(
        ["shifts", "--preset", "cp2", "--check", "q-isometry", "--m", "1..6",
         "--out", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["fit"]["q"] == 3


def test_malformed_ideal_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"n": 3, "ideal": ["z1^2 +"]}')
    assert run(["space", "--model", str(cfg), "--m", "1..3"]) == 2
    assert "config error" in capsys.readouterr().err


def test_bad_json_reports_position(tmp_path, capsys):
    cfg = tmp_path / "broken.json"
    cfg.write_text('{"n": 2,\n "ideal": [,]}')
    assert run(["space", "--model", str(cfg), "--m", "1..3"]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err


def test_unknown_preset_exits_2(capsys):
    assert run(["space", "--preset", "torus", "--m", "1..3"]) == 2
    assert "config error" in capsys.readouterr().err


def test_bad_m_range_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["space", "--preset", "cp1", "--m", "junk"])
    assert exc.value.code == 2


def test_bad_tol_exits_2():
    with pytest.raises(SystemExit) as exc:
        run(["suite", "--preset", "cp1", "--m", "1..3", "--tol", "orbit"])
    assert exc.value.code == 2


def test_tol_override_can_force_fail(tmp_path):
    # cp1 column sums cancel exactly in floating point, so tighten on a
    # preset whose residual is merely near machine precision
    out = tmp_path / "strict.json"
    code = run(
        ["shifts", "--preset", "segre11", "--check", "orbit", "--m", "1..3",
         "--tol", "orbit=1e-30", "--out", str(out)]
    )
    assert code == 1
    assert json.loads(out.read_text())["verdict"] == "FAIL"


def test_determinism_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["toeplitz", "--preset", "cp1", "--m", "1..3"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_validate_subcommand(tmp_path):
    out = tmp_path / "r.json"
    assert run(["space", "--preset", "cp1", "--m", "1..3", "--out", str(out)]) == 0
    assert run(["validate", str(out)]) == 0

    doc = json.loads(out.read_text())
    doc["verdict"] = "SHRUG"
    out.write_text(reports.dumps(doc))
    assert run(["validate", str(out)]) == 1


def test_csv_suffix_inference(tmp_path):
    out = tmp_path / "scan.csv"
    code = run(
        ["cd-scan", "--preset", "cp1", "--bundle", "line:1", "--m", "2..3",
         "--grid", "8", "--out", str(out)]
    )
    assert code == 0
    header = out.read_text().splitlines()[0]
    for column in ("check", "point", "m", "rank"):
        assert column in header.split(",")


def test_stdout_json_when_piped(capsys):
    assert run(["space", "--preset", "cp1", "--m", "1..2"]) == 0
    captured = capsys.readouterr().out
    doc = json.loads(captured[captured.index("{"):])
    assert doc["check"] == "space"
