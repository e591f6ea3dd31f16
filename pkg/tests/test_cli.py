import json
import subprocess
import sys

import pytest

from pillowfloer.cli import SCHEMA, main
from pillowfloer.curves import dump_curves, load_curves
from pillowfloer.verify import fixture_path


def test_two_bridge_report(tmp_path, capsys):
    out = tmp_path / "k.json"
    assert main(["two-bridge", "11", "-5", "--json", str(out)]) == 0
    assert "H = (3,2,3,3)" in capsys.readouterr().out
    rep = json.loads(out.read_text())
    assert rep["schema"] == SCHEMA and rep["homology"] == [3, 2, 3, 3]
    grades = {g["label"].split(".", 1)[1]: g["grading"] for g in rep["components"][0]["generators"]}
    assert grades["r+"] == 2


def test_report_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["two-bridge", "5", "2", "--json", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_floer_on_fixture(tmp_path, capsys):
    assert main(["floer", "--l1", str(fixture_path("figure_re1.json")), "--eps", "0.2"]) == 0
    assert "H = (1,1,1,1)" in capsys.readouterr().out


def test_render_from_report_matches_direct_svg(tmp_path):
    rep, direct, again = tmp_path / "r.json", tmp_path / "d.svg", tmp_path / "a.svg"
    assert main(["two-bridge", "5", "-3", "--json", str(rep), "--svg", str(direct)]) == 0
    assert main(["render", str(rep), str(again)]) == 0
    assert direct.read_text() == again.read_text()
    assert direct.read_text().lstrip().startswith("<?xml")


def test_render_curve_file(tmp_path):
    curves = tmp_path / "c.json"
    dump_curves(load_curves(fixture_path("figure_re1.json")), curves)
    assert main(["render", str(curves), str(tmp_path / "c.svg")]) == 0
    assert "<svg" in (tmp_path / "c.svg").read_text()


@pytest.mark.parametrize("argv,code", [
    (["two-bridge", "4", "1"], 2),
    (["two-bridge", "9", "3"], 2),
    (["torus", "3", "5", "1", "1"], 2),
    (["floer", "--l1", "/nonexistent.json"], 2),
    (["two-bridge", "5", "2", "--g", "bad"], 2),
    (["two-bridge", "5", "2", "--eps", "0"], 1),
    (["verify", "nosuchsuite"], 2),
])
def test_exit_codes(argv, code):
    assert main(argv) == code


def test_usage_error_from_argparse():
    proc = subprocess.run([sys.executable, "-m", "pillowfloer.cli", "torus", "3"], capture_output=True)
    assert proc.returncode == 2


def test_verify_subcommand(capsys):
    assert main(["verify", "z", "fixture", "--cases", "20"]) == 0
    out = capsys.readouterr().out
    assert "PASS z" in out and "PASS fixture" in out


@pytest.mark.slow
def test_torus_cli_sidecar(tmp_path, capsys):
    side = tmp_path / "side.json"
    assert main(["torus", "3", "5", "2", "-1", "--sidecar", str(side)]) == 0
    assert "H = (2,1,2,2)" in capsys.readouterr().out
    data = json.loads(side.read_text())
    assert data["spec"]["p"] == 3 and len(data["components"]) == 1
