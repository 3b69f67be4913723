import json
from fractions import Fraction as F

import pytest

from cascade_pbe.cli import main
from cascade_pbe.game import GameParams
from cascade_pbe.io import dumps_profile
from cascade_pbe.profiles import large_delta_profile, myopic_profile


@pytest.fixture
def myopic_file(tmp_path):
    par = GameParams(5, F(1, 10), F(1, 2))
    path = tmp_path / "myopic.json"
    path.write_text(dumps_profile(myopic_profile(par), par))
    return path


def test_solve_ascii(capsys):
    assert main(["solve", "--n", "11", "--p", "1/10", "--delta", "0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("r=0") and "01" in out


def test_solve_writes_outputs(tmp_path, capsys):
    rc = main(["solve", "--n", "4", "--p", "0.1", "--delta", "0.999", "--verify", "--out", str(tmp_path / "o"),
               "--format", "json"])
    assert rc == 0
    meta = json.loads((tmp_path / "o" / "meta.json").read_text())
    assert meta["converged"] and meta["verified"] and meta["delta"] == "999/1000"
    assert (tmp_path / "o" / "values.csv").exists()


def test_not_converged_exit_code(capsys):
    assert main(["solve", "--n", "4", "--p", "1/10", "--delta", "1/2", "--max-iters", "1"]) == 2


@pytest.mark.parametrize("argv", [
    ["solve", "--n", "3", "--p", "x/y", "--delta", "0"],
    ["solve", "--n", "3", "--p", "1/10", "--delta", "2"],
    ["solve", "--n", "3", "--p", "1/10", "--delta", "0", "--tie-break", "buy,buy,wait"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        rc = main(argv)
        raise SystemExit(rc)
    assert exc.value.code == 64


def test_verify_pass_and_fail(myopic_file, tmp_path, capsys):
    assert main(["verify", str(myopic_file)]) == 0
    doc = json.loads(myopic_file.read_text())
    doc["phi"]["r0"][5 - 2][3] = "00"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["verify", str(bad)]) == 1
    assert "violation at (r=0, y=2, w=3)" in capsys.readouterr().err


def test_verify_schema_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"n": 3, "phi": {}}')
    assert main(["verify", str(path)]) == 65
    assert main(["verify", str(tmp_path / "missing.json")]) == 65


def test_bisect_delta(tmp_path, capsys):
    par = GameParams(5, F(1, 10), F(1, 2))
    path = tmp_path / "ld.json"
    path.write_text(dumps_profile(large_delta_profile(par), par))
    assert main(["verify", str(path), "--bisect-delta", "--refine-bits", "4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert 0 < F(doc["delta_star"]) < 1


def test_cascade_and_simulate(myopic_file, tmp_path, capsys):
    cum = tmp_path / "cum.csv"
    assert main(["cascade", str(myopic_file), "--v", "-1", "--cumulative", str(cum)]) == 0
    assert capsys.readouterr().out.startswith("v,class,probability")
    assert cum.read_text().startswith("w,bad_v-1")
    assert main(["simulate", str(myopic_file), "--runs", "2000", "--seed", "1"]) == 0
    assert "within_3se" in capsys.readouterr().out


def test_profile_command(tmp_path):
    out = tmp_path / "p.json"
    assert main(["profile", "myopic", "--n", "5", "--p", "1/10", "--delta", "999/1000", "--out", str(out)]) == 0
    assert main(["verify", str(out)]) == 0
    assert main(["profile", "delta1", "--n", "3", "--p", "1/10", "--delta", "1", "--format", "ascii"]) == 0
