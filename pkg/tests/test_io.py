import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascade_pbe.game import Gamma, GameParams
from cascade_pbe.io import ProfileFormatError, dumps_profile, loads_profile, profile_csv, render_ascii, values_csv
from cascade_pbe.model import StrategyProfile
from cascade_pbe.profiles import myopic_profile
from cascade_pbe.verifier import solve_exact_values


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 9), st.data())
def test_json_round_trip(N, data):
    prof = StrategyProfile.from_rule(N, lambda r, y, w: data.draw(st.sampled_from(list(Gamma))))
    par = GameParams(N, F(1, 10), F(999, 1000))
    back, par2 = loads_profile(dumps_profile(prof, par))
    assert back == prof and par2 == par


def test_json_layout():
    par = GameParams(3, F(1, 10), F(1, 2))
    doc = json.loads(dumps_profile(myopic_profile(par), par))
    assert doc["p"] == "1/10" and doc["delta"] == "1/2"
    r0 = doc["phi"]["r0"]
    assert len(r0) == 7 and all(len(row) == 4 for row in r0)
    # row 0 is y = N
    assert r0[0] == ["--"] * 4
    assert r0[3][0] == "01"


def test_ascii_codes_and_orientation():
    text = render_ascii(myopic_profile(GameParams(4, F(1, 10), 0)))
    cells = {tok for line in text.splitlines() for tok in line.split()[1:] if not line.startswith(("r=", "  y"))}
    assert cells <= {"00", "01", "11", "--"}
    lines = text.splitlines()
    assert lines[0] == "r=0" and lines[2].split()[0] == "4"
    assert "r=1" in lines


@pytest.mark.parametrize("mutate,msg", [
    (lambda d: d.pop("phi"), "missing"),
    (lambda d: d["phi"]["r0"].pop(), "grid"),
    (lambda d: d["phi"]["r0"][3].__setitem__(0, "10"), "unknown"),
    (lambda d: d["phi"]["r0"][3].__setitem__(0, "--"), "missing strategy"),
    (lambda d: d["phi"]["r0"][0].__setitem__(0, "11"), "infeasible"),
    (lambda d: d.__setitem__("p", "3/4"), "bad parameters"),
])
def test_schema_errors(mutate, msg):
    par = GameParams(3, F(1, 10), F(1, 2))
    doc = json.loads(dumps_profile(myopic_profile(par), par))
    mutate(doc)
    with pytest.raises(ProfileFormatError, match=msg):
        loads_profile(json.dumps(doc))


def test_not_json():
    with pytest.raises(ProfileFormatError):
        loads_profile("{")
    with pytest.raises(ProfileFormatError):
        loads_profile("[]")


def test_csv_writers():
    par = GameParams(2, F(1, 10), F(1, 2))
    prof = myopic_profile(par)
    rows = profile_csv(prof).splitlines()
    assert rows[0] == "r,y,w,code" and len(rows) == 1 + len(list(prof.items()))
    vals = values_csv(solve_exact_values(prof, par)).splitlines()
    assert vals[0] == "kind,x,r,z,y,w,value"
