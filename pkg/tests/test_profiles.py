from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cascade_pbe.game import Gamma, GameParams
from cascade_pbe.profiles import count_buy_r0, delta1_profile, large_delta_profile, myopic_profile, structural_check

P11 = GameParams(11, F(1, 10), F(1, 2))


def checks(prof):
    return {c.name: c for c in structural_check(prof)}


def test_myopic_examples():
    prof = myopic_profile(P11)
    assert prof[0, 3, 3] is Gamma.BUY
    assert prof[0, 0, 4] is Gamma.REVEAL
    assert prof[1, -2, 2] is Gamma.WAIT
    assert myopic_profile(P11, Gamma.REVEAL)[1, 1, 5] is Gamma.REVEAL
    assert myopic_profile(P11, {5: Gamma.REVEAL})[1, 1, 6] is Gamma.BUY
    with pytest.raises(ValueError):
        myopic_profile(P11, Gamma.WAIT)


def test_delta1_examples():
    prof = delta1_profile(P11)
    assert prof[0, 5, 5] is Gamma.REVEAL
    assert prof[1, 2, 11] is Gamma.BUY
    assert prof[0, -3, 3] is Gamma.WAIT
    assert prof[1, 0, 11] is Gamma.REVEAL


def test_large_delta_examples():
    prof = large_delta_profile(P11)
    assert prof[0, 2, 9] is Gamma.BUY
    assert prof[0, 1, 10] is Gamma.REVEAL
    assert prof[1, 0, 11] is Gamma.REVEAL
    assert prof[1, 1, 10] is Gamma.BUY


@given(st.integers(1, 25))
def test_constructors_total_and_structured(N):
    par = GameParams(N, F(1, 10), F(1, 2))
    for make in (myopic_profile, delta1_profile, large_delta_profile):
        prof = make(par)
        assert prof.is_total()
        c = checks(prof)
        assert c["a_wait_below"].passed and c["b_no_wait_nonnegative_y"].passed and c["c_reveal_at_zero"].passed


@given(st.integers(1, 25))
def test_delta1_has_no_free_buy(N):
    assert count_buy_r0(delta1_profile(GameParams(N, F(1, 10), F(1)))) == 0


@given(st.integers(1, 25))
def test_large_delta_buys_only_late(N):
    prof = large_delta_profile(GameParams(N, F(1, 10), F(1, 2)))
    assert all(y + w >= N for (r, y, w), g in prof.items() if r == 0 and g is Gamma.BUY)


def test_myopic_passes_every_property():
    assert all(c.passed for c in structural_check(myopic_profile(P11)))


def test_reveal_at_zero_violation_has_witness():
    prof = myopic_profile(P11)
    prof[0, 0, 3] = Gamma.BUY
    c = checks(prof)["c_reveal_at_zero"]
    assert not c.passed and (0, 0, 3) in c.witnesses
    assert "FAIL" in str(c)


def test_threshold_in_w_violation():
    prof = myopic_profile(P11)
    prof[0, 3, 5] = Gamma.WAIT
    c = checks(prof)
    assert not c["e_threshold_in_w"].passed
    assert not c["d_rows_wait_or_active"].passed
