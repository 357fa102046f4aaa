# SPDX-License-Identifier: Apache-2.0
from fractions import Fraction

import pytest

import riadof


def test_exact_values_are_fractions():
    assert riadof.d_order_m(3, 2, 3, 2) == Fraction(7, 3)
    assert riadof.d_order_m(3, 2, 3, 2, method="recursive") == Fraction(7, 3)
    assert riadof.d1_mat(2, 3, 2, 3) == Fraction(21, 8)
    assert riadof.d1_rtpin(3, 3, 2, 3) == Fraction(504, 185)
    assert riadof.d1_rtpin(3, 1, 1, 3) == Fraction(36, 31)
    assert riadof.d_order_1m(3, 2, 3, 2) == 6
    assert riadof.epsilon(3) == Fraction(30, 17)
    assert isinstance(riadof.d2_miso(3), Fraction)


def test_best_schedule():
    best = riadof.d1_best(3, 2, 3)
    assert best == {"value": Fraction(504, 185), "scheme": "RtPin", "n": 3, "clamped": False}
    assert riadof.d1_best(3, 1, 3)["n"] == 2
    assert riadof.d1_miso(3) == (Fraction(3, 2), 2)
    values = [c["value"] for c in riadof.d1_candidates(1, 1, 5)]
    assert max(values) == riadof.d1_best(1, 1, 5)["value"]


def test_ledgers_and_conditions():
    led = riadof.ledger("phase1-rtpin", 3, 3, 2, 3)
    assert (led["t1"], led["t2"]) == (8, 3)
    cond = riadof.check_appendix_c_conditions(3, 1, 3, 3, clamp=False)
    assert not cond["inequality_ok"]
    assert riadof.check_appendix_c_conditions(3, 1, 3, 3)["effective_antennas"] == Fraction(5, 3)
    assert riadof.ratio_r("rtpin", 3, 3, 2, 3) == Fraction(11, 36)


def test_invalid_arguments_raise_value_error():
    with pytest.raises(ValueError):
        riadof.d1_mat(1, 3, 2, 3)
    with pytest.raises(ValueError):
        riadof.d1_best(1, 2, 3)
    with pytest.raises(ValueError):
        riadof.verify("phase-9", 3, 2, 3, 2, trials=1)


def test_verify_reports_pass():
    rep = riadof.verify("phase1-rtpin", 3, 2, 3, 3, trials=10, seed=1)
    assert rep["pass"] is True
    assert rep["pass_count"] == rep["reports"] == 30
    assert rep["failed_seeds"] == []
    assert rep["csit_violations"] == 0


def test_simulate_313():
    rep = riadof.simulate("313", seed=5)
    assert rep["pass"] is True
    assert rep["total_slots"] == 12
    assert sum(rep["recovered"]) == 18
    assert rep["ratio"]["exact"] == "3/2"
    assert rep["ledger_audit"] is True
    assert riadof.chain_plan("323")["total_slots"] == 185
