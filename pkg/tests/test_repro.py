import json
import math
from fractions import Fraction

import numpy as np
import pytest

from netcontest.repro import (
    case_by_id,
    case_hub_spoke,
    case_multiple_eq,
    case_star_cycle,
    case_star_line,
    case_two_node,
    default_corpus,
    hub_spoke_cubic,
    hub_spoke_l2_trig,
    hub_spoke_thresholds,
    multiple_eq_profile,
    run_all,
    two_node_thresholds,
)
from netcontest.solver import kkt_residual


def test_every_case_is_self_consistent():
    for case in default_corpus():
        assert case.self_check() == [], case.id


def test_two_node_thresholds():
    l1, l2 = two_node_thresholds(1, 2)
    assert l2 == 9
    assert l1 == pytest.approx(3 * (7 - math.sqrt(33)) / 8, abs=1e-15)


def test_two_node_no_spillover():
    case = case_two_node(1, 2, 0.0)
    assert case.expected["e1"] == (Fraction(2, 9), Fraction(2, 9))
    assert case.expected["e2"] == (Fraction(1, 9), Fraction(1, 9))


def test_two_node_regimes_selected():
    assert [case_two_node(1, 2, lam).regime_info["regime"] for lam in (0.2, 0.6, 9, 12)] == [1, 2, 3, 3]


def test_two_node_boundary_regimes_agree():
    l1, l2 = two_node_thresholds(1, 2)
    for lam in (l1, l2):
        info = case_two_node(1, 2, lam).regime_info
        assert info["boundary"] and info["boundary_gap"] < 1e-12


def test_star_cycle_examples():
    c7 = case_star_cycle(7)
    np.testing.assert_allclose(c7.value("p1"), 0.7)
    np.testing.assert_allclose(c7.value("e2"), 21 / 100)
    assert case_star_cycle(4).expected["payoff_ratio"] == Fraction(16, 9)
    assert case_star_cycle(10).expected["totals"] == (Fraction(300, 169),) * 2
    assert case_star_cycle(6).multiplicity_expected
    with pytest.raises(ValueError):
        case_star_cycle(3)


def test_star_line_examples():
    case = case_star_line()
    assert case.expected["e2"][1] == Fraction(41, 72)
    assert case.expected["payoff_ratio"] == Fraction(73, 25)
    assert case.expected["payoffs"][0] / case.expected["payoffs"][1] == Fraction(73, 25)
    assert case.expected["totals"] == (Fraction(41, 36),) * 2


def test_hub_spoke_thresholds():
    l1, l2 = hub_spoke_thresholds(10)
    assert l1 == 0.1
    assert l2 == pytest.approx(0.114453, abs=1e-6)
    assert l2 == pytest.approx(hub_spoke_l2_trig(10), abs=1e-13)
    assert abs(hub_spoke_cubic(l2, 10)) < 1e-13


@pytest.mark.parametrize("n", [4, 7, 12, 30])
def test_hub_spoke_trig_form_other_n(n):
    assert hub_spoke_thresholds(n)[1] == pytest.approx(hub_spoke_l2_trig(n), abs=1e-12)


def test_hub_spoke_regime_three():
    lam = 0.5
    case = case_hub_spoke(10, lam)
    assert case.value("p1")[0] == pytest.approx(1 / (1 + lam))
    np.testing.assert_allclose(case.value("p1")[2:], 0.5)


def test_hub_spoke_regime_one_spoke():
    case = case_hub_spoke(10, 0.05)
    assert case.value("e1")[1] == pytest.approx(0.5 / 1.55**2, abs=1e-15)


def test_hub_spoke_boundary():
    info = case_hub_spoke(10, 0.1).regime_info
    assert info["boundary"] and info["boundary_gap"] < 1e-12


def test_multiple_eq_member_values():
    case = case_multiple_eq(1)
    assert case.expected["e1"][0] == Fraction(14, 45)
    assert case.expected["e1"][2] == Fraction(1, 15)
    for mu in (Fraction(4, 5), Fraction(9, 10), Fraction(1), Fraction(3, 2)):
        c = case_multiple_eq(mu)
        assert c.expected["totals"] == (Fraction(17, 36),) * 2
        assert c.expected["payoffs"] == (Fraction(61, 36), Fraction(13, 36))


def test_multiple_eq_range_and_validity():
    with pytest.raises(ValueError):
        case_multiple_eq(Fraction(3, 4))
    with pytest.raises(ValueError):
        case_multiple_eq(5)
    # inside the stated interval but above 1 the family stops being an equilibrium
    c = case_multiple_eq(2)
    assert not c.regime_info["is_equilibrium"]
    assert kkt_residual(c.game, c.extra_profiles[0]) <= 1e-9
    assert kkt_residual(c.game, multiple_eq_profile(2)[0]) > 0.5


def test_corpus_passes():
    rep = run_all(1e-9)
    assert rep.passed, [(r.case, r.quantity, r.diff) for r in rep.failures()]
    assert rep.seconds < 5


def test_zero_tolerance_flags_rounding():
    rep = run_all(0.0, cases=case_by_id("hub_spoke"))
    assert not rep.passed


def test_case_lookup_and_json():
    assert len(case_by_id("two_node")) == 6
    with pytest.raises(KeyError):
        case_by_id("nope")
    data = json.loads(run_all(1e-9, cases=case_by_id("star_line")).to_json())
    assert data["passed"] and data["rows"][0]["quantity"] == "self-consistency"
