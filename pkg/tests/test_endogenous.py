import numpy as np
import pytest

from netcontest.core import EffortProfile, GameError, effective_efforts, payoffs
from netcontest.endogenous import (
    EndogenousProfile,
    aggregate_contest,
    closed_form_payoffs,
    endogenous_equilibrium,
    out_star,
    verify_endogenous,
)


def test_aggregate_symmetric():
    E1, E2, p1, p2 = aggregate_contest(2.0, 2.0, 1.0, 8.0)
    assert (p1, p2) == (0.5, 0.5)
    assert E1 == E2 == pytest.approx(1.0)


def test_aggregate_asymmetric():
    E1, E2, p1, _ = aggregate_contest(1.0, 2.0, 1.0, 10.0)
    assert p1 == pytest.approx(2 / 3)
    assert E1 == pytest.approx(20 / 9)
    assert E2 == pytest.approx(10 / 9)


def test_aggregate_concave_exponent():
    E1, E2, _, _ = aggregate_contest(1.0, 1.0, 0.5, 1.0)
    assert E1 == E2 == pytest.approx(1 / 8)


def test_out_star_profile_m8():
    prof = endogenous_equilibrium(np.ones(8), 1.0, 1.0, 1.0, 3, 6)
    assert prof.rho1[2].sum() == 7 and prof.rho2[5].sum() == 7
    assert prof.e1[2] == pytest.approx(2.0) and prof.e1.sum() == prof.e1[2]
    rep = verify_endogenous(prof, np.ones(8), 1.0, 1.0, 1.0)
    assert rep.ok, rep.failures
    assert rep.checks["universal_access"][0]


def test_single_battlefield():
    prof = endogenous_equilibrium(np.ones(1), 1.0, 2.0, 1.0, 1, 1)
    assert not prof.rho1.any()
    assert verify_endogenous(prof, np.ones(1), 1.0, 2.0, 1.0).ok


def test_hub_effort_unequal_values():
    prof = endogenous_equilibrium(np.array([1.0, 2.0, 3.0]), 1.0, 1.0, 1.0, 1, 2)
    assert prof.e1[0] == pytest.approx(1.5)
    assert prof.e2[1] == pytest.approx(1.5)


def test_symmetric_payoff_quarter():
    V = 6.0
    assert closed_form_payoffs(1.0, 1.0, 1.0, V) == pytest.approx((V / 4, V / 4))


def test_lowered_link_breaks_access():
    prof = endogenous_equilibrium(np.ones(4), 1.0, 1.0, 1.0, 1, 1)
    rho = np.array(prof.rho1)
    rho[0, 2] = 0.9
    bad = EndogenousProfile(prof.e1, prof.e2, rho, prof.rho2, 1, 1)
    rep = verify_endogenous(bad, np.ones(4), 1.0, 1.0, 1.0)
    passed, detail = rep.checks["universal_access"]
    assert not passed
    assert "player 1 battlefield 3" in detail


def test_invalid_hub_and_weights():
    with pytest.raises(GameError):
        endogenous_equilibrium(np.ones(3), 1, 1, 1, 0, 1)
    with pytest.raises(GameError):
        EndogenousProfile(np.ones(2), np.ones(2), np.array([[0, 1.5], [0, 0]]), np.zeros((2, 2)), 1, 1)


def test_hub_choice_and_spread_do_not_matter():
    v = np.array([1.0, 2.0, 0.5, 1.5])
    a = endogenous_equilibrium(v, 1.0, 2.0, 0.8, 1, 4)
    b = endogenous_equilibrium(v, 1.0, 2.0, 0.8, 3, 2)
    ga, gb = a.game(v, 1.0, 2.0, 0.8), b.game(v, 1.0, 2.0, 0.8)
    ya, yb = effective_efforts(ga, a.efforts), effective_efforts(gb, b.efforts)
    np.testing.assert_allclose(ya.y1, yb.y1, atol=1e-14)
    np.testing.assert_allclose(payoffs(ga, a.efforts), payoffs(gb, b.efforts), atol=1e-14)
    # complete unit networks: any split of the same total gives full access
    full = np.ones((4, 4)) - np.eye(4)
    gc = ga.replace(rho1=full, rho2=full)
    split = EffortProfile(np.full(4, a.e1.sum() / 4), np.array([0.0, 0.5, 0.5, 0.0]) * a.e2.sum())
    yc = effective_efforts(gc, split)
    np.testing.assert_allclose(yc.y1, ya.y1, atol=1e-14)
    np.testing.assert_allclose(yc.y2, ya.y2, atol=1e-14)


def test_profile_json():
    prof = endogenous_equilibrium(np.ones(3), 1.0, 1.0, 1.0, 2, 2)
    d = prof.to_dict()
    assert d["rho_bounds"] == 1.0
    assert d["hub1"] == 2
    assert np.array_equal(out_star(3, 1), np.array(d["rho1"]))
