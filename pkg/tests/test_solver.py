import json
import math

import numpy as np
import pytest

from netcontest.core import ContestGame, EffortProfile, EffectiveEfforts, GameError
from netcontest.design import design_max_effort_equal
from netcontest.repro import (
    MULTI_RHO1,
    case_hub_spoke,
    case_multiple_eq,
    case_star_cycle,
    case_star_line,
    case_two_node,
    multiple_eq_profile,
)
from netcontest.solver import (
    METHOD_INTERIOR,
    EquilibriumReport,
    NewtonError,
    SolverError,
    SupportPair,
    closed_form_payoffs,
    closed_form_totals,
    default_tolerance,
    enumerate_supports,
    equilibrium_partition,
    kkt_residual,
    solve,
    solve_interior,
    solve_support,
)


def _empty(m, c=(1.0, 1.0), gamma=1.0, v=None):
    z = np.zeros((m, m))
    return ContestGame(gamma, c, np.ones(m) if v is None else v, z, z)


@pytest.mark.parametrize("m", [1, 3, 6])
def test_symmetric_tullock_interior(m):
    rep = solve_interior(_empty(m))
    np.testing.assert_allclose(rep.profile.e1, 0.25)
    np.testing.assert_allclose(rep.probs.p1, 0.5)
    assert rep.kkt_residual < 1e-12


def test_max_effort_design_is_interior():
    net = design_max_effort_equal(1, 2, 3)
    rep = solve_interior(net.game(1, 2, 1.0, np.ones(3)))
    np.testing.assert_allclose(rep.profile.e1, 0.25, atol=1e-14)
    np.testing.assert_allclose(rep.profile.e2, 0.125, atol=1e-14)
    np.testing.assert_allclose(rep.probs.p1, 0.5, atol=1e-14)


def test_two_node_interior_below_l1():
    lam, c1, c2 = 0.1, 1.0, 2.0
    rep = solve_interior(case_two_node(c1, c2, lam).game)
    assert rep is not None
    assert rep.profile.e1[0] == pytest.approx((1 - lam) * c2 / (c1 + (1 - lam) * c2) ** 2, abs=1e-14)
    expect = c1 / (c1 + c2) ** 2 - lam * c1 / (c1 + (1 - lam) * c2) ** 2
    assert rep.profile.e2[1] == pytest.approx(expect, abs=1e-14)


def test_interior_declines_corner_game():
    # undirected star: I + rho is regular, the Katz rates give a corner
    g = case_star_line().game.replace(rho2=case_star_cycle(5).game.rho2)
    assert solve_interior(g) is None


def test_interior_singular_raises():
    # the undirected 5-line has eigenvalue -1
    with pytest.raises(np.linalg.LinAlgError):
        solve_interior(case_star_line().game)


def test_star_line_support():
    case = case_star_line()
    rep = solve_support(case.game, SupportPair.one_based([1], [2, 4]))
    assert rep.profile.e1[0] == pytest.approx(41 / 36, abs=1e-13)
    np.testing.assert_allclose(rep.profile.e2[[1, 3]], 41 / 72, atol=1e-13)
    assert rep.mu1[0] == pytest.approx(8 / 41) and rep.mu1[2] == pytest.approx(9 / 41)


def test_star_cycle_support():
    rep = solve_support(case_star_cycle(7).game, SupportPair.one_based([1], range(1, 8)))
    assert rep.profile.e1[0] == pytest.approx(147 / 100, abs=1e-13)
    np.testing.assert_allclose(rep.profile.e2, 21 / 100, atol=1e-13)


def test_hub_spoke_corner_support():
    n, lam = 10, 2.0
    rep = solve_support(case_hub_spoke(n, lam).game, SupportPair.one_based([1], [2]))
    assert rep.profile.e1[0] == pytest.approx((n - 2) / 4 + 2 * lam / (1 + lam) ** 2, abs=1e-12)


def test_wrong_support_rejected():
    assert solve_support(case_star_cycle(7).game, SupportPair.one_based([1], [1, 2])) is None


def test_divergent_support_is_an_error_not_a_rejection():
    with pytest.raises(NewtonError):
        solve_support(case_star_line().game, SupportPair.one_based([1, 2, 3, 4, 5], [1]))


def test_two_node_regime_two():
    lam = 0.6
    rep = solve(case_two_node(1, 2, lam).game)
    assert rep.profile.e2[1] == 0.0
    expect = (1 + math.sqrt(lam)) ** 2 / ((1 + lam) + 2) ** 2
    assert rep.profile.e2[0] == pytest.approx(expect, abs=1e-12)


def test_hub_spoke_examples():
    n = 10
    lam = 0.05
    rep = solve(case_hub_spoke(n, lam).game)
    assert rep.method == METHOD_INTERIOR
    assert rep.profile.e1[0] == pytest.approx(1 / (2 - (n - 1) * lam) ** 2, abs=1e-13)
    lam = 0.113
    rep = solve(case_hub_spoke(n, lam).game)
    assert rep.supports.to_lists()[0] == [k for k in range(1, n + 1) if k != 2]
    assert rep.probs.p1[0] == pytest.approx(1 / (1 + lam), abs=1e-12)


def test_kkt_residual_examples():
    g = _empty(4)
    assert kkt_residual(g, solve(g).profile) < 1e-12
    case = case_star_line()
    prof = EffortProfile(case.value("e1"), case.value("e2"))
    assert kkt_residual(case.game, prof) <= 1e-9
    bumped = prof.with_effort(1, prof.e1 + np.array([0.1, 0, 0, 0, 0]))
    assert kkt_residual(case.game, bumped) >= 0.01


def test_kkt_residual_infinite_when_undefined():
    g = _empty(2, gamma=0.5)
    assert kkt_residual(g, EffortProfile(np.array([1.0, 0.0]), np.array([1.0, 1.0]))) == math.inf


def test_partition_examples():
    both = EffectiveEfforts(np.ones(3), np.ones(3))
    assert equilibrium_partition(both) == (frozenset({0, 1, 2}), frozenset(), frozenset())
    rep = solve(case_multiple_eq().game)
    bplus, a1, a2 = rep.partition
    assert bplus == {0, 1} and a1 == {2} and not a2
    assert solve(case_star_cycle(7).game).partition[0] == frozenset(range(7))
    with pytest.raises(SolverError):
        equilibrium_partition(EffectiveEfforts(np.array([0.0, 1]), np.array([0.0, 1])))


def test_closed_forms():
    g = _empty(1, c=(2.0, 2.0), gamma=0.5)
    rep = solve(g)
    np.testing.assert_allclose(closed_form_totals(rep, g), (0.5 / 8, 0.5 / 8), atol=1e-13)
    g = case_star_cycle(7).game
    rep = solve(g)
    np.testing.assert_allclose(closed_form_totals(rep, g), (147 / 100, 147 / 100), atol=1e-12)
    g = case_multiple_eq().game
    rep = solve(g)
    np.testing.assert_allclose(closed_form_totals(rep, g), (17 / 36, 17 / 36), atol=1e-12)
    np.testing.assert_allclose(closed_form_payoffs(rep, g), (61 / 36, 13 / 36), atol=1e-12)
    np.testing.assert_allclose(rep.payoffs, (61 / 36, 13 / 36), atol=1e-12)


def test_multiplicity_flag():
    assert solve(case_multiple_eq().game).multiplicity
    assert solve(case_star_cycle(9).game).multiplicity
    assert not solve(case_star_cycle(7).game).multiplicity


def test_interchangeability_on_multiple_eq():
    g = case_multiple_eq().game
    found = enumerate_supports(g, default_tolerance(g))
    assert found
    base = solve(g)
    for a in [base] + found:
        for b in [base] + found:
            crossed = EffortProfile(a.profile.e1, b.profile.e2)
            assert kkt_residual(g, crossed) <= 1e-9
    for mu in (0.8, 0.9, 1.0):
        prof, _ = multiple_eq_profile(mu)
        crossed = EffortProfile(prof.e1, base.profile.e2)
        assert kkt_residual(g, crossed) <= 1e-9
        np.testing.assert_allclose(
            (prof.e1 + np.array(MULTI_RHO1).T @ prof.e1)[:2], base.y.y1[:2], atol=1e-12)


def test_env_tolerance(monkeypatch):
    g = _empty(2)
    monkeypatch.setenv("NETCONTEST_TOL", "1e-6")
    assert default_tolerance(g) == 1e-6
    monkeypatch.delenv("NETCONTEST_TOL")
    assert default_tolerance(g) == 1e-9
    assert default_tolerance(_empty(2, gamma=0.5)) == 1e-7


def test_invalid_game_rejected():
    bad = ContestGame(1.0, (1.0, -1.0), np.ones(2), np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(GameError):
        solve(bad)


def test_report_json_round_trip_is_byte_identical():
    rep = solve(case_star_line().game)
    text = rep.to_json()
    again = EquilibriumReport.from_json(text).to_json()
    assert again == text
    data = json.loads(text)
    assert data["support1"] == [1] and data["support2"] == [2, 4]
    assert data["total_efforts"] == pytest.approx([41 / 36, 41 / 36], abs=1e-12)
