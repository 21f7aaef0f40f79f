"""Property suites over random games (m <= 6, gamma in {0.5, 0.8, 1})."""

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from netcontest.core import (
    EffortProfile,
    effective_efforts,
    payoff,
    payoff_gradient,
    payoffs,
    rcond,
    win_probabilities,
)
from netcontest.design import design_max_effort_general, verify_design
from netcontest.endogenous import endogenous_equilibrium, verify_endogenous
from netcontest.solver import closed_form_payoffs, closed_form_totals, solve

from conftest import games, games_with_profiles

scales = st.floats(0.25, 4.0, allow_nan=False, allow_infinity=False)


def _close(a, b, tol):
    return np.allclose(np.asarray(a, float), np.asarray(b, float), rtol=0, atol=tol)


@given(games_with_profiles())
def test_probabilities_sum_to_one(gp):
    game, prof = gp
    pr = win_probabilities(game, effective_efforts(game, prof))
    assert np.all(np.abs(pr.p1 + pr.p2 - 1) <= 1e-12)
    assert np.all((pr.p1 >= 0) & (pr.p1 <= 1))


@given(games_with_profiles())
def test_constant_sum_identity(gp):
    game, prof = gp
    p1, p2 = payoffs(game, prof)
    c1, c2 = game.costs
    lhs = p1 + p2 + c1 * prof.e1.sum() + c2 * prof.e2.sum()
    assert abs(lhs - game.values.sum()) <= 1e-10


@given(games_with_profiles(), st.integers(0, 2**32 - 1))
def test_effective_efforts_linear(gp, seed):
    game, prof = gp
    rng = np.random.default_rng(seed)
    other = EffortProfile(rng.uniform(0, 2, game.m), rng.uniform(0, 2, game.m))
    both = EffortProfile(prof.e1 + other.e1, prof.e2 + other.e2)
    a, b, ab = (effective_efforts(game, p) for p in (prof, other, both))
    assert _close(ab.y1, a.y1 + b.y1, 1e-12) and _close(ab.y2, a.y2 + b.y2, 1e-12)


@given(games_with_profiles(), st.sampled_from([1, 2]))
def test_gradient_matches_finite_differences(gp, player):
    game, prof = gp
    grad = payoff_gradient(game, prof, player)
    own = prof.effort(player)
    y_other = effective_efforts(game, prof).of(3 - player)
    h = 1e-5
    for k in range(game.m):
        up, dn = own.copy(), own.copy()
        up[k] += h
        dn[k] -= h
        fd = (payoff(game, player, up, y_other) - payoff(game, player, dn, y_other)) / (2 * h)
        # relative to the cost, the natural scale of each gradient term
        assert abs(fd - grad[k]) <= 1e-6 * max(abs(grad[k]), game.cost(player))


@given(games())
def test_closed_form_totals_and_payoffs(game):
    rep = solve(game)
    assert _close(closed_form_totals(rep, game), rep.total_efforts, 1e-9)
    assert _close(closed_form_payoffs(rep, game), rep.payoffs, 1e-9)


@given(games())
def test_ratio_identity_on_contested(game):
    rep = solve(game)
    ks = sorted(rep.partition[0])
    assume(ks)
    c1, c2 = game.costs
    lhs = rep.probs.p1[ks] / rep.probs.p2[ks]
    rhs = (rep.mu2[ks] * c2 / (rep.mu1[ks] * c1)) ** game.gamma
    assert np.allclose(lhs, rhs, rtol=1e-8, atol=0)


@given(games(), scales)
def test_value_homogeneity(game, s):
    a = solve(game)
    b = solve(game.replace(values=s * game.values))
    assert _close(a.probs.p1, b.probs.p1, 1e-8)
    assert _close(s * np.array(a.total_efforts), b.total_efforts, 1e-8 * s)
    assert _close(s * np.array(a.payoffs), b.payoffs, 1e-8 * s)
    if not (a.multiplicity or b.multiplicity):
        assert a.supports == b.supports
        assert _close(s * a.profile.e1, b.profile.e1, 1e-8 * s)
        assert _close(s * a.profile.e2, b.profile.e2, 1e-8 * s)


@given(games(), scales)
def test_cost_scaling(game, s):
    a = solve(game)
    b = solve(game.replace(costs=tuple(s * c for c in game.costs)))
    assert _close(a.probs.p1, b.probs.p1, 1e-8)
    assert _close(np.array(a.total_efforts) / s, b.total_efforts, 1e-8 / s)
    if not (a.multiplicity or b.multiplicity):
        assert _close(a.profile.e1 / s, b.profile.e1, 1e-8 / s)


@given(games(gammas=(0.5, 0.8, 0.9)))
def test_concave_exponent_contests_everywhere(game):
    rep = solve(game)
    assert rep.partition[0] == frozenset(range(game.m))


@given(games())
def test_equal_networks_are_neutral(game):
    shared = game.replace(rho2=game.rho1)
    assume(rcond(np.eye(game.m) + game.rho1) > 1e-8)
    empty = game.replace(rho1=0 * game.rho1, rho2=0 * game.rho1)
    a, b = solve(shared), solve(empty)
    assert _close(a.probs.p1, b.probs.p1, 1e-8)
    assert _close(a.total_efforts, b.total_efforts, 1e-8)
    assert _close(a.payoffs, b.payoffs, 1e-8)


@given(games())
def test_total_effort_bound(game):
    rep = solve(game)
    vsum = game.values.sum()
    for i, total in enumerate(rep.total_efforts):
        bound = game.gamma * vsum / (4 * game.costs[i])
        assert total <= bound + 1e-9
        if np.allclose(rep.probs.p1, 0.5, atol=1e-9):
            assert abs(total - bound) <= 1e-8


@given(games())
def test_welfare_identity(game):
    rep = solve(game)
    q = rep.probs.p1 * rep.probs.p2 * game.values
    welfare = sum(rep.payoffs)
    assert abs(welfare - np.sum((1 - 2 * game.gamma * rep.probs.p1 * rep.probs.p2) * game.values)) <= 1e-9
    c1, c2 = game.costs
    assert abs(2 * game.gamma * q.sum() - 2 * c1 * c2 / (c1 + c2) * sum(rep.total_efforts)) <= 1e-9


@st.composite
def general_design_inputs(draw):
    # pairs only: every pair branch plus the triple's first shape
    m = draw(st.integers(2, 6))
    values = np.array(sorted(draw(st.floats(0.5, 3.0)) for _ in range(m)))
    c2 = draw(st.floats(1.0, 3.0))
    if m % 2:
        a, b, c = values[-3:]
        assume(c2 < (c + b + a) / (c + b - a))
    return values, c2, draw(st.sampled_from((0.5, 0.8, 1.0)))


@given(general_design_inputs())
def test_general_design_proportional_rates(args):
    values, c2, gamma = args
    net = design_max_effort_general(1.0, c2, values)
    rep = verify_design(net, 1.0, c2, gamma, values)
    assert rep.checks["rates_proportional"][0], rep.failures
    assert rep.ok, rep.failures


@given(st.integers(1, 6), scales, scales, st.sampled_from((0.5, 0.8, 1.0)), st.data())
def test_endogenous_profiles_verify(m, c1, c2, gamma, data):
    values = np.array(data.draw(st.lists(st.floats(0.5, 2.0), min_size=m, max_size=m)))
    h1 = data.draw(st.integers(1, m))
    h2 = data.draw(st.integers(1, m))
    prof = endogenous_equilibrium(values, c1, c2, gamma, h1, h2)
    rep = verify_endogenous(prof, values, c1, c2, gamma)
    assert rep.ok, rep.failures
