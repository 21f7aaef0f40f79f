import os

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from netcontest.core import ContestGame, EffortProfile

settings.register_profile(
    "ci", max_examples=200, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile(
    "thorough", max_examples=1000, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

GAMMAS = (0.5, 0.8, 1.0)


def random_game(rng, m=None, gamma=None, density=0.4, max_weight=1.5):
    """Sparse random networks; used where hypothesis shrinking is not needed."""
    m = m or int(rng.integers(1, 7))
    gamma = gamma or float(rng.choice(GAMMAS))
    rhos = []
    for _ in range(2):
        r = np.where(rng.random((m, m)) < density, rng.uniform(0, max_weight, (m, m)), 0.0)
        np.fill_diagonal(r, 0.0)
        rhos.append(r)
    return ContestGame(gamma, tuple(rng.uniform(0.5, 2, 2)), rng.uniform(0.5, 2, m), *rhos)


_pos = st.floats(0.5, 2.0, allow_nan=False, allow_infinity=False)
_weight = st.one_of(st.just(0.0), st.floats(0.0, 1.5, allow_nan=False, allow_infinity=False))


def _network(draw, m):
    r = np.array([[draw(_weight) for _ in range(m)] for _ in range(m)])
    np.fill_diagonal(r, 0.0)
    return r


@st.composite
def games(draw, max_m=6, gammas=GAMMAS):
    m = draw(st.integers(1, max_m))
    gamma = draw(st.sampled_from(gammas))
    costs = (draw(_pos), draw(_pos))
    values = np.array([draw(_pos) for _ in range(m)])
    return ContestGame(gamma, costs, values, _network(draw, m), _network(draw, m))


@st.composite
def games_with_profiles(draw, max_m=6):
    game = draw(games(max_m=max_m))
    eff = st.floats(0.01, 3.0, allow_nan=False, allow_infinity=False)
    e1 = np.array([draw(eff) for _ in range(game.m)])
    e2 = np.array([draw(eff) for _ in range(game.m)])
    return game, EffortProfile(e1, e2)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
