"""Contests where players pick spillover links (weights in [0, 1]) along with efforts.

With free links each player builds an out-star of weight 1 from a hub and puts
all effort there, so every battlefield sees the player's whole effort.  The
game then collapses to a single contest over the summed prize.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import ContestGame, EffortProfile, GameError, VerificationReport, effective_efforts, payoff, payoffs
from .oracle import best_response

RHO_BOUND = 1.0
ACCESS_TOL = 1e-12
PAYOFF_TOL = 1e-12
BR_PAYOFF_TOL = 1e-6
GRID_STEPS = (0.1, 0.01)


@dataclass(frozen=True)
class EndogenousProfile:
    e1: np.ndarray
    e2: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray
    hub1: int
    hub2: int

    def __post_init__(self):
        for name in ("e1", "e2", "rho1", "rho2"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for rho in (self.rho1, self.rho2):
            if np.any(rho < 0) or np.any(rho > RHO_BOUND) or np.any(np.diag(rho) != 0):
                raise GameError("link weights must lie in [0, 1] with zero diagonal")

    def game(self, values, c1, c2, gamma) -> ContestGame:
        return ContestGame(gamma, (c1, c2), values, self.rho1, self.rho2)

    @property
    def efforts(self) -> EffortProfile:
        return EffortProfile(self.e1, self.e2)

    def to_dict(self) -> dict:
        return {
            "rho_bounds": RHO_BOUND,
            "rho1": self.rho1.tolist(),
            "rho2": self.rho2.tolist(),
            "e1": self.e1.tolist(),
            "e2": self.e2.tolist(),
            "hub1": self.hub1,
            "hub2": self.hub2,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def aggregate_contest(c1: float, c2: float, gamma: float, V: float) -> tuple[float, float, float, float]:
    """Equilibrium of one Tullock contest over prize ``V``: ``(E1, E2, p1, p2)``."""
    a1, a2 = c1**gamma, c2**gamma
    p1 = a2 / (a1 + a2)
    p2 = a1 / (a1 + a2)
    q = p1 * p2 * V
    return gamma / c1 * q, gamma / c2 * q, p1, p2


def closed_form_payoffs(c1: float, c2: float, gamma: float, V: float) -> tuple[float, float]:
    a1, a2 = c1**gamma, c2**gamma
    s = a1 + a2
    cross = gamma * a1 * a2 / s**2
    return (a2 / s - cross) * V, (a1 / s - cross) * V


def out_star(m: int, hub: int, weight: float = RHO_BOUND) -> np.ndarray:
    rho = np.zeros((m, m))
    rho[hub, :] = weight
    rho[hub, hub] = 0.0
    return rho


def endogenous_equilibrium(values, c1: float, c2: float, gamma: float, hub1: int, hub2: int) -> EndogenousProfile:
    """Out-star networks with all effort at the hubs.  Hubs are 1-based."""
    values = np.asarray(values, dtype=float)
    m = values.shape[0]
    for h in (hub1, hub2):
        if not 1 <= h <= m:
            raise GameError(f"hub {h} outside 1..{m}")
    E1, E2, _, _ = aggregate_contest(c1, c2, gamma, float(values.sum()))
    e1 = np.zeros(m)
    e2 = np.zeros(m)
    e1[hub1 - 1] = E1
    e2[hub2 - 1] = E2
    return EndogenousProfile(e1, e2, out_star(m, hub1 - 1), out_star(m, hub2 - 1), hub1, hub2)


def _link_and_effort_deviations(game, prof, player, base):
    """Largest payoff gain over single-coordinate link and effort moves."""
    rho = np.array(game.rho(player))
    e = np.array(prof.effort(player))
    other = prof.effort(3 - player)
    y_other = effective_efforts(game, prof).of(3 - player)
    m = game.m
    best = -np.inf
    for k in range(m):
        for l in range(m):
            if k == l:
                continue
            for step in GRID_STEPS:
                for w in (rho[k, l] + step, rho[k, l] - step):
                    if not 0 <= w <= RHO_BOUND:
                        continue
                    r = rho.copy()
                    r[k, l] = w
                    g = game.replace(**{f"rho{player}": r})
                    best = max(best, payoff(g, player, e, y_other) - base)
    scale = max(float(e.sum()), float(other.sum()), 1e-12)
    for k in range(m):
        for step in GRID_STEPS:
            for x in (e[k] + step * scale, e[k] - step * scale):
                if x < 0:
                    continue
                d = e.copy()
                d[k] = x
                best = max(best, payoff(game, player, d, y_other) - base)
    return best


def verify_endogenous(profile: EndogenousProfile, values, c1: float, c2: float, gamma: float) -> VerificationReport:
    values = np.asarray(values, dtype=float)
    game = profile.game(values, c1, c2, gamma)
    prof = profile.efforts
    y = effective_efforts(game, prof)
    V = float(values.sum())
    E = aggregate_contest(c1, c2, gamma, V)[:2]
    out = VerificationReport()

    gaps = []
    for i in (1, 2):
        total = float(prof.effort(i).sum())
        gaps.append(np.abs(y.of(i) - total))
    bad = [f"player {i + 1} battlefield {int(k) + 1}" for i, g in enumerate(gaps)
           for k in np.flatnonzero(g > ACCESS_TOL)]
    out.record("universal_access", not bad, "; ".join(bad) or "every battlefield sees the full effort")

    agg_gap = max(abs(float(prof.effort(i).sum()) - E[i - 1]) for i in (1, 2))
    out.record("aggregate_effort", agg_gap <= ACCESS_TOL, f"max |sum e_i - E_i| = {agg_gap:.3e}")

    pay = payoffs(game, prof)
    gains = []
    for i in (1, 2):
        cap = V / game.cost(i)
        br = best_response(game, i, prof.effort(3 - i), (1e-12, cap), x0=np.maximum(prof.effort(i), 1e-12))
        y_other = y.of(3 - i)
        gains.append(payoff(game, i, br, y_other) - pay[i - 1])
    out.record("effort_best_response", max(gains) <= BR_PAYOFF_TOL,
               f"best-response gains {gains[0]:.3e}, {gains[1]:.3e}")

    grid = [_link_and_effort_deviations(game, prof, i, pay[i - 1]) for i in (1, 2)]
    out.record("grid_deviations", max(grid) <= PAYOFF_TOL,
               f"largest single-coordinate gains {grid[0]:.3e}, {grid[1]:.3e}")

    closed = closed_form_payoffs(c1, c2, gamma, V)
    pgap = max(abs(a - b) for a, b in zip(pay, closed))
    out.record("closed_form_payoff", pgap <= PAYOFF_TOL, f"max payoff gap {pgap:.3e}")
    return out
