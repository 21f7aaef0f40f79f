"""Best-response dynamics on the truncated game, used as an independent check.

Each player's efforts are restricted to ``[eps, M_i]`` per battlefield; the
payoff is then smooth and concave in own efforts, so a best response is a
box-constrained concave maximisation solved by projected gradient ascent.
Alternating best responses are run for a decreasing sequence of ``eps``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .core import ContestGame, EffortProfile, effective_efforts, marginal_prize, payoffs, win_probabilities

DEFAULT_EPSILONS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
BR_TOL = 1e-10
MOVE_TOL = 1e-8


class OracleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TruncationSchedule:
    epsilon_sequence: tuple
    effort_cap: tuple

    def __post_init__(self):
        eps = tuple(float(x) for x in self.epsilon_sequence)
        if not eps or any(x <= 0 for x in eps):
            raise ValueError("epsilon values must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilon values must be strictly decreasing")
        cap = tuple(float(x) for x in self.effort_cap)
        if len(cap) != 2 or eps[0] >= min(cap):
            raise ValueError("effort cap must exceed every epsilon")
        object.__setattr__(self, "epsilon_sequence", eps)
        object.__setattr__(self, "effort_cap", cap)

    @classmethod
    def default(cls, game: ContestGame, epsilons=DEFAULT_EPSILONS) -> "TruncationSchedule":
        total = float(game.values.sum())
        return cls(tuple(epsilons), (total / game.costs[0], total / game.costs[1]))


def _own_y(game, player, e):
    return e + game.rho(player).T @ e


def _value(game, player, e, y_other):
    y_own = _own_y(game, player, e)
    g = game.gamma
    a = y_own**g
    b = np.maximum(y_other, 0.0) ** g
    s = a + b
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(s > 0, a / np.where(s > 0, s, 1.0), 0.5)
    return float(game.values @ p - game.cost(player) * e.sum())


def _gradient(game, player, e, y_other):
    d = marginal_prize(game.gamma, game.values, _own_y(game, player, e), y_other)
    return d + game.rho(player) @ d - game.cost(player)


def _curvature(gamma, v, y_own, y_other):
    """Second derivative of ``v p_own`` in ``y_own`` (non-positive for gamma <= 1)."""
    a = y_own**gamma
    b = np.maximum(y_other, 0.0) ** gamma
    s = a + b
    return v * gamma * b * y_own ** (gamma - 2) * ((gamma - 1) * s - 2 * gamma * a) / s**3


def best_response(game: ContestGame, player: int, opponent_efforts, box, x0=None,
                  tol: float = BR_TOL, maxiter: int = 500) -> np.ndarray:
    """Maximiser of the player's payoff over the box ``[lo, hi]^m``.

    Projected gradient ascent where the step on free coordinates is scaled by
    the inverse Hessian (projected Newton), with Armijo backtracking along the
    projection arc.  Stops when ``|x - clip(x + grad)|_inf <= tol``.
    """
    lo, hi = (float(b) for b in box)
    if lo <= 0:
        raise OracleError("lower bound of the box must be positive")
    other = 3 - player
    y_other = _own_y(game, other, np.asarray(opponent_efforts, dtype=float))
    a = np.eye(game.m) + game.rho(player)
    x = np.clip(np.full(game.m, max(lo, 1e-3 * hi)) if x0 is None else np.asarray(x0, dtype=float), lo, hi)
    f = _value(game, player, x, y_other)
    for _ in range(maxiter):
        g = _gradient(game, player, x, y_other)
        if np.max(np.abs(x - np.clip(x + g, lo, hi))) <= tol:
            break
        # coordinates held at a bound this iteration
        band = min(1e-3, float(np.max(np.abs(x - np.clip(x + g, lo, hi)))))
        held = ((x <= lo + band) & (g < 0)) | ((x >= hi - band) & (g > 0))
        free = ~held
        d = g.copy()
        if free.any():
            h = _curvature(game.gamma, game.values, x @ a, y_other)
            af = a[free]
            neg_h = -(af * h) @ af.T
            neg_h += 1e-14 * max(1.0, float(np.max(np.abs(neg_h)))) * np.eye(neg_h.shape[0])
            try:
                d[free] = np.linalg.solve(neg_h, g[free])
            except np.linalg.LinAlgError:
                pass
            if g[free] @ d[free] <= 0:
                d[free] = g[free]
        t = 1.0
        # near the optimum the gain drops below the rounding of f itself
        slack = 8 * np.finfo(float).eps * max(1.0, abs(f))
        while True:
            xn = np.clip(x + t * d, lo, hi)
            fn = _value(game, player, xn, y_other)
            if np.isfinite(fn) and fn >= f + 1e-4 * (g @ (xn - x)) - slack:
                break
            t *= 0.5
            if t < 1e-20:
                if np.array_equal(d, g):
                    return x
                d, t = g, 1.0
        x, f = xn, fn
    return x


@dataclass
class OracleRun:
    profile: EffortProfile
    movements: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    converged: bool = False
    rounds: int = 0

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["round", "epsilon", "movement", "total1", "total2"])
        for row in self.trace:
            w.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3]), repr(row[4])])
        return buf.getvalue()


def br_dynamics(game: ContestGame, schedule: TruncationSchedule | None = None,
                max_rounds: int = 2000, start: EffortProfile | None = None) -> OracleRun:
    """Alternating (Gauss-Seidel) best responses, warm-started across eps levels.

    A best response may be blended with the current strategy when the
    dynamics overshoot; by concavity the blend still weakly improves the
    mover's payoff.  ``movement`` is the distance to the undamped best
    response, so convergence means a fixed point of the best-response map.
    """
    schedule = schedule or TruncationSchedule.default(game)
    m = game.m
    caps = schedule.effort_cap
    if start is None:
        share = float(game.values.sum()) / (4 * m)
        e = [np.full(m, share / game.costs[0]), np.full(m, share / game.costs[1])]
    else:
        e = [np.array(start.e1, float), np.array(start.e2, float)]
    run = OracleRun(EffortProfile(*e))
    rounds = 0
    eps_list = schedule.epsilon_sequence
    for level, eps in enumerate(eps_list):
        last = level == len(eps_list) - 1
        target = MOVE_TOL if last else max(MOVE_TOL, eps * 1e-2)
        e = [np.clip(e[0], eps, caps[0]), np.clip(e[1], eps, caps[1])]
        alpha = 1.0
        prev = math.inf
        converged = False
        for _ in range(max_rounds):
            move = 0.0
            for i in (1, 2):
                br = best_response(game, i, e[2 - i], (eps, caps[i - 1]), x0=e[i - 1])
                move = max(move, float(np.max(np.abs(br - e[i - 1]))))
                e[i - 1] = e[i - 1] + alpha * (br - e[i - 1])
            rounds += 1
            run.movements.append(move)
            run.trace.append((rounds, eps, move, float(e[0].sum()), float(e[1].sum())))
            if move < target:
                converged = True
                break
            if move > 0.9 * prev:
                alpha = max(0.05, alpha * 0.5)
            prev = move
        if last:
            run.converged = converged
    run.profile = EffortProfile(e[0], e[1])
    run.rounds = rounds
    return run


@dataclass
class AgreementReport:
    verdict: str
    differences: dict
    oracle_totals: tuple
    oracle_payoffs: tuple
    oracle_converged: bool
    tol: float

    @property
    def agree(self) -> bool:
        return self.verdict == "agree"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "tol": self.tol,
            "differences": self.differences,
            "oracle_totals": list(self.oracle_totals),
            "oracle_payoffs": list(self.oracle_payoffs),
            "oracle_converged": self.oracle_converged,
        }


def cross_validate(game: ContestGame, report, tol: float = 1e-4, run: OracleRun | None = None) -> AgreementReport:
    """Compare outcome statistics that are unique across equilibria.

    Totals, win probabilities, payoffs and effective efforts on contested
    battlefields are compared; per-battlefield real efforts are not.
    """
    run = run or br_dynamics(game)
    prof = run.profile
    y = effective_efforts(game, prof)
    pr = win_probabilities(game, y)
    pay = payoffs(game, prof)
    contested = sorted(report.partition[0])
    diffs = {
        "totals": max(abs(a - b) for a, b in zip(prof.totals, report.total_efforts)),
        "probabilities": float(np.max(np.abs(pr.p1 - report.probs.p1))),
        "payoffs": max(abs(a - b) for a, b in zip(pay, report.payoffs)),
        "contested_effective": float(max(
            np.max(np.abs(y.y1[contested] - report.y.y1[contested]), initial=0.0),
            np.max(np.abs(y.y2[contested] - report.y.y2[contested]), initial=0.0))),
    }
    if not run.converged:
        verdict = "inconclusive"
    else:
        verdict = "agree" if all(d <= tol for d in diffs.values()) else "disagree"
    return AgreementReport(verdict, diffs, prof.totals, pay, run.converged, tol)
