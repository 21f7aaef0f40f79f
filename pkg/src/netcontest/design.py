"""Spillover networks that maximise total effort or welfare, and their checks.

Effort is maximal when every battlefield is won with probability 1/2, which
happens exactly when ``mu_2 = (c1/c2) mu_1``; each constructor below picks
networks with that property (or, for welfare, pushes the probabilities apart).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ContestGame, GameError, VerificationReport
from .solver import solve

MAX_EFFORT_EQUAL = "max-effort-equal"
MAX_EFFORT_GENERAL = "max-effort-general"
MAX_WELFARE = "max-welfare"

DESIGN_TOL = 1e-8
ONE_SIDED_FACTOR = 1.5
BISECT_WIDTH = 1e-12


@dataclass(frozen=True)
class DesignedNetworks:
    rho1: np.ndarray
    rho2: np.ndarray
    parameters: dict
    handicap: float
    target: str
    notes: tuple = field(default=())

    def game(self, c1: float, c2: float, gamma: float, values) -> ContestGame:
        return ContestGame(gamma, (c1, c2), values, self.rho1, self.rho2)

    def to_dict(self) -> dict:
        return {
            "rho1": np.asarray(self.rho1).tolist(),
            "rho2": np.asarray(self.rho2).tolist(),
            "design": {
                "target": self.target,
                "handicap": self.handicap,
                "parameters": self.parameters,
                "notes": list(self.notes),
            },
        }


def handicap(rho1, rho2) -> float:
    """Total extra spillover weight given to player 2."""
    rho1, rho2 = np.asarray(rho1, dtype=float), np.asarray(rho2, dtype=float)
    if rho1.shape != rho2.shape:
        raise GameError(f"network shapes differ: {rho1.shape} vs {rho2.shape}")
    return float(np.sum(rho2 - rho1))


def complete_network(m: int, weight: float) -> np.ndarray:
    rho = np.full((m, m), float(weight))
    np.fill_diagonal(rho, 0.0)
    return rho


def _check_costs(c1, c2):
    if not (c1 > 0 and c2 > 0):
        raise GameError("costs must be positive")
    if c2 < c1:
        raise GameError(f"c2={c2} < c1={c1}: relabel the players so that player 2 has the higher cost")


def _equal_value(v, m) -> float:
    vals = np.broadcast_to(np.asarray(v, dtype=float), (m,))
    if not np.all(vals == vals[0]):
        raise GameError("values differ across battlefields; use design_max_effort_general")
    if vals[0] <= 0:
        raise GameError("values must be positive")
    return float(vals[0])


def design_max_effort_equal(c1: float, c2: float, m: int, v=1.0, lambda1: float = 0.0) -> DesignedNetworks:
    """Complete networks equalising win probabilities when all prizes are equal."""
    _check_costs(c1, c2)
    if m < 2:
        raise GameError("need at least two battlefields")
    _equal_value(v, m)
    if lambda1 < 0:
        raise GameError("lambda1 must be non-negative")
    lambda2 = (c2 / c1) * lambda1 + (c2 - c1) / ((m - 1) * c1)
    rho1 = complete_network(m, lambda1)
    rho2 = complete_network(m, lambda2)
    return DesignedNetworks(rho1, rho2, {"lambda1": float(lambda1), "lambda2": float(lambda2)},
                            handicap(rho1, rho2), MAX_EFFORT_EQUAL)


# ---------------------------------------------------------------------------
# welfare


def welfare_q(lam: float, c1: float, c2: float, m: int, gamma: float) -> float:
    """Per-battlefield ``p1 p2`` with player 2 on a complete network of weight ``lam``."""
    x = (1 + (m - 1) * lam) * c1 / c2
    return 1.0 / (x**gamma + x**-gamma + 2)


def welfare_total(lam: float, c1: float, c2: float, m: int, gamma: float, v: float) -> float:
    return gamma * m * v * (1 / c1 + 1 / c2) * welfare_q(lam, c1, c2, m, gamma)


def design_max_welfare(c1: float, c2: float, m: int, gamma: float, v=1.0,
                       epsilon: float = 0.1) -> DesignedNetworks:
    """Empty network for player 1, complete network for player 2 with combined total effort below ``epsilon``.

    ``Q`` rises until the two players' effective costs match and falls after,
    so the search starts at that peak; bisection then runs on the falling
    branch.
    """
    if not (c1 > 0 and c2 > 0):
        raise GameError("costs must be positive")
    if m < 2:
        raise GameError("need at least two battlefields")
    if not (0 < gamma <= 1):
        raise GameError("gamma must lie in (0, 1]")
    if not epsilon > 0:
        raise GameError("epsilon must be positive")
    v = _equal_value(v, m)
    notes = []
    total = lambda lam: welfare_total(lam, c1, c2, m, gamma, v)  # noqa: E731
    if total(0.0) < epsilon:
        lam = 0.0
        notes.append("epsilon exceeds the total effort without spillovers; no links needed")
    else:
        lo = max(0.0, (c2 / c1 - 1) / (m - 1))
        hi = max(1.0, 2 * lo)
        while total(hi) >= epsilon:
            hi *= 2
            if hi > 1e300:
                raise GameError("epsilon too small to reach")
        while hi - lo > BISECT_WIDTH * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if total(mid) < epsilon:
                hi = mid
            else:
                lo = mid
        lam = hi
        if abs(lam - 1.0) < 1e-6:
            # I + rho2 is singular at unit weight; larger weights only lower the total
            lam = 1.0 + 1e-6
            notes.append("moved off the singular weight 1")
    rho1 = np.zeros((m, m))
    rho2 = complete_network(m, lam)
    params = {"lambda_eps": float(lam), "total": float(total(lam)), "epsilon": float(epsilon)}
    return DesignedNetworks(rho1, rho2, params, handicap(rho1, rho2), MAX_WELFARE, tuple(notes))


# ---------------------------------------------------------------------------
# unequal prizes


def pair_range(c1: float, c2: float, v_lo: float, v_hi: float) -> tuple[float, float, bool]:
    """Admissible ``lambda1`` for a two-battlefield group: ``(lo, hi, closed_lo)``."""
    ratio = (v_lo + v_hi) / v_hi
    if c2 / c1 < ratio:
        return 0.0, ratio * c1 / c2 - 1, True
    return v_hi / v_lo, math.inf, False


def triple_ratio(v3) -> float:
    a, b, c = v3
    return (c + b + a) / (c + b - a)


def triple_range(c1: float, c2: float, v3) -> tuple[float, float, bool]:
    """Admissible ``lambda1`` for the final three-battlefield group."""
    r = triple_ratio(v3)
    if c2 / c1 < r:
        return 0.0, r * c1 / c2 - 1, True
    return v3[1] / v3[0], math.inf, False


def _default_lambda(lo, hi):
    return 0.5 * (lo + hi) if math.isfinite(hi) else ONE_SIDED_FACTOR * lo


def _admissible(lam, lo, hi, closed_lo):
    return (lam >= lo if closed_lo else lam > lo) and lam < hi


def design_max_effort_general(c1: float, c2: float, values, lambda1_choices=None) -> DesignedNetworks:
    """Block-diagonal networks (pairs plus a final triple when ``m`` is odd).

    ``lambda1_choices`` holds one weight per group (``None`` entries take the
    default); groups are formed on the values sorted ascending and the
    networks are returned in the caller's battlefield order.
    """
    _check_costs(c1, c2)
    values = np.asarray(values, dtype=float)
    m = values.shape[0]
    if m < 2:
        raise GameError("need at least two battlefields")
    if np.any(values <= 0):
        raise GameError("values must be positive")
    order = np.argsort(values, kind="stable")
    vs = values[order]
    r = m // 2
    groups = [[2 * l, 2 * l + 1] for l in range(r)]
    if m % 2:
        groups[-1].append(m - 1)
    choices = list(lambda1_choices) if lambda1_choices is not None else [None] * r
    if len(choices) != r:
        raise GameError(f"expected {r} lambda1 values, got {len(choices)}")

    rho1 = np.zeros((m, m))
    rho2 = np.zeros((m, m))
    lam1s, lam2s, shapes = [], [], []
    for l, grp in enumerate(groups):
        triple = len(grp) == 3
        if triple:
            lo, hi, closed = triple_range(c1, c2, vs[grp])
            shape = "full" if c2 / c1 < triple_ratio(vs[grp]) else "pair+source"
        else:
            lo, hi, closed = pair_range(c1, c2, vs[grp[0]], vs[grp[1]])
            shape = "pair"
        lam1 = _default_lambda(lo, hi) if choices[l] is None else float(choices[l])
        if not _admissible(lam1, lo, hi, closed):
            bracket = "[" if closed else "("
            raise GameError(f"group {l + 1}: lambda1={lam1} outside {bracket}{lo}, {hi})")
        lam2 = (c2 / c1) * lam1 + (c2 - c1) / c1
        for rho, lam in ((rho1, lam1), (rho2, lam2)):
            if not triple:
                a, b = grp
                rho[a, b] = rho[b, a] = lam
            elif shape == "full":
                for a in grp:
                    for b in grp:
                        if a != b:
                            rho[a, b] = lam / 2
            else:
                a, b, top = grp
                rho[a, b] = rho[b, a] = lam
                rho[top, a] = rho[top, b] = lam / 2
        lam1s.append(lam1)
        lam2s.append(lam2)
        shapes.append(shape)

    inv = np.empty(m, dtype=int)
    inv[order] = np.arange(m)
    out1 = rho1[np.ix_(inv, inv)]
    out2 = rho2[np.ix_(inv, inv)]
    params = {
        "lambda1_groups": lam1s,
        "lambda2_groups": lam2s,
        "groups": [[int(order[k]) + 1 for k in grp] for grp in groups],
        "shapes": shapes,
    }
    return DesignedNetworks(out1, out2, params, handicap(out1, out2), MAX_EFFORT_GENERAL)


# ---------------------------------------------------------------------------
# verification


def verify_design(networks: DesignedNetworks, c1: float, c2: float, gamma: float, values,
                  tol: float = DESIGN_TOL) -> VerificationReport:
    values = np.broadcast_to(np.asarray(values, dtype=float), (networks.rho1.shape[0],)).copy()
    game = networks.game(c1, c2, gamma, values)
    rep = solve(game)
    out = VerificationReport()
    e_min = min(rep.profile.e1.min(), rep.profile.e2.min())
    out.record("interior", e_min > 0, f"smallest effort {e_min:.3e}")
    out.record("certified", rep.kkt_residual <= max(tol, rep.diagnostics.get("tolerance", tol)),
               f"kkt residual {rep.kkt_residual:.3e}")
    if networks.target == MAX_WELFARE:
        eps = networks.parameters["epsilon"]
        combined = sum(rep.total_efforts)
        out.record("below_epsilon", combined < eps, f"combined total {combined:.6g} vs epsilon {eps}")
        return out
    dev = float(np.max(np.abs(rep.probs.p1 - 0.5)))
    out.record("equal_odds", dev <= tol, f"max |p - 1/2| = {dev:.3e}")
    bound = [gamma * values.sum() / (4 * c) for c in (c1, c2)]
    gap = max(abs(t - b) for t, b in zip(rep.total_efforts, bound))
    out.record("totals_at_bound", gap <= tol,
               "totals ({:.12g}, {:.12g}) vs bound ({:.12g}, {:.12g})".format(*rep.total_efforts, *bound))
    mu_gap = float(np.max(np.abs(rep.mu2 - (c1 / c2) * rep.mu1)))
    out.record("rates_proportional", mu_gap <= tol, f"max |mu2 - (c1/c2) mu1| = {mu_gap:.3e}")
    return out
