"""Equilibrium computation through the marginal-rate (mu) system.

At an equilibrium with support sets ``P1, P2`` every player's marginal rates
``mu_i`` satisfy ``[(I + rho_i) mu_i]_k = 1`` on ``P_i`` and ``<= 1`` off it,
win probabilities follow from ``(mu_1 c_1, mu_2 c_2)`` alone, and effective
efforts follow from probabilities and ``mu``.  ``solve`` searches support
pairs, solves the nonlinear system for each candidate and certifies the
result with the first-order (KKT) residual of the original game.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ContestGame,
    EffectiveEfforts,
    EffortProfile,
    GameError,
    WinProbabilities,
    effective_efforts,
    marginal_prize,
    marginal_rates,
    payoffs,
    rcond,
    RCOND_WARN,
    validate_game,
    win_probabilities,
)

log = logging.getLogger(__name__)

POS_TOL = 1e-11
SLACK_TOL = 1e-9
TOL_EXACT = 1e-9
TOL_GENERAL = 1e-7
NEWTON_MAXITER = 200
NEWTON_TOL = 1e-12
SUPPORT_ENUM_LIMIT = 10

METHOD_INTERIOR = "interior"
METHOD_SUPPORT = "support-search"
METHOD_ORACLE = "oracle-refined"


class SolverError(RuntimeError):
    """No certified equilibrium could be produced."""


class NewtonError(RuntimeError):
    """The mu-system iteration did not converge (distinct from an invalid candidate)."""


def default_tolerance(game: ContestGame) -> float:
    env = os.environ.get("NETCONTEST_TOL")
    if env:
        return float(env)
    return TOL_EXACT if game.gamma == 1.0 else TOL_GENERAL


@dataclass(frozen=True)
class SupportPair:
    """0-based battlefield index sets with positive real effort."""

    P1: frozenset
    P2: frozenset

    @classmethod
    def of(cls, P1, P2) -> "SupportPair":
        return cls(frozenset(int(k) for k in P1), frozenset(int(k) for k in P2))

    @classmethod
    def one_based(cls, P1, P2) -> "SupportPair":
        return cls.of((k - 1 for k in P1), (k - 1 for k in P2))

    def of_player(self, player: int) -> frozenset:
        return self.P1 if player == 1 else self.P2

    def to_lists(self) -> tuple[list[int], list[int]]:
        return sorted(k + 1 for k in self.P1), sorted(k + 1 for k in self.P2)

    def sort_key(self):
        return (sorted(self.P1), sorted(self.P2))


@dataclass
class EquilibriumReport:
    profile: EffortProfile
    y: EffectiveEfforts
    mu1: np.ndarray
    mu2: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    supports: SupportPair
    probs: WinProbabilities
    total_efforts: tuple[float, float]
    payoffs: tuple[float, float]
    partition: tuple[frozenset, frozenset, frozenset]
    kkt_residual: float
    method: str
    multiplicity: bool = False
    diagnostics: dict = field(default_factory=dict)

    def mu(self, player: int) -> np.ndarray:
        return self.mu1 if player == 1 else self.mu2

    def to_dict(self) -> dict:
        P1, P2 = self.supports.to_lists()
        bplus, a1, a2 = (sorted(k + 1 for k in s) for s in self.partition)
        return {
            "method": self.method,
            "kkt_residual": self.kkt_residual,
            "multiplicity": self.multiplicity,
            "e1": self.profile.e1.tolist(),
            "e2": self.profile.e2.tolist(),
            "y1": self.y.y1.tolist(),
            "y2": self.y.y2.tolist(),
            "mu1": self.mu1.tolist(),
            "mu2": self.mu2.tolist(),
            "s1": self.s1.tolist(),
            "s2": self.s2.tolist(),
            "p1": self.probs.p1.tolist(),
            "p2": self.probs.p2.tolist(),
            "support1": P1,
            "support2": P2,
            "contested": bplus,
            "only1": a1,
            "only2": a2,
            "total_efforts": list(self.total_efforts),
            "payoffs": list(self.payoffs),
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "EquilibriumReport":
        arr = lambda key: np.array(d[key], dtype=float)  # noqa: E731
        zero = lambda key: frozenset(k - 1 for k in d[key])  # noqa: E731
        return cls(
            profile=EffortProfile(arr("e1"), arr("e2")),
            y=EffectiveEfforts(arr("y1"), arr("y2")),
            mu1=arr("mu1"), mu2=arr("mu2"), s1=arr("s1"), s2=arr("s2"),
            supports=SupportPair(zero("support1"), zero("support2")),
            probs=WinProbabilities(arr("p1"), arr("p2")),
            total_efforts=tuple(d["total_efforts"]),
            payoffs=tuple(d["payoffs"]),
            partition=(zero("contested"), zero("only1"), zero("only2")),
            kkt_residual=d["kkt_residual"],
            method=d["method"],
            multiplicity=d["multiplicity"],
            diagnostics=d.get("diagnostics", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "EquilibriumReport":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# marginal rates -> probabilities -> effective efforts


def probabilities_from_mu(game: ContestGame, mu1, mu2) -> tuple[np.ndarray, np.ndarray]:
    g = game.gamma
    a1 = np.power(np.maximum(mu1, 0.0) * game.costs[0], g)
    a2 = np.power(np.maximum(mu2, 0.0) * game.costs[1], g)
    s = a1 + a2
    with np.errstate(divide="ignore", invalid="ignore"):
        return a2 / s, a1 / s


def effective_from_mu(game: ContestGame, mu1, mu2) -> tuple[np.ndarray, np.ndarray]:
    """Effective efforts implied by marginal rates, ``y_i = gamma p1 p2 v / (mu_i c_i)``.

    Written so that a zero ``mu_i`` is harmless when ``gamma == 1``.
    """
    g = game.gamma
    c1, c2 = game.costs
    v = game.values
    m1 = np.maximum(np.asarray(mu1, dtype=float), 0.0) * c1
    m2 = np.maximum(np.asarray(mu2, dtype=float), 0.0) * c2
    with np.errstate(divide="ignore", invalid="ignore"):
        if g == 1.0:
            s = m1 + m2
            return v * m2 / s**2, v * m1 / s**2
        a1, a2 = m1**g, m2**g
        s = a1 + a2
        y1 = g * m1 ** (g - 1) * a2 * v / s**2
        y2 = g * m2 ** (g - 1) * a1 * v / s**2
        return y1, y2


def _katz(game: ContestGame, player: int) -> np.ndarray:
    a = np.eye(game.m) + game.rho(player)
    return np.linalg.solve(a, np.ones(game.m))


# ---------------------------------------------------------------------------
# first-order conditions


def kkt_residual(game: ContestGame, profile: EffortProfile) -> float:
    """Max-norm violation of the first-order conditions of both players.

    ``|dPi_i/de_i^k|`` where ``e_i^k > 0`` and ``max(0, dPi_i/de_i^k)`` where
    ``e_i^k == 0``.  Negative efforts count as violations.  Returns ``inf``
    where a derivative is undefined (zero effective effort with gamma < 1, or
    no effective effort from either player).
    """
    y = effective_efforts(game, profile)
    worst = 0.0
    for i in (1, 2):
        e = profile.effort(i)
        d = marginal_prize(game.gamma, game.values, y.of(i), y.of(3 - i))
        if not np.all(np.isfinite(d)):
            # an infinite marginal prize only matters where it propagates
            touched = (np.eye(game.m) + game.rho(i)) @ np.where(np.isfinite(d), 0.0, 1.0)
            if np.any(touched > 0):
                return math.inf
            d = np.where(np.isfinite(d), d, 0.0)
        grad = d + game.rho(i) @ d - game.cost(i)
        pos = e > 0
        r = np.where(pos, np.abs(grad), np.maximum(grad, 0.0))
        worst = max(worst, float(r.max(initial=0.0)), float(np.maximum(-e, 0.0).max(initial=0.0)))
    return worst


def equilibrium_partition(y: EffectiveEfforts, tol: float = POS_TOL):
    """Split battlefields into (contested, only player 1, only player 2), 0-based."""
    pos1 = y.y1 > tol
    pos2 = y.y2 > tol
    dead = ~(pos1 | pos2)
    if dead.any():
        raise SolverError("battlefield(s) with no effective effort from either player: "
                          f"{[int(k) + 1 for k in np.flatnonzero(dead)]}")
    idx = lambda mask: frozenset(int(k) for k in np.flatnonzero(mask))  # noqa: E731
    return idx(pos1 & pos2), idx(pos1 & ~pos2), idx(pos2 & ~pos1)


def closed_form_totals(report: EquilibriumReport, game: ContestGame) -> tuple[float, float]:
    q = report.probs.p1 * report.probs.p2 * game.values
    return tuple(float(game.gamma / c * q.sum()) for c in game.costs)


def closed_form_payoffs(report: EquilibriumReport, game: ContestGame) -> tuple[float, float]:
    p1, p2 = report.probs.p1, report.probs.p2
    g, v = game.gamma, game.values
    return float(np.sum(p1 * (1 - g * p2) * v)), float(np.sum(p2 * (1 - g * p1) * v))


# ---------------------------------------------------------------------------
# report assembly


def _build_report(game, e1, e2, mu1, mu2, supports, method, multiplicity=False, diagnostics=None):
    profile = EffortProfile(e1, e2)
    y = effective_efforts(game, profile)
    probs = win_probabilities(game, y)
    s1 = 1.0 - (np.eye(game.m) + game.rho1) @ mu1
    s2 = 1.0 - (np.eye(game.m) + game.rho2) @ mu2
    return EquilibriumReport(
        profile=profile, y=y, mu1=np.asarray(mu1, float), mu2=np.asarray(mu2, float),
        s1=s1, s2=s2, supports=supports, probs=probs,
        total_efforts=profile.totals, payoffs=payoffs(game, profile),
        partition=equilibrium_partition(y),
        kkt_residual=kkt_residual(game, profile), method=method,
        multiplicity=multiplicity, diagnostics=dict(diagnostics or {}),
    )


def _efforts_on_support(game, player, support, y):
    """Real efforts on ``support`` producing ``y`` there; ``(e, singular)``."""
    m = game.m
    e = np.zeros(m)
    P = sorted(support)
    if not P:
        return e, False
    a = np.eye(len(P)) + game.rho(player)[np.ix_(P, P)].T
    singular = rcond(a) < RCOND_WARN
    if singular:
        sol = np.linalg.lstsq(a, y[P], rcond=None)[0]
    else:
        sol = np.linalg.solve(a, y[P])
    e[P] = sol
    return e, singular


def solve_interior(game: ContestGame):
    """Interior equilibrium from Katz-Bonacich marginal rates, or ``None``.

    Raises ``numpy.linalg.LinAlgError`` when ``I + rho_i`` is singular.
    """
    m = game.m
    mus = []
    for i in (1, 2):
        a = np.eye(m) + game.rho(i)
        if rcond(a) < RCOND_WARN:
            raise np.linalg.LinAlgError(f"I + rho{i} is singular")
        mus.append(np.linalg.solve(a, np.ones(m)))
    mu1, mu2 = mus
    if np.any(mu1 < 0) or np.any(mu2 < 0):
        return None
    y1, y2 = effective_from_mu(game, mu1, mu2)
    if not (np.all(np.isfinite(y1)) and np.all(np.isfinite(y2))):
        return None
    e1 = np.linalg.solve(np.eye(m) + game.rho1.T, y1)
    e2 = np.linalg.solve(np.eye(m) + game.rho2.T, y2)
    if np.any(e1 <= POS_TOL) or np.any(e2 <= POS_TOL):
        return None
    full = frozenset(range(m))
    return _build_report(game, e1, e2, mu1, mu2, SupportPair(full, full), METHOD_INTERIOR)


# ---------------------------------------------------------------------------
# support-restricted mu system


def covers(game: ContestGame, supports: SupportPair) -> bool:
    """Every battlefield reachable by some player's positive effort."""
    reach = np.zeros(game.m, dtype=bool)
    for i in (1, 2):
        for k in supports.of_player(i):
            reach[k] = True
            reach |= game.rho(i)[k] > 0
    return bool(reach.all())


def _mu_residual(game: ContestGame, supports: SupportPair, x: np.ndarray) -> np.ndarray:
    m = game.m
    mu = (x[:m], x[m:])
    y = effective_from_mu(game, *mu)
    parts = []
    for i in (1, 2):
        rho = game.rho(i)
        P = sorted(supports.of_player(i))
        N = sorted(set(range(m)) - set(P))
        if P:
            parts.append(mu[i - 1][P] + rho[np.ix_(P, range(m))] @ mu[i - 1] - 1.0)
        if N:
            yi = y[i - 1]
            if P:
                a = np.eye(len(P)) + rho[np.ix_(P, P)].T
                eP = np.linalg.lstsq(a, yi[P], rcond=None)[0]
                spill = rho[np.ix_(P, N)].T @ eP
            else:
                spill = np.zeros(len(N))
            parts.append(yi[N] - spill)
    return np.concatenate(parts)


def _jacobian(f, x, fx):
    n = x.size
    jac = np.empty((fx.size, n))
    for j in range(n):
        h = 1e-7 * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += h
        if x[j] - h >= 0:
            xm = x.copy()
            xm[j] -= h
            jac[:, j] = (f(xp) - f(xm)) / (2 * h)
        else:
            jac[:, j] = (f(xp) - fx) / h
    return jac


def damped_newton(f, x0, maxiter=NEWTON_MAXITER, tol=NEWTON_TOL, lower=0.0):
    """Projected damped Newton with a differenced Jacobian and least-squares steps.

    Returns ``(x, jacobian, iterations)``; raises NewtonError on failure.
    """
    x = np.maximum(np.asarray(x0, dtype=float), lower)
    fx = f(x)
    if not np.all(np.isfinite(fx)):
        raise NewtonError("residual not finite at starting point")
    norm = np.linalg.norm(fx)
    jac = None
    for it in range(maxiter):
        jac = _jacobian(f, x, fx)
        if norm <= tol:
            return x, jac, it
        if not np.all(np.isfinite(jac)):
            raise NewtonError("non-finite Jacobian")
        step = np.linalg.lstsq(jac, -fx, rcond=1e-13)[0]
        t = 1.0
        while True:
            xn = np.maximum(x + t * step, lower)
            fn = f(xn)
            nn = np.linalg.norm(fn) if np.all(np.isfinite(fn)) else np.inf
            if nn < (1 - 1e-4 * t) * norm or (nn <= norm and t < 1e-3):
                break
            t *= 0.5
            if t < 1e-10:
                raise NewtonError(f"line search failed at iteration {it}, |F|={norm:.3e}")
        dx = np.linalg.norm(xn - x)
        x, fx, norm = xn, fn, nn
        if dx <= tol * (1 + np.linalg.norm(x)) and norm <= 1e3 * tol:
            return x, _jacobian(f, x, fx), it + 1
    if norm <= 1e3 * tol:
        return x, _jacobian(f, x, fx), maxiter
    raise NewtonError(f"no convergence after {maxiter} iterations, |F|={norm:.3e}")


def _initial_mu(game: ContestGame) -> np.ndarray:
    parts = []
    for i in (1, 2):
        try:
            mu = _katz(game, i)
        except np.linalg.LinAlgError:
            mu = np.linalg.lstsq(np.eye(game.m) + game.rho(i), np.ones(game.m), rcond=None)[0]
        parts.append(np.maximum(mu, 0.0 if game.gamma == 1.0 else 1e-3))
    x = np.concatenate(parts)
    # a battlefield where both rates vanish has no defined probabilities
    m = game.m
    both = (x[:m] <= 0) & (x[m:] <= 0)
    x[:m][both] = x[m:][both] = 1e-3
    return x


@dataclass
class _Candidate:
    supports: SupportPair
    mu1: np.ndarray
    mu2: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    slack1: np.ndarray
    slack2: np.ndarray
    multiplicity: bool
    iterations: int

    def slack(self, i):
        return self.slack1 if i == 1 else self.slack2

    def effort(self, i):
        return self.e1 if i == 1 else self.e2

    def failures(self, scale: float) -> list[str]:
        out = []
        for i in (1, 2):
            P = sorted(self.supports.of_player(i))
            e = self.effort(i)
            mu = self.mu1 if i == 1 else self.mu2
            if P and np.any(e[P] <= POS_TOL * scale):
                out.append(f"player {i}: non-positive effort on support")
            if np.any(self.slack(i) < -SLACK_TOL):
                out.append(f"player {i}: marginal return exceeds cost off support")
            if np.any(mu < -SLACK_TOL):
                out.append(f"player {i}: negative marginal rate")
        return out


def _support_candidate(game: ContestGame, supports: SupportPair, x0=None) -> _Candidate:
    m = game.m
    f = lambda x: _mu_residual(game, supports, x)  # noqa: E731
    x0 = _initial_mu(game) if x0 is None else np.asarray(x0, dtype=float)
    x, jac, its = damped_newton(f, x0)
    mu1, mu2 = x[:m], x[m:]
    y1, y2 = effective_from_mu(game, mu1, mu2)
    if not (np.all(np.isfinite(y1)) and np.all(np.isfinite(y2))):
        raise NewtonError("effective efforts undefined at the solution")
    e1, sing1 = _efforts_on_support(game, 1, supports.P1, y1)
    e2, sing2 = _efforts_on_support(game, 2, supports.P2, y2)
    sv = np.linalg.svd(jac, compute_uv=False)
    rank_deficient = sv.size > 0 and (sv[-1] <= 1e-8 * max(sv[0], 1e-300))
    s1 = 1.0 - (np.eye(m) + game.rho1) @ mu1
    s2 = 1.0 - (np.eye(m) + game.rho2) @ mu2
    return _Candidate(supports, mu1, mu2, e1, e2, s1, s2,
                      bool(rank_deficient or sing1 or sing2), its)


def _effort_scale(game: ContestGame) -> float:
    return float(game.values.sum() / min(game.costs))


def solve_support(game: ContestGame, supports: SupportPair, x0=None):
    """Equilibrium with the given support pair, or ``None`` if the candidate is invalid.

    Raises NewtonError when the nonlinear system does not converge.
    """
    if not covers(game, supports):
        return None
    cand = _support_candidate(game, supports, x0)
    if cand.failures(_effort_scale(game)):
        return None
    e1 = np.where(cand.e1 > 0, cand.e1, 0.0)
    e2 = np.where(cand.e2 > 0, cand.e2, 0.0)
    try:
        return _build_report(game, e1, e2, cand.mu1, cand.mu2, supports, METHOD_SUPPORT,
                             multiplicity=cand.multiplicity,
                             diagnostics={"newton_iterations": cand.iterations})
    except SolverError:
        return None


# ---------------------------------------------------------------------------
# orchestration


def _certified(report, tol) -> bool:
    return report is not None and report.kkt_residual <= tol


def _prize_derivatives(gamma, v, y_own, y_other):
    """First, own-second and cross-second derivatives of ``v p_own`` (all y > 0)."""
    a = y_own**gamma
    b = y_other**gamma
    s = a + b
    d = gamma * v * y_own ** (gamma - 1) * b / s**2
    h_own = gamma * v * b * y_own ** (gamma - 2) * ((gamma - 1) * s - 2 * gamma * a) / s**3
    h_cross = gamma**2 * v * (y_own * y_other) ** (gamma - 1) * (a - b) / s**3
    return d, h_own, h_cross


def interior_point(game: ContestGame, maxiter: int = 300, tol: float = 1e-13):
    """Approximate equilibrium from a primal-dual path on the complementarity form.

    Unknowns are efforts ``e > 0`` and cost slacks ``s > 0`` with
    ``s = c - (I + rho) d(y)`` and ``e * s = tau``; ``tau`` is driven to zero.
    Returns ``(e1, e2, s1, s2)``; raises NewtonError if the path breaks down.
    """
    m = game.m
    a = [np.eye(m) + game.rho1, np.eye(m) + game.rho2]
    c = np.repeat(np.asarray(game.costs), m)
    share = float(game.values.sum()) / (4 * m)
    e = share / c
    sl = np.ones(2 * m) * c

    def residual(e, sl):
        y1, y2 = a[0].T @ e[:m], a[1].T @ e[m:]
        d1, h11, h12 = _prize_derivatives(game.gamma, game.values, y1, y2)
        d2, h22, h21 = _prize_derivatives(game.gamma, game.values, y2, y1)
        f = c - np.concatenate([a[0] @ d1, a[1] @ d2])
        jac = -np.block([[a[0] @ (h11[:, None] * a[0].T), a[0] @ (h12[:, None] * a[1].T)],
                         [a[1] @ (h21[:, None] * a[0].T), a[1] @ (h22[:, None] * a[1].T)]])
        return sl - f, jac

    scale = _effort_scale(game)
    for it in range(maxiter):
        r1, jac = residual(e, sl)
        gap = float(e @ sl) / (2 * m)
        if gap <= tol * scale and np.max(np.abs(r1)) <= tol:
            return e[:m], e[m:], sl[:m], sl[m:]
        tau = 0.1 * gap if np.max(np.abs(r1)) < 10 * gap else gap
        r2 = e * sl - tau
        lhs = np.diag(sl) + e[:, None] * jac
        try:
            de = np.linalg.solve(lhs, -r2 + e * r1)
        except np.linalg.LinAlgError as exc:
            raise NewtonError("singular interior-point system") from exc
        ds = -r1 + jac @ de
        step = 1.0
        for v, dv in ((e, de), (sl, ds)):
            neg = dv < 0
            if neg.any():
                step = min(step, 0.995 * float(np.min(-v[neg] / dv[neg])))
        merit = np.linalg.norm(r1) + np.linalg.norm(r2)
        while True:
            en, sn = e + step * de, sl + step * ds
            rn, _ = residual(en, sn)
            mn = np.linalg.norm(rn) + np.linalg.norm(en * sn - tau)
            if np.isfinite(mn) and mn <= (1 - 1e-4 * step) * merit:
                break
            step *= 0.5
            if step < 1e-12:
                raise NewtonError(f"interior-point line search failed at iteration {it}")
        e, sl = en, sn
    raise NewtonError("interior-point path did not converge")


def _ip_guided(game: ContestGame, tol: float):
    """Support pair and starting rates read off the interior-point path."""
    try:
        e1, e2, s1, s2 = interior_point(game)
    except NewtonError as exc:
        log.debug("interior point: %s", exc)
        return None
    mu1, mu2 = marginal_rates(game, EffortProfile(e1, e2))
    x0 = np.concatenate([mu1, mu2])
    # ratio e/s separates the support (large) from the rest (small)
    ratio = np.concatenate([e1 / s1, e2 / s2])
    base = ratio > 1.0
    guesses = [base]
    for k in np.argsort(np.abs(np.log(ratio))):
        if len(guesses) >= 4:
            break
        g = base.copy()
        g[k] = ~g[k]
        guesses.append(g)
    m = game.m
    for mask in guesses:
        sp = SupportPair.of(np.flatnonzero(mask[:m]), np.flatnonzero(mask[m:]))
        try:
            rep = solve_support(game, sp, x0)
        except NewtonError:
            continue
        if _certified(rep, tol):
            return rep
    return None


def _greedy(game: ContestGame, tol: float, max_steps: int | None = None):
    """Active-set walk from full supports, repairing sign and slack violations."""
    m = game.m
    full = frozenset(range(m))
    P = [set(full), set(full)]
    x0 = _initial_mu(game)
    seen = set()
    scale = _effort_scale(game)
    tried = []
    for _ in range(max_steps or 4 * m + 4):
        sp = SupportPair.of(*P)
        if sp in seen or not covers(game, sp):
            break
        seen.add(sp)
        tried.append(sp)
        try:
            cand = _support_candidate(game, sp, x0)
        except NewtonError as exc:
            log.debug("greedy: %s at %s", exc, sp.to_lists())
            break
        if not cand.failures(scale):
            rep = solve_support(game, sp, np.concatenate([cand.mu1, cand.mu2]))
            if _certified(rep, tol):
                return rep, tried
        x0 = np.maximum(np.concatenate([cand.mu1, cand.mu2]), 0.0)
        changed = False
        for i in (1, 2):
            e = cand.effort(i)
            drop = [k for k in P[i - 1] if e[k] <= POS_TOL * scale]
            if drop:
                # drop the most negative first; one at a time keeps the walk stable
                k = min(drop, key=lambda k: e[k])
                P[i - 1].discard(k)
                changed = True
                continue
            add = [k for k in full - P[i - 1] if cand.slack(i)[k] < -SLACK_TOL]
            if add:
                k = min(add, key=lambda k: cand.slack(i)[k])
                P[i - 1].add(k)
                changed = True
        if not changed:
            break
    return None, tried


def _subsets(m):
    for r in range(m + 1):
        yield from itertools.combinations(range(m), r)


def enumerate_supports(game: ContestGame, tol: float, limit: int = SUPPORT_ENUM_LIMIT,
                       first_only: bool = True):
    """All certified equilibria over covering support pairs, lexicographic order."""
    m = game.m
    if m > limit:
        return []
    found = []
    for P1 in _subsets(m):
        for P2 in _subsets(m):
            sp = SupportPair.of(P1, P2)
            if not covers(game, sp):
                continue
            try:
                rep = solve_support(game, sp)
            except NewtonError:
                continue
            if _certified(rep, tol):
                found.append(rep)
                if first_only:
                    return found
    return found


def _oracle_guided(game: ContestGame, tol: float):
    from .oracle import br_dynamics  # local import: oracle depends on this module's types

    run = br_dynamics(game)
    e = (run.profile.e1, run.profile.e2)
    x0 = np.concatenate(marginal_rates(game, run.profile))
    scale = _effort_scale(game)
    guesses = []
    for thresh in (1e-6, 1e-5, 1e-4, 1e-3):
        sp = SupportPair.of(np.flatnonzero(e[0] > thresh * scale), np.flatnonzero(e[1] > thresh * scale))
        if sp not in guesses:
            guesses.append(sp)
    for sp in guesses:
        try:
            rep = solve_support(game, sp, x0)
        except NewtonError:
            continue
        if _certified(rep, tol):
            rep.method = METHOD_ORACLE
            return rep
    return None


def solve(game: ContestGame, tol: float | None = None, oracle: bool = False,
          support_enum_limit: int = SUPPORT_ENUM_LIMIT) -> EquilibriumReport:
    """Certified equilibrium of ``game``.

    Tries the interior solution, then a greedy support walk, then supports
    read off best-response dynamics, then exhaustive enumeration for small
    games.  With ``oracle=True`` the result is also cross-checked against
    best-response dynamics and the verdict stored in ``diagnostics``.
    """
    val = validate_game(game, principal=False)
    if not val.ok:
        raise GameError("; ".join(val.violations))
    tol = default_tolerance(game) if tol is None else tol
    singular = any(val.singular.values())

    report = None
    try:
        report = solve_interior(game)
    except np.linalg.LinAlgError:
        report = None
    if not _certified(report, tol):
        report = _ip_guided(game, tol)
        if report is None:
            report, _ = _greedy(game, tol)
        if report is None:
            report = _oracle_guided(game, tol)
        if report is None:
            found = enumerate_supports(game, tol, support_enum_limit)
            report = found[0] if found else None
    if report is None:
        raise SolverError("no certified equilibrium found")
    if singular:
        report.multiplicity = True
    report.diagnostics["tolerance"] = tol
    if oracle:
        from .oracle import cross_validate

        report.diagnostics["oracle"] = cross_validate(game, report).to_dict()
    return report
