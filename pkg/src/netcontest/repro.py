"""Worked examples with closed-form equilibria, used as a regression corpus.

Expected values are kept as ``Fraction`` whenever the inputs are rational
(floats are converted exactly, so the fraction is the value of the game that
is actually solved) and as floats where square roots enter.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import bisect

from .core import ContestGame, EffortProfile
from .solver import kkt_residual, solve

QUANTITIES = ("e1", "e2", "mu1", "mu2", "p1", "p2", "totals", "payoffs")
BOUNDARY_TOL = 1e-12
MULTI_LO, MULTI_HI = Fraction(3, 4), Fraction(9, 2)


def _arr(xs) -> np.ndarray:
    return np.array([float(x) for x in xs])


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass
class WorkedCase:
    id: str
    game: ContestGame
    expected: dict
    regime_info: dict = field(default_factory=dict)
    compare: tuple = QUANTITIES
    multiplicity_expected: bool = False
    extra_profiles: list = field(default_factory=list)

    def value(self, key) -> np.ndarray:
        return _arr(self.expected[key])

    def self_check(self, tol: float = 1e-12) -> list[str]:
        """Identities the expected values must satisfy before any solver runs."""
        g = self.game
        out = []
        ex = self.expected
        if "p1" in ex and "p2" in ex:
            p1, p2 = ex["p1"], ex["p2"]
            v = [_exact(x) for x in g.values]
            gamma = _exact(g.gamma)
            c = [_exact(x) for x in g.costs]
            exact = all(isinstance(x, Fraction) for x in list(p1) + list(p2))
            close = (lambda a, b: a == b) if exact else (lambda a, b: abs(float(a) - float(b)) <= tol)
            if not all(close(a + b, 1) for a, b in zip(p1, p2)):
                out.append("probabilities do not sum to one")
            q = sum(a * b * w for a, b, w in zip(p1, p2, v))
            if "totals" in ex:
                for i in (0, 1):
                    if not close(ex["totals"][i], gamma / c[i] * q):
                        out.append(f"total effort of player {i + 1} inconsistent with probabilities")
            if "payoffs" in ex:
                pays = (sum(a * (1 - gamma * b) * w for a, b, w in zip(p1, p2, v)),
                        sum(b * (1 - gamma * a) * w for a, b, w in zip(p1, p2, v)))
                for i in (0, 1):
                    if not close(ex["payoffs"][i], pays[i]):
                        out.append(f"payoff of player {i + 1} inconsistent with probabilities")
                if "totals" in ex:
                    lhs = ex["payoffs"][0] + ex["payoffs"][1] + c[0] * ex["totals"][0] + c[1] * ex["totals"][1]
                    if not close(lhs, sum(v)):
                        out.append("constant-sum identity fails")
        for i in (1, 2):
            key = f"e{i}"
            if key in ex and "totals" in ex and key in self.compare:
                if abs(sum(float(x) for x in ex[key]) - float(ex["totals"][i - 1])) > tol:
                    out.append(f"efforts of player {i} do not add up to the total")
        return out


def _probs_from_mu(mu1, mu2, c1, c2):
    p1 = [b * c2 / (a * c1 + b * c2) for a, b in zip(mu1, mu2)]
    return p1, [1 - x for x in p1]


def _fill(expected: dict, game: ContestGame) -> dict:
    """Complete totals and payoffs from probabilities (gamma == 1 closed forms)."""
    p1, p2 = expected["p1"], expected["p2"]
    gamma = _exact(game.gamma)
    c1, c2 = (_exact(c) for c in game.costs)
    v = [_exact(x) for x in game.values]
    q = sum(a * b * w for a, b, w in zip(p1, p2, v))
    expected.setdefault("totals", (gamma / c1 * q, gamma / c2 * q))
    expected.setdefault("payoffs", (sum(a * (1 - gamma * b) * w for a, b, w in zip(p1, p2, v)),
                                    sum(b * (1 - gamma * a) * w for a, b, w in zip(p1, p2, v))))
    return expected


# ---------------------------------------------------------------------------
# networks


def star(m: int, centre: int = 0) -> np.ndarray:
    rho = np.zeros((m, m))
    for k in range(m):
        if k != centre:
            rho[centre, k] = rho[k, centre] = 1.0
    return rho


def cycle(m: int) -> np.ndarray:
    rho = np.zeros((m, m))
    for k in range(m):
        rho[k, (k + 1) % m] = rho[(k + 1) % m, k] = 1.0
    return rho


def line(m: int) -> np.ndarray:
    rho = np.zeros((m, m))
    for k in range(m - 1):
        rho[k, k + 1] = rho[k + 1, k] = 1.0
    return rho


# ---------------------------------------------------------------------------
# two battlefields, one directed link for player 2


def two_node_thresholds(c1, c2):
    l1 = (c1 + c2) * (c1 + 3 * c2 - math.sqrt((c1 + c2) * (c1 + 5 * c2))) / (2 * c2**2)
    l2 = ((c1 + c2) / c1) ** 2
    return l1, l2


def _two_node_regime(regime, c1, c2, lam):
    if regime == 1:
        c1, c2, lam = _exact(c1), _exact(c2), _exact(lam)
        d = (c1 + (1 - lam) * c2) ** 2
        s = (c1 + c2) ** 2
        e1 = ((1 - lam) * c2 / d, c2 / s)
        e2 = (c1 / d, c1 / s - lam * c1 / d)
    elif regime == 2:
        r = math.sqrt(lam)
        d = (c1 * (1 + lam) + c2) ** 2
        e1 = ((c2 + r * (r - 1) * c1) * (1 + r) / d, (c2 - (r - 1) * c1) * r * (1 + r) / d)
        e2 = ((1 + r) ** 2 * c1 / d, 0.0)
    else:
        c1, c2 = _exact(c1), _exact(c2)
        s = (c1 + c2) ** 2
        e1 = (c2 / s, Fraction(0))
        e2 = (c1 / s, Fraction(0))
    return e1, e2


def _contest_from_efforts(e1, e2, lam, c1, c2):
    """Probabilities and marginal rates for the two-node game (unit values, gamma 1)."""
    y1 = list(e1)
    y2 = [e2[0], e2[1] + lam * e2[0]]
    p1 = [a / (a + b) for a, b in zip(y1, y2)]
    p2 = [b / (a + b) for a, b in zip(y1, y2)]
    d1 = [b / (a + b) ** 2 for a, b in zip(y1, y2)]
    d2 = [a / (a + b) ** 2 for a, b in zip(y1, y2)]
    mu1 = [x / c1 for x in d1]
    mu2 = [x / c2 for x in d2]
    return p1, p2, mu1, mu2


def case_two_node(c1: float = 1.0, c2: float = 2.0, lam: float = 0.0) -> WorkedCase:
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    l1, l2 = two_node_thresholds(c1, c2)
    regime = 1 if lam < l1 else 2 if lam < l2 else 3
    e1, e2 = _two_node_regime(regime, c1, c2, lam)
    exact = regime != 2
    lam_x = _exact(lam) if exact else lam
    cc1, cc2 = (_exact(c1), _exact(c2)) if exact else (c1, c2)
    p1, p2, mu1, mu2 = _contest_from_efforts(e1, e2, lam_x, cc1, cc2)
    game = ContestGame(1.0, (c1, c2), np.ones(2), np.zeros((2, 2)), np.array([[0.0, lam], [0.0, 0.0]]))
    expected = _fill({"e1": e1, "e2": e2, "mu1": mu1, "mu2": mu2, "p1": p1, "p2": p2}, game)
    info = {"L1": l1, "L2": l2, "regime": regime}
    for edge, (a, b) in ((l1, (1, 2)), (l2, (2, 3))):
        if abs(lam - edge) <= BOUNDARY_TOL:
            fa, fb = _two_node_regime(a, c1, c2, lam), _two_node_regime(b, c1, c2, lam)
            gap = max(abs(float(x) - float(y)) for u, w in zip(fa, fb) for x, y in zip(u, w))
            info.update(boundary=True, boundary_regimes=[a, b], boundary_gap=gap)
    return WorkedCase(f"two_node(c={c1:g},{c2:g};lambda={lam:g})", game, expected, info)


# ---------------------------------------------------------------------------
# star versus cycle / line


def case_star_cycle(m: int) -> WorkedCase:
    if m < 4:
        raise ValueError("star versus cycle needs m >= 4")
    game = ContestGame(1.0, (1.0, 1.0), np.ones(m), star(m), cycle(m))
    M = Fraction(m)
    p1 = M / (M + 3)
    e1 = [3 * M**2 / (M + 3) ** 2] + [Fraction(0)] * (m - 1)
    e2 = [3 * M / (M + 3) ** 2] * m
    expected = _fill({
        "e1": e1, "e2": e2,
        "mu1": [1 / M] * m, "mu2": [Fraction(1, 3)] * m,
        "p1": [p1] * m, "p2": [1 - p1] * m,
    }, game)
    expected["payoff_ratio"] = M**2 / 9
    multi = m % 3 == 0
    compare = ("p1", "p2", "totals", "payoffs") if multi else QUANTITIES
    return WorkedCase(f"star_cycle(m={m})", game, expected, {"divisible_by_3": multi},
                     compare=compare, multiplicity_expected=multi)


def case_star_line() -> WorkedCase:
    m = 5
    game = ContestGame(1.0, (1.0, 1.0), np.ones(m), star(m), line(m))
    F = Fraction
    mu1 = [F(8, 41), F(8, 41), F(9, 41), F(8, 41), F(8, 41)]
    mu2 = [F(16, 41), F(16, 41), F(9, 41), F(16, 41), F(16, 41)]
    p1, p2 = _probs_from_mu(mu1, mu2, 1, 1)
    expected = _fill({
        "e1": [F(41, 36), 0, 0, 0, 0], "e2": [0, F(41, 72), 0, F(41, 72), 0],
        "mu1": mu1, "mu2": mu2, "p1": p1, "p2": p2,
    }, game)
    expected["e1"] = [F(x) for x in expected["e1"]]
    expected["e2"] = [F(x) for x in expected["e2"]]
    expected["payoff_ratio"] = F(73, 25)
    return WorkedCase("star_line", game, expected, {"supports": [[1], [2, 4]]})


# ---------------------------------------------------------------------------
# competing hubs


def hub_spoke_cubic(lam: float, n: int) -> float:
    return lam**3 * (n - 2) + lam**2 * (2 * n + 3) + lam * (n - 4) - 1


def hub_spoke_thresholds(n: int) -> tuple[float, float]:
    if n < 3:
        raise ValueError("need n >= 3")
    l1 = 1.0 / n
    l2 = bisect(hub_spoke_cubic, l1, 1.0, args=(n,), xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    return l1, l2


def hub_spoke_l2_trig(n: int) -> float:
    q = n**2 + 30 * n - 15
    arg = (n**3 - 63 * n**2 - 117 * n + 135) / q**1.5
    return 2 * math.sqrt(q) * math.sin(math.asin(arg) / 3 + math.pi / 3) / (3 * (n - 2)) - (2 * n + 3) / (3 * (n - 2))


def _hub_spoke_regime(regime, n, lam):
    """Player 1's efforts and rates (hub first, rival hub second, then spokes)."""
    L = _exact(lam)
    if regime == 1:
        d = (2 - (n - 1) * L) ** 2
        e = [1 / d, (1 - n * L) / d] + [Fraction(1, 4) - L / d] * (n - 2)
        mu = [1 - (n - 1) * L, Fraction(1)] + [Fraction(1)] * (n - 2)
    elif regime == 2:
        d = (1 + L) ** 2 * (1 - (n - 2) * L)
        e = [2 * L / d, Fraction(0)] + [Fraction(1, 4) - 2 * L**2 / d] * (n - 2)
        a = 1 - (n - 2) * L
        mu = [a / 2, a / (2 * L)] + [Fraction(1)] * (n - 2)
    else:
        e = [Fraction(n - 2, 4) + 2 * L / (1 + L) ** 2, Fraction(0)] + [Fraction(0)] * (n - 2)
        den = 2 * (n + 2) * L + (n - 2) * (1 + L**2)
        mu = [4 * L / den, 4 / den] + [(1 + L) ** 2 / (L * den)] * (n - 2)
    return e, mu


def _swap_hubs(xs):
    xs = list(xs)
    xs[0], xs[1] = xs[1], xs[0]
    return xs


def case_hub_spoke(n: int = 10, lam: float = 0.05) -> WorkedCase:
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    l1, l2 = hub_spoke_thresholds(n)
    regime = 1 if lam < l1 else 2 if lam < l2 else 3
    rho1 = np.zeros((n, n))
    rho1[0, 1:] = lam
    rho2 = np.zeros((n, n))
    rho2[1, [0] + list(range(2, n))] = lam
    game = ContestGame(1.0, (1.0, 1.0), np.ones(n), rho1, rho2)
    e1, mu1 = _hub_spoke_regime(regime, n, lam)
    L = _exact(lam)
    if regime == 1:
        p_own = 1 / (2 - (n - 1) * L)
    else:
        p_own = 1 / (1 + L)
    p1 = [p_own, 1 - p_own] + [Fraction(1, 2)] * (n - 2)
    expected = _fill({
        "e1": e1, "e2": _swap_hubs(e1), "mu1": mu1, "mu2": _swap_hubs(mu1),
        "p1": p1, "p2": [1 - x for x in p1],
    }, game)
    info = {"L1": l1, "L2": l2, "L2_trig": hub_spoke_l2_trig(n), "regime": regime}
    for edge, (a, b) in ((l1, (1, 2)), (l2, (2, 3))):
        if abs(lam - edge) <= BOUNDARY_TOL:
            ea, _ = _hub_spoke_regime(a, n, lam)
            eb, _ = _hub_spoke_regime(b, n, lam)
            gap = max(abs(float(x) - float(y)) for x, y in zip(ea, eb))
            info.update(boundary=True, boundary_regimes=[a, b], boundary_gap=gap)
    return WorkedCase(f"hub_spoke(n={n};lambda={lam:g})", game, expected, info)


# ---------------------------------------------------------------------------
# a continuum of equilibria


MULTI_RHO1 = ((0.0, 0.5, 3.0), (0.0, 0.0, 0.0), (2.0, 0.0, 0.0))


def multiple_eq_profile(mu_param) -> EffortProfile:
    """Efforts of the equilibrium family indexed by player 2's rate on battlefield 3."""
    t = _exact(mu_param)
    e1 = [(18 - 4 * t) / (45 * t), (53 * t - 36) / (180 * t), (4 * t - 3) / (15 * t)]
    e2 = [Fraction(2, 9), Fraction(1, 4), Fraction(0)]
    return EffortProfile(_arr(e1), _arr(e2)), (e1, e2)


def case_multiple_eq(mu_param=1, extra=(Fraction(4, 5), Fraction(9, 10), 1)) -> WorkedCase:
    """The family is an equilibrium only for ``3/4 < mu_param <= 1``; above 1
    player 2 would gain from effort on battlefield 3."""
    t = _exact(mu_param)
    if not MULTI_LO < t < MULTI_HI:
        raise ValueError(f"mu_param must lie in (3/4, 9/2), got {mu_param}")
    game = ContestGame(1.0, (1.0, 1.0), np.ones(3), np.array(MULTI_RHO1), np.zeros((3, 3)))
    _, (e1, e2) = multiple_eq_profile(t)
    F = Fraction
    mu1 = [F(1, 2), F(1), F(0)]
    mu2 = [F(1), F(1), t]
    # player 2 has no effective effort on battlefield 3
    p1 = [F(2, 3), F(1, 2), F(1)]
    expected = _fill({"e1": e1, "e2": e2, "mu1": mu1, "mu2": mu2, "p1": p1, "p2": [1 - x for x in p1]}, game)
    profiles = [multiple_eq_profile(x)[0] for x in extra]
    return WorkedCase(f"multiple_eq(mu={float(t):g})", game, expected,
                     {"mu_param": float(t), "equilibrium_range": "(3/4, 1]", "is_equilibrium": t <= 1},
                     compare=("mu1", "p1", "p2", "totals", "payoffs"),
                     multiplicity_expected=True, extra_profiles=profiles)


# ---------------------------------------------------------------------------
# corpus


def default_corpus() -> list[WorkedCase]:
    cases = [case_star_cycle(m) for m in (4, 5, 7, 8, 10)]
    cases.append(case_star_line())
    cases += [case_two_node(1.0, 2.0, lam) for lam in (0.0, 0.2, 0.6, 2.0, 9.0, 12.0)]
    cases += [case_hub_spoke(10, lam) for lam in (0.05, 0.1, 0.113, 0.5)]
    cases.append(case_multiple_eq(1))
    return cases


def case_by_id(case_id: str) -> list[WorkedCase]:
    found = [c for c in default_corpus() if c.id == case_id or c.id.split("(")[0] == case_id]
    if not found:
        raise KeyError(f"unknown case {case_id!r}")
    return found


@dataclass
class CorpusRow:
    case: str
    quantity: str
    expected: float
    got: float
    diff: float
    passed: bool


@dataclass
class CorpusReport:
    rows: list
    tolerance: float
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "seconds": self.seconds,
            "rows": [r.__dict__ for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=float)

    def table(self) -> str:
        head = f"{'case':34s} {'quantity':22s} {'max diff':>10s}  result"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(f"{r.case:34s} {r.quantity:22s} {r.diff:10.2e}  {'pass' if r.passed else 'FAIL'}")
        lines.append(f"{sum(r.passed for r in self.rows)}/{len(self.rows)} passed in {self.seconds:.2f}s")
        return "\n".join(lines)


def _report_value(rep, key):
    return {
        "e1": rep.profile.e1, "e2": rep.profile.e2, "mu1": rep.mu1, "mu2": rep.mu2,
        "p1": rep.probs.p1, "p2": rep.probs.p2,
        "totals": np.array(rep.total_efforts), "payoffs": np.array(rep.payoffs),
    }[key]


def check_case(case: WorkedCase, tolerance: float = 1e-9, oracle: bool = False) -> list[CorpusRow]:
    rows = []

    def add(q, exp, got, ok=None, diff=None):
        d = float(np.max(np.abs(np.asarray(exp, float) - np.asarray(got, float)), initial=0.0)) if diff is None else diff
        rows.append(CorpusRow(case.id, q, float(np.max(np.abs(exp), initial=0.0)) if np.size(exp) else 0.0,
                              float(np.max(np.abs(got), initial=0.0)) if np.size(got) else 0.0,
                              d, d <= tolerance if ok is None else ok))

    issues = case.self_check()
    rows.append(CorpusRow(case.id, "self-consistency", 0.0, float(len(issues)), float(len(issues)), not issues))
    rep = solve(case.game, tol=max(tolerance, 1e-12))
    for key in case.compare:
        add(key, case.value(key), _report_value(rep, key))
    if "boundary" in case.regime_info:
        gap = case.regime_info["boundary_gap"]
        add("regime boundary", 0.0, gap, diff=gap)
    if case.multiplicity_expected:
        rows.append(CorpusRow(case.id, "multiplicity flag", 1.0, float(rep.multiplicity),
                              0.0 if rep.multiplicity else 1.0, bool(rep.multiplicity)))
    for j, prof in enumerate(case.extra_profiles):
        r = kkt_residual(case.game, prof)
        rows.append(CorpusRow(case.id, f"kkt family member {j + 1}", 0.0, r, r, r <= max(tolerance, 1e-12)))
    if oracle:
        from .oracle import cross_validate

        agree = cross_validate(case.game, rep, tol=1e-4)
        worst = max(agree.differences.values())
        rows.append(CorpusRow(case.id, "oracle agreement", 0.0, worst, worst, agree.agree))
    return rows


def run_all(tolerance: float = 1e-9, oracle: bool = False, cases=None) -> CorpusReport:
    t0 = time.perf_counter()
    rows = []
    for case in cases if cases is not None else default_corpus():
        rows += check_case(case, tolerance, oracle)
    return CorpusReport(rows, tolerance, time.perf_counter() - t0)
