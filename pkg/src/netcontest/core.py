"""Contest games on spillover networks: representation, validation and payoffs.

A game has ``m`` battlefields with prize values ``v``, a Tullock exponent
``gamma`` in (0, 1], per-player marginal costs and one spillover matrix per
player.  Entry ``rho[k, l]`` is the share of effort placed on battlefield ``k``
that also counts at battlefield ``l``, so effective efforts are
``y = (I + rho.T) @ e``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TIE_HALF = "half"
TIE_ERROR = "error"

# reciprocal condition number below which a matrix is reported as singular
RCOND_WARN = 1e-10
# exhaustive principal-submatrix checks above this size are skipped
PRINCIPAL_CHECK_LIMIT = 12


class GameError(ValueError):
    """Malformed game input (wrong shapes, unparsable file, bad profile)."""


class TieError(ArithmeticError):
    """Both players put zero effective effort on a battlefield."""


def _frozen(a, ndim: int, name: str) -> np.ndarray:
    try:
        arr = np.array(a, dtype=float)
    except (TypeError, ValueError) as exc:
        raise GameError(f"{name}: {exc}") from exc
    if arr.ndim != ndim:
        raise GameError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ContestGame:
    gamma: float
    costs: tuple[float, float]
    values: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values, 1, "values")
        m = values.shape[0]
        if m < 1:
            raise GameError("values: need at least one battlefield")
        object.__setattr__(self, "values", values)
        for name in ("rho1", "rho2"):
            rho = _frozen(getattr(self, name), 2, name)
            if rho.shape != (m, m):
                raise GameError(f"{name}: expected shape {(m, m)}, got {rho.shape}")
            object.__setattr__(self, name, rho)
        try:
            costs = tuple(float(c) for c in self.costs)
        except (TypeError, ValueError) as exc:
            raise GameError(f"costs: {exc}") from exc
        if len(costs) != 2:
            raise GameError("costs: expected exactly two entries")
        object.__setattr__(self, "costs", costs)
        try:
            object.__setattr__(self, "gamma", float(self.gamma))
        except (TypeError, ValueError) as exc:
            raise GameError(f"gamma: {exc}") from exc

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def rho(self, player: int) -> np.ndarray:
        return self.rho1 if player == 1 else self.rho2

    def cost(self, player: int) -> float:
        return self.costs[player - 1]

    def replace(self, **changes) -> "ContestGame":
        kw = dict(gamma=self.gamma, costs=self.costs, values=self.values,
                  rho1=self.rho1, rho2=self.rho2)
        kw.update(changes)
        return ContestGame(**kw)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "costs": list(self.costs),
            "values": self.values.tolist(),
            "rho1": self.rho1.tolist(),
            "rho2": self.rho2.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContestGame":
        missing = [k for k in ("gamma", "costs", "values", "rho1", "rho2") if k not in data]
        if missing:
            raise GameError(f"missing field(s): {', '.join(missing)}")
        try:
            return cls(gamma=data["gamma"], costs=data["costs"], values=data["values"],
                       rho1=data["rho1"], rho2=data["rho2"])
        except (TypeError, ValueError) as exc:
            if isinstance(exc, GameError):
                raise
            raise GameError(str(exc)) from exc


def empty_network(m: int) -> np.ndarray:
    return np.zeros((m, m))


def load_game(path) -> ContestGame:
    """Read a game JSON file; errors carry the line/column or the offending field."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise GameError(f"{path}: top-level JSON value must be an object")
    return ContestGame.from_dict(data)


def dump_game(game: ContestGame, path=None, **extra) -> str:
    data = game.to_dict()
    data.update(extra)
    text = json.dumps(data, indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


@dataclass(frozen=True)
class EffortProfile:
    e1: np.ndarray
    e2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e1", _frozen(self.e1, 1, "e1"))
        object.__setattr__(self, "e2", _frozen(self.e2, 1, "e2"))
        if self.e1.shape != self.e2.shape:
            raise GameError("e1 and e2 must have the same length")

    def effort(self, player: int) -> np.ndarray:
        return self.e1 if player == 1 else self.e2

    def with_effort(self, player: int, e) -> "EffortProfile":
        return EffortProfile(e, self.e2) if player == 1 else EffortProfile(self.e1, e)

    @property
    def totals(self) -> tuple[float, float]:
        return float(self.e1.sum()), float(self.e2.sum())


@dataclass(frozen=True)
class EffectiveEfforts:
    y1: np.ndarray
    y2: np.ndarray

    def of(self, player: int) -> np.ndarray:
        return self.y1 if player == 1 else self.y2


@dataclass(frozen=True)
class WinProbabilities:
    p1: np.ndarray
    p2: np.ndarray
    tie_flags: frozenset = frozenset()

    def of(self, player: int) -> np.ndarray:
        return self.p1 if player == 1 else self.p2


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    singular: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": self.violations, "warnings": self.warnings}


def rcond(a: np.ndarray) -> float:
    if a.size == 0:
        return 1.0
    s = np.linalg.svd(a, compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def singular_principal_subsets(a: np.ndarray, threshold: float = RCOND_WARN) -> list[tuple[int, ...]]:
    """0-based index sets whose principal submatrix of ``a`` is numerically singular."""
    m = a.shape[0]
    bad = []
    for size in range(1, m + 1):
        for idx in itertools.combinations(range(m), size):
            if rcond(a[np.ix_(idx, idx)]) < threshold:
                bad.append(idx)
    return bad


def validate_game(game: ContestGame, principal: bool = True) -> ValidationReport:
    """Invariant violations plus conditioning warnings.

    ``principal=False`` skips the scan over all principal submatrices
    (exponential in ``m``); the full-matrix check always runs.
    """
    rep = ValidationReport()
    if not (0.0 < game.gamma <= 1.0):
        rep.violations.append(f"gamma {game.gamma} outside (0, 1]")
    for i, c in enumerate(game.costs, start=1):
        if not (np.isfinite(c) and c > 0):
            rep.violations.append(f"cost c{i}={c} is not strictly positive")
    if not np.all(np.isfinite(game.values)) or np.any(game.values <= 0):
        rep.violations.append("values must be strictly positive")
    m = game.m
    eye = np.eye(m)
    for i in (1, 2):
        rho = game.rho(i)
        if not np.all(np.isfinite(rho)):
            rep.violations.append(f"rho{i} has non-finite entries")
            continue
        if np.any(np.diag(rho) != 0):
            rep.violations.append(f"rho{i}: nonzero diagonal")
        if np.any(rho < 0):
            rep.violations.append(f"rho{i}: negative entry")
        a = eye + rho
        full = rcond(a) < RCOND_WARN
        rep.singular[i] = full
        if full:
            rep.warnings.append(f"I + rho{i} is numerically singular")
        if not principal:
            continue
        if m <= PRINCIPAL_CHECK_LIMIT:
            subs = [s for s in singular_principal_subsets(a) if len(s) < m]
            if subs:
                shown = ", ".join("{" + ",".join(str(k + 1) for k in s) + "}" for s in subs[:5])
                more = f" (+{len(subs) - 5} more)" if len(subs) > 5 else ""
                rep.warnings.append(
                    f"I + rho{i} has {len(subs)} singular principal submatrices: {shown}{more}")
        else:
            rep.warnings.append(f"rho{i}: principal submatrices not checked for m > {PRINCIPAL_CHECK_LIMIT}")
    return rep


def _check_profile(game: ContestGame, profile: EffortProfile) -> None:
    if profile.e1.shape[0] != game.m:
        raise GameError(f"profile has {profile.e1.shape[0]} battlefields, game has {game.m}")


def effective_efforts(game: ContestGame, profile: EffortProfile) -> EffectiveEfforts:
    _check_profile(game, profile)
    y1 = profile.e1 + game.rho1.T @ profile.e1
    y2 = profile.e2 + game.rho2.T @ profile.e2
    return EffectiveEfforts(y1, y2)


def win_probabilities(game: ContestGame, y: EffectiveEfforts, tie: str = TIE_HALF) -> WinProbabilities:
    g = game.gamma
    a1 = np.power(np.maximum(y.y1, 0.0), g)
    a2 = np.power(np.maximum(y.y2, 0.0), g)
    s = a1 + a2
    ties = s == 0
    if ties.any() and tie == TIE_ERROR:
        raise TieError(f"zero effective effort from both players at battlefield(s) "
                       f"{[int(k) + 1 for k in np.flatnonzero(ties)]}")
    safe = np.where(ties, 1.0, s)
    p1 = np.where(ties, 0.5, a1 / safe)
    p2 = np.where(ties, 0.5, a2 / safe)
    return WinProbabilities(p1, p2, frozenset(int(k) for k in np.flatnonzero(ties)))


def payoffs(game: ContestGame, profile: EffortProfile, tie: str = TIE_HALF) -> tuple[float, float]:
    pr = win_probabilities(game, effective_efforts(game, profile), tie)
    v = game.values
    c1, c2 = game.costs
    return (float(v @ pr.p1 - c1 * profile.e1.sum()),
            float(v @ pr.p2 - c2 * profile.e2.sum()))


def payoff(game: ContestGame, player: int, own, other_y, tie: str = TIE_HALF) -> float:
    """Payoff of ``player`` playing ``own`` against fixed opponent effective efforts."""
    own = np.asarray(own, dtype=float)
    y_own = own + game.rho(player).T @ own
    y = EffectiveEfforts(y_own, other_y) if player == 1 else EffectiveEfforts(other_y, y_own)
    p = win_probabilities(game, y, tie).of(player)
    return float(game.values @ p - game.cost(player) * own.sum())


def marginal_prize(gamma: float, v, y_own, y_other) -> np.ndarray:
    """d(v p_own)/d(y_own) per battlefield.

    Finite at ``y_own == 0`` only when ``gamma == 1``; ``inf`` where the
    derivative blows up (``gamma < 1`` or both efforts zero).
    """
    y_own = np.maximum(np.asarray(y_own, dtype=float), 0.0)
    y_other = np.maximum(np.asarray(y_other, dtype=float), 0.0)
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if gamma == 1.0:
            s = y_own + y_other
            out = np.where(s > 0, v * y_other / np.where(s > 0, s, 1.0) ** 2, np.inf)
        else:
            a_own = y_own ** gamma
            a_oth = y_other ** gamma
            s = a_own + a_oth
            pos = (y_own > 0) & (s > 0)
            val = gamma * np.where(pos, y_own, 1.0) ** (gamma - 1) * a_oth * v / np.where(s > 0, s, 1.0) ** 2
            out = np.where(pos, val, np.inf)
    return out


def payoff_gradient(game: ContestGame, profile: EffortProfile, player: int) -> np.ndarray:
    """Gradient of the player's payoff in own efforts (the first-order condition terms)."""
    y = effective_efforts(game, profile)
    d = marginal_prize(game.gamma, game.values, y.of(player), y.of(3 - player))
    rho = game.rho(player)
    with np.errstate(invalid="ignore"):
        return d + rho @ d - game.cost(player)


def marginal_rates(game: ContestGame, profile: EffortProfile) -> tuple[np.ndarray, np.ndarray]:
    """Per-battlefield marginal prize per unit cost for both players."""
    y = effective_efforts(game, profile)
    mu1 = marginal_prize(game.gamma, game.values, y.y1, y.y2) / game.costs[0]
    mu2 = marginal_prize(game.gamma, game.values, y.y2, y.y1) / game.costs[1]
    return mu1, mu2


@dataclass
class VerificationReport:
    """Named pass/fail checks with a human-readable detail each."""

    checks: dict = field(default_factory=dict)

    def record(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks[name] = (bool(passed), detail)
        return bool(passed)

    @property
    def ok(self) -> bool:
        return all(p for p, _ in self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [f"{k}: {d}" for k, (p, d) in self.checks.items() if not p]

    def to_dict(self) -> dict:
        return {"ok": self.ok,
                "checks": {k: {"passed": p, "detail": d} for k, (p, d) in self.checks.items()}}
