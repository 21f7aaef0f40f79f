"""One-parameter sweeps over a base game, written as CSV."""

from __future__ import annotations

import csv
import io
import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ContestGame, GameError
from .solver import SolverError, solve

OUTPUT_GROUPS = ("efforts", "probabilities", "totals", "payoffs", "aggregate", "rates")
DEFAULT_OUTPUTS = ("efforts", "probabilities", "totals", "payoffs", "aggregate")

_ENTRY = re.compile(r"^rho([12])\[(\d+),(\d+)\]$")
_WEIGHT = re.compile(r"^rho([12]?)\.weight$")
_COST = re.compile(r"^costs\[([12])\]$")


def fmt(x: float) -> str:
    """17 significant digits: parses back to the identical double."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SweepSpec:
    """``parameter`` is one of ``rho2[1,2]`` (1-based entry), ``rho1.weight`` /
    ``rho.weight`` (every positive entry of the base network(s) set to the
    value), ``costs[2]`` or ``gamma``."""

    base_game: ContestGame
    parameter: str
    grid: tuple
    outputs: tuple = DEFAULT_OUTPUTS

    def __post_init__(self):
        if not self.grid:
            raise GameError("sweep grid is empty")
        object.__setattr__(self, "grid", tuple(float(x) for x in self.grid))
        bad = [o for o in self.outputs if o not in OUTPUT_GROUPS]
        if bad:
            raise GameError(f"unknown output group(s): {bad}")
        object.__setattr__(self, "outputs", tuple(self.outputs))
        self.game_at(self.grid[0])

    def game_at(self, value: float) -> ContestGame:
        g = self.base_game
        p = self.parameter.replace(" ", "")
        if mt := _ENTRY.match(p):
            i, k, l = int(mt[1]), int(mt[2]) - 1, int(mt[3]) - 1
            if not (0 <= k < g.m and 0 <= l < g.m) or k == l:
                raise GameError(f"{self.parameter}: entry outside the off-diagonal of a {g.m}x{g.m} network")
            if value < 0:
                raise GameError(f"{self.parameter}: spillover must be non-negative")
            rho = np.array(g.rho(i))
            rho[k, l] = value
            return g.replace(**{f"rho{i}": rho})
        if mt := _WEIGHT.match(p):
            if value < 0:
                raise GameError(f"{self.parameter}: spillover must be non-negative")
            players = (int(mt[1]),) if mt[1] else (1, 2)
            changes = {}
            for i in players:
                base = g.rho(i)
                if not np.any(base > 0):
                    raise GameError(f"rho{i} has no links to reweight")
                changes[f"rho{i}"] = np.where(base > 0, value, 0.0)
            return g.replace(**changes)
        if mt := _COST.match(p):
            if value <= 0:
                raise GameError("costs must be positive")
            costs = list(g.costs)
            costs[int(mt[1]) - 1] = value
            return g.replace(costs=tuple(costs))
        if p == "gamma":
            if not 0 < value <= 1:
                raise GameError("gamma must lie in (0, 1]")
            return g.replace(gamma=value)
        raise GameError(f"unknown sweep parameter {self.parameter!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        for key in ("base_game", "parameter", "grid"):
            if key not in data:
                raise GameError(f"sweep spec: missing field {key!r}")
        grid = data["grid"]
        if isinstance(grid, dict):
            try:
                start, stop, step = float(grid["start"]), float(grid["stop"]), float(grid["step"])
            except KeyError as exc:
                raise GameError(f"sweep grid: missing {exc}") from exc
            if step <= 0:
                raise GameError("sweep grid: step must be positive")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            grid = [start + j * step for j in range(n)]
        return cls(ContestGame.from_dict(data["base_game"]), str(data["parameter"]), tuple(grid),
                   tuple(data.get("outputs", DEFAULT_OUTPUTS)))

    @classmethod
    def load(cls, path) -> "SweepSpec":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GameError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        return cls.from_dict(data)


@dataclass
class SweepRow:
    index: int
    value: float
    status: str
    supports: tuple | None = None
    numbers: dict | None = None
    regime_change: bool = False


def _solve_point(args):
    spec, j = args
    value = spec.grid[j]
    try:
        game = spec.game_at(value)
        rep = solve(game)
    except (GameError, SolverError, np.linalg.LinAlgError) as exc:
        return SweepRow(j, value, f"error: {exc}")
    m = game.m
    nums = {}
    for i in (1, 2):
        if "efforts" in spec.outputs:
            for k in range(m):
                nums[f"e{i}_{k + 1}"] = rep.profile.effort(i)[k]
    if "probabilities" in spec.outputs:
        for k in range(m):
            nums[f"p1_{k + 1}"] = rep.probs.p1[k]
    if "rates" in spec.outputs:
        for i, mu in ((1, rep.mu1), (2, rep.mu2)):
            for k in range(m):
                nums[f"mu{i}_{k + 1}"] = mu[k]
    if "totals" in spec.outputs:
        nums["total1"], nums["total2"] = rep.total_efforts
    if "aggregate" in spec.outputs:
        nums["aggregate"] = sum(rep.total_efforts)
    if "payoffs" in spec.outputs:
        nums["payoff1"], nums["payoff2"] = rep.payoffs
    nums["kkt_residual"] = rep.kkt_residual
    sp = tuple(tuple(s) for s in rep.supports.to_lists())
    return SweepRow(j, value, rep.method, sp, nums)


@dataclass
class SweepTable:
    spec: SweepSpec
    rows: list

    @property
    def columns(self) -> list[str]:
        for r in self.rows:
            if r.numbers is not None:
                return list(r.numbers)
        return []

    def column(self, name: str) -> np.ndarray:
        return np.array([r.numbers[name] if r.numbers else np.nan for r in self.rows])

    def to_csv(self) -> str:
        cols = self.columns
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "value", "status", "support1", "support2", "regime_change"] + cols)
        for r in self.rows:
            sup = ["", ""] if r.supports is None else [";".join(map(str, s)) for s in r.supports]
            nums = [fmt(r.numbers[c]) for c in cols] if r.numbers else [""] * len(cols)
            w.writerow([r.index, fmt(r.value), r.status] + sup + [int(r.regime_change)] + nums)
        return buf.getvalue()

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv())


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepTable:
    work = [(spec, j) for j in range(len(spec.grid))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_solve_point, work))
    else:
        rows = [_solve_point(w) for w in work]
    rows.sort(key=lambda r: r.index)
    prev = None
    for r in rows:
        if r.supports is None:
            continue
        r.regime_change = prev is not None and r.supports != prev
        prev = r.supports
    return SweepTable(spec, rows)


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
