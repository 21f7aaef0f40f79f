"""``netcontest`` command line.

Exit status: 0 success, 1 invalid input, 2 solver or verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import design as dz
from .core import ContestGame, GameError, load_game, validate_game
from .endogenous import endogenous_equilibrium, verify_endogenous
from .repro import case_by_id, default_corpus, run_all
from .solver import SolverError, solve
from .sweep import SweepSpec, run_sweep

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise GameError(f"not a comma-separated list of numbers: {text!r}") from exc


def _optional_floats(text: str | None):
    if text is None:
        return None
    out = []
    for x in text.split(","):
        x = x.strip()
        try:
            out.append(None if x in ("", "-") else float(x))
        except ValueError as exc:
            raise GameError(f"bad lambda1 entry {x!r}") from exc
    return out


def cmd_validate(args) -> int:
    game = load_game(args.game)
    rep = validate_game(game)
    print(json.dumps(rep.to_dict(), indent=2))
    return EXIT_OK if rep.ok else EXIT_INPUT


def cmd_solve(args) -> int:
    game = load_game(args.game)
    val = validate_game(game)
    if not val.ok:
        for v in val.violations:
            print(f"invalid game: {v}", file=sys.stderr)
        return EXIT_INPUT
    rep = solve(game, tol=args.tol, oracle=args.oracle)
    _emit(rep.to_json(), args.out)
    verdict = rep.diagnostics.get("oracle", {}).get("verdict")
    return EXIT_SOLVER if verdict == "disagree" else EXIT_OK


def cmd_design(args) -> int:
    if args.target == "max-effort":
        net = dz.design_max_effort_equal(args.c1, args.c2, args.m, args.v, args.lambda1 or 0.0)
        values = np.full(args.m, args.v)
    elif args.target == "max-welfare":
        net = dz.design_max_welfare(args.c1, args.c2, args.m, args.gamma, args.v, args.epsilon)
        values = np.full(args.m, args.v)
    else:
        if args.values is None:
            raise GameError("general design needs --values")
        values = np.array(_floats(args.values))
        net = dz.design_max_effort_general(args.c1, args.c2, values, _optional_floats(args.lambda1_groups))
    game = net.game(args.c1, args.c2, args.gamma, values)
    data = game.to_dict()
    data["design"] = net.to_dict()["design"]
    status = EXIT_OK
    if args.verify:
        ver = dz.verify_design(net, args.c1, args.c2, args.gamma, values)
        data["verification"] = ver.to_dict()
        status = EXIT_OK if ver.ok else EXIT_SOLVER
    _emit(json.dumps(data, indent=2), args.out)
    return status


def cmd_endogenous(args) -> int:
    game = load_game(args.game)
    val = validate_game(game.replace(rho1=np.zeros((game.m, game.m)), rho2=np.zeros((game.m, game.m))))
    if not val.ok:
        for v in val.violations:
            print(f"invalid game: {v}", file=sys.stderr)
        return EXIT_INPUT
    c1, c2 = game.costs
    prof = endogenous_equilibrium(game.values, c1, c2, game.gamma, args.hub1, args.hub2)
    ver = verify_endogenous(prof, game.values, c1, c2, game.gamma)
    data = {"gamma": game.gamma, "costs": list(game.costs), "values": game.values.tolist()}
    data.update(prof.to_dict())
    data["verification"] = ver.to_dict()
    _emit(json.dumps(data, indent=2), args.out)
    return EXIT_OK if ver.ok else EXIT_SOLVER


def cmd_repro(args) -> int:
    cases = case_by_id(args.case) if args.case else default_corpus()
    rep = run_all(args.tol, oracle=args.oracle, cases=cases)
    print(rep.table())
    if args.json:
        Path(args.json).write_text(rep.to_json() + "\n")
    return EXIT_OK if rep.passed else EXIT_SOLVER


def cmd_sweep(args) -> int:
    spec = SweepSpec.load(args.spec)
    table = run_sweep(spec, jobs=args.jobs)
    table.write(args.out)
    failed = sum(r.numbers is None for r in table.rows)
    flags = [r.value for r in table.rows if r.regime_change]
    print(f"{len(table.rows)} points, {failed} failed, support changes at {flags}", file=sys.stderr)
    return EXIT_OK if failed == 0 else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netcontest", description="Contests on spillover networks.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a game file")
    s.add_argument("game")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="certified equilibrium of a game file")
    s.add_argument("game")
    s.add_argument("--oracle", action="store_true", help="cross-check with best-response dynamics")
    s.add_argument("--tol", type=float, default=None, help="certification tolerance")
    s.add_argument("--out", help="write the report here instead of stdout")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("design", help="effort- or welfare-maximising networks")
    s.add_argument("target", choices=["max-effort", "max-welfare", "general"])
    s.add_argument("--c1", type=float, default=1.0)
    s.add_argument("--c2", type=float, default=1.0)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--v", type=float, default=1.0, help="common battlefield value")
    s.add_argument("--values", help="comma-separated values (general)")
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--lambda1", type=float, default=None, help="player 1 link weight (max-effort)")
    s.add_argument("--lambda1-groups", default=None,
                   help="comma-separated per-group weights, blank for default (general)")
    s.add_argument("--epsilon", type=float, default=0.1)
    s.add_argument("--verify", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_design)

    s = sub.add_parser("endogenous", help="out-star equilibrium with chosen hubs")
    s.add_argument("game")
    s.add_argument("--hub1", type=int, required=True)
    s.add_argument("--hub2", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_endogenous)

    s = sub.add_parser("repro", help="run the worked-example corpus")
    s.add_argument("--case", help="case id or id prefix, e.g. star_line or two_node")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--oracle", action="store_true")
    s.add_argument("--json", help="also write the corpus report as JSON")
    s.set_defaults(func=cmd_repro)

    s = sub.add_parser("sweep", help="one-parameter sweep to CSV")
    s.add_argument("spec")
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GameError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
