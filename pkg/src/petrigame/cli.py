"""Command line front end.

Exit codes: 0 success; 1 the game or check failed (validation errors,
failed expectation check); 2 usage or file trouble; 3 node budget
exceeded; 4 the requested solver does not apply to this game.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import math
import statistics
import sys
from dataclasses import replace
from fractions import Fraction

from .engine import run_local_session
from .gen import GenParams, generate
from .lang import GameDescription, ParseError, parse, serialize, validate
from .solve import (
    ImperfectInformation,
    NotConstantSum,
    NotTwoPlayer,
    backward_induction,
    expected_value,
    export_efg,
    export_nfg,
    pure_nash,
    to_normal_form,
    zero_sum_value,
)
from .unfold import DEFAULT_BUDGET, BudgetExceeded, unfold, unfold_compact

OK, BAD_GAME, BAD_USAGE, OVER_BUDGET, NO_SOLVER = 0, 1, 2, 3, 4


def _load(path: str) -> GameDescription:
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return parse(text)


def _emit(data: dict, as_json: bool, lines) -> None:
    if as_json:
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def cmd_validate(args) -> int:
    try:
        desc = _load(args.game)
    except ParseError as e:
        for d in e.diagnostics:
            print(d, file=sys.stderr)
        return BAD_GAME
    diags = validate(desc)
    data = {
        "ok": not any(d.severity == "error" for d in diags),
        "diagnostics": [
            {"severity": d.severity, "message": d.message, "line": d.line} for d in diags
        ],
    }
    _emit(data, args.json, [str(d) for d in diags] + (["ok"] if data["ok"] else []))
    return OK if data["ok"] else BAD_GAME


def cmd_unfold(args) -> int:
    desc = _load(args.game)
    if args.compact:
        tree = unfold_compact(desc, max_stored=args.budget)
        stats = tree.stats()
        stats["stored_nodes"] = len(tree)
    else:
        stats = unfold(desc, budget=args.budget).stats()
    _emit(stats, args.json, [f"{k}: {v}" for k, v in stats.items()])
    return OK


def _solve_auto(tree):
    try:
        return "induction", backward_induction(tree)
    except ImperfectInformation:
        pass
    try:
        return "zerosum", zero_sum_value(tree)
    except (NotTwoPlayer, NotConstantSum):
        pass
    return "enumerate", None


def cmd_solve(args) -> int:
    desc = _load(args.game)
    compact = args.method == "induction" and args.compact
    tree = unfold_compact(desc, max_stored=args.budget) if compact else unfold(desc, budget=args.budget)
    method = args.method
    result = None
    if method == "auto":
        method, result = _solve_auto(tree)
    if method == "induction":
        r = result or backward_induction(tree)
        vals = {p: str(v) for p, v in zip(desc.players, r.root_values)}
        _emit({"method": "induction", "values": vals}, args.json,
              ["method: induction"] + [f"{p}: {v}" for p, v in vals.items()])
    elif method == "zerosum":
        r = result or zero_sum_value(tree)
        vals = {p: str(v) for p, v in zip(desc.players, r.values)}
        beh = {
            p: {str(i): {a: str(q) for a, q in acts.items()} for i, acts in infos.items()}
            for p, infos in r.behavior.items()
        }
        _emit({"method": "zerosum", "values": vals, "behavior": beh}, args.json,
              ["method: zerosum"] + [f"{p}: {v}" for p, v in vals.items()])
    else:
        nf = to_normal_form(tree, budget=args.budget)
        eqs = sorted(pure_nash(nf))
        data = {
            "method": "enumerate",
            "shape": list(nf.shape),
            "pure_nash": [list(e) for e in eqs],
        }
        _emit(data, args.json,
              [f"method: enumerate", f"shape: {'x'.join(map(str, nf.shape))}"]
              + [" / ".join(e) for e in eqs])
    return OK


def cmd_export(args) -> int:
    desc = _load(args.game)
    tree = unfold(desc, budget=args.budget)
    if args.format == "efg":
        text = export_efg(tree)
    else:
        text = export_nfg(to_normal_form(tree, budget=args.budget))
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return OK


def cmd_serve(args) -> int:
    from .server import ServerConfig, load_config, run_server

    desc = _load(args.game)
    cfg = load_config(args.config)
    overrides = {}
    if args.host is not None:
        overrides["host"] = args.host
    if args.port is not None:
        overrides["port"] = args.port
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.log_dir is not None:
        overrides["log_dir"] = args.log_dir
    if args.bots:
        overrides["bots"] = dict(item.split("=", 1) for item in args.bots.split(","))
    cfg = replace(cfg, **overrides)
    log_path = asyncio.run(run_server(desc, cfg))
    if log_path:
        print(f"log written to {log_path}")
    return OK


def simulate_expectation_check(
    desc: GameDescription,
    sessions: int,
    seed: int,
    budget: int = DEFAULT_BUDGET,
) -> dict:
    """Run random-bot sessions and compare means with the uniform-play tree value.

    Random bots pick uniformly from their menus, which is exactly the
    uniform behavior profile on the unfolding, so the sample mean of each
    player's payoff must sit within sampling noise of the tree expectation.
    Verdict per player: |mean - expected| <= 3 standard errors.
    """
    tree = unfold(desc, budget=budget)
    expected = expected_value(tree, None)
    samples: dict[str, list[Fraction]] = {p: [] for p in desc.players}
    for i in range(sessions):
        eng = run_local_session(desc, seed=seed + i)
        assert eng.payoffs is not None
        for p, v in zip(desc.players, eng.payoffs):
            samples[p].append(v)
    report: dict = {"sessions": sessions, "players": {}, "ok": True}
    for pi, p in enumerate(desc.players):
        xs = samples[p]
        mean = Fraction(sum(xs), len(xs))
        if len(xs) > 1:
            se = statistics.stdev(float(x) for x in xs) / math.sqrt(len(xs))
        else:
            se = 0.0
        diff = abs(float(mean - expected[pi]))
        ok = diff <= 3 * se if se > 0 else mean == expected[pi]
        report["players"][p] = {
            "mean": str(mean),
            "expected": str(expected[pi]),
            "stderr": se,
            "ok": ok,
        }
        report["ok"] = report["ok"] and ok
    return report


def cmd_simulate(args) -> int:
    desc = _load(args.game)
    if args.check_expectation:
        report = simulate_expectation_check(desc, args.sessions, args.seed, budget=args.budget)
        lines = [
            f"{p}: mean {r['mean']} expected {r['expected']} "
            f"(se {r['stderr']:.4g}) {'ok' if r['ok'] else 'MISMATCH'}"
            for p, r in report["players"].items()
        ]
        _emit(report, args.json, lines)
        return OK if report["ok"] else BAD_GAME
    totals = {p: Fraction(0) for p in desc.players}
    for i in range(args.sessions):
        eng = run_local_session(desc, seed=args.seed + i)
        assert eng.payoffs is not None
        for p, v in zip(desc.players, eng.payoffs):
            totals[p] += v
    means = {p: str(t / args.sessions) for p, t in totals.items()}
    _emit({"sessions": args.sessions, "mean": means}, args.json,
          [f"{p}: {v}" for p, v in means.items()])
    return OK


def cmd_gen(args) -> int:
    params = GenParams(
        seed=args.seed,
        flavor=args.flavor,
        players=args.players,
        places=args.places,
        transitions=args.transitions,
        chance_groups=args.chance_groups,
        horizon=args.horizon,
        max_nodes=args.max_nodes,
    )
    text = serialize(generate(params))
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="petrigame", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, budget=True):
        p.add_argument("game", help="game description file ('-' for stdin)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if budget:
            p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                           help="node budget for unfolding")

    p = sub.add_parser("validate", help="check a description and print diagnostics")
    common(p, budget=False)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("unfold", help="unfold and print tree statistics")
    common(p)
    p.add_argument("--compact", action="store_true",
                   help="shared-subgame form (sequential fully-visible games)")
    p.set_defaults(fn=cmd_unfold)

    p = sub.add_parser("solve", help="solve the unfolded game")
    common(p)
    p.add_argument("--method", choices=["auto", "induction", "zerosum", "enumerate"],
                   default="auto")
    p.add_argument("--compact", action="store_true",
                   help="with --method induction: solve the shared-subgame form")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("export", help="write the game in interchange text form")
    common(p)
    p.add_argument("--format", choices=["efg", "nfg"], required=True)
    p.add_argument("-o", "--out", default="-", help="output path ('-' for stdout)")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("serve", help="host one session over websockets")
    p.add_argument("game")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--log-dir")
    p.add_argument("--bots", help="fill seats with bots, e.g. P2=random,P3=first")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("simulate", help="run seeded bot sessions in-process")
    common(p)
    p.add_argument("--sessions", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check-expectation", action="store_true",
                   help="compare the sample mean against the uniform-play value")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("gen", help="generate a random description")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--flavor", choices=["general", "duel"], default="general")
    p.add_argument("--players", type=int, default=2)
    p.add_argument("--places", type=int, default=4)
    p.add_argument("--transitions", type=int, default=6)
    p.add_argument("--chance-groups", type=int, default=1)
    p.add_argument("--horizon", type=int, default=3)
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(fn=cmd_gen)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as e:
        for d in e.diagnostics:
            print(d, file=sys.stderr)
        return BAD_GAME
    except BudgetExceeded as e:
        print(e, file=sys.stderr)
        return OVER_BUDGET
    except (ImperfectInformation, NotTwoPlayer, NotConstantSum, ValueError) as e:
        print(e, file=sys.stderr)
        return NO_SOLVER
    except OSError as e:
        print(e, file=sys.stderr)
        return BAD_USAGE


if __name__ == "__main__":
    sys.exit(main())
