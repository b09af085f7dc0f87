"""Command line entry point: ``robusteq solve|verify|deviator|qbf-gen|meancycle``.

Results go to standard output as one JSON document. Exit status: 0 when the
command completed (a "no" answer included), 1 on bad input, 2 when a search
budget ran out before a decision.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from .deviator import DeviatorGame, SizeError
from .game import GameError
from .io import deviator_to_dict, game_to_dict, load_game, load_profile
from .mdmp import RobustQuery, solve_robustness
from .numerics import WeightedDigraph, extreme_mean_cycle, format_rational, parse_rational
from .oracle import is_robust
from .qbf import compile_game, load_qdimacs, qbf_eval
from .twoplayer import DEFAULT_BUDGET

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2


def _digest(path) -> dict:
    data = Path(path).read_bytes()
    return {"path": str(path), "sha256": hashlib.sha256(data).hexdigest()}


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


def default_workers() -> int:
    env = os.environ.get("ROBUSTEQ_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    game = load_game(args.game)
    loaded = time.perf_counter()
    query = RobustQuery(args.k, args.t, parse_rational(args.r), args.denbound, args.mode, args.budget,
                        args.workers or default_workers())

    def trace(entry):
        sys.stderr.write(json.dumps(entry) + "\n")

    res = solve_robustness(game, query, trace=trace if args.trace else None)
    doc = {"command": "solve", "inputs": {"game": _digest(args.game)},
           "config": {"k": args.k, "t": args.t, "r": format_rational(query.r), "mode": args.mode,
                      "denbound": res.stats.get("denbound", args.denbound), "budget": args.budget}}
    doc.update(res.to_json(game))
    if args.timings:
        doc["timings"] = {"load": loaded - t0, **res.stats.get("timings", {})}
    _emit(doc)
    return EXIT_INCONCLUSIVE if res.decision == "inconclusive" else EXIT_OK


def cmd_verify(args) -> int:
    game = load_game(args.game)
    profile = load_profile(args.profile, game)
    verdict = is_robust(game, profile, args.k, args.t, parse_rational(args.r))
    doc = {"command": "verify", "inputs": {"game": _digest(args.game), "profile": _digest(args.profile)},
           "config": {"k": args.k, "t": args.t, "r": format_rational(parse_rational(args.r))}}
    doc.update(verdict.to_json(game))
    _emit(doc)
    return EXIT_OK


def cmd_deviator(args) -> int:
    game = load_game(args.game)
    doc = {"command": "deviator", "inputs": {"game": _digest(args.game)}}
    doc.update(deviator_to_dict(DeviatorGame(game, args.max_players)))
    _emit(doc)
    return EXIT_OK


def cmd_qbf_gen(args) -> int:
    phi = load_qdimacs(args.input)
    game, query = compile_game(phi)
    out = Path(args.out)
    out.write_text(json.dumps(game_to_dict(game), indent=1) + "\n", encoding="utf-8")
    label = Path(args.label) if args.label else out.with_suffix(".label.json")
    valid = qbf_eval(phi)
    label.write_text(json.dumps({"valid": valid, "k": query.k, "t": query.t, "r": format_rational(query.r)})
                     + "\n", encoding="utf-8")
    _emit({"command": "qbf-gen", "inputs": {"formula": _digest(args.input)}, "game": str(out),
           "label": str(label), "valid": valid, "players": game.n, "states": len(game.states),
           "query": {"k": query.k, "t": query.t, "r": format_rational(query.r)}})
    return EXIT_OK


def cmd_meancycle(args) -> int:
    try:
        doc = json.loads(Path(args.graph).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GameError(f"{args.graph}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    g = WeightedDigraph([str(v) for v in doc.get("vertices", [])])
    for k, e in enumerate(doc.get("edges", [])):
        if len(e) != 3:
            raise GameError(f"{args.graph}: edge #{k} must be [src, dst, weights]")
        w = e[2] if isinstance(e[2], list) else [e[2]]
        g.add_edge(str(e[0]), str(e[1]), [int(x) for x in w])
    start = args.start if args.start is not None else doc.get("start")
    if start is not None and str(start) not in g.vertices:
        raise GameError(f"unknown start vertex {start!r}")
    mc = extreme_mean_cycle(g, args.dimension, args.sense, None if start is None else str(start))
    _emit({"command": "meancycle", "sense": args.sense, "dimension": args.dimension,
           "value": None if not mc.found else format_rational(mc.value), "cycle": list(mc.cycle),
           "note": "" if mc.found else "no cycle"})
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1); 2 is reserved for inconclusive runs
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="robusteq", description="Robust equilibria in weighted concurrent games.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide whether a (k,t,r)-robust equilibrium exists")
    p.add_argument("--game", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, default=0)
    p.add_argument("--r", default="0", help="rational, e.g. 1/2")
    p.add_argument("--denbound", type=int, default=None,
                   help="largest denominator of candidate payoffs (default: reachable deviator states)")
    p.add_argument("--mode", choices=("enum", "lp"), default="enum")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max Adam strategies per search")
    p.add_argument("--workers", type=int, default=None, help="default: $ROBUSTEQ_WORKERS or CPU count")
    p.add_argument("--trace", action="store_true", help="per-component JSON lines on stderr")
    p.add_argument("--timings", action="store_true", help="add wall-clock timings to the output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a finite-memory profile")
    p.add_argument("--game", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, default=0)
    p.add_argument("--r", default="0")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("deviator", help="dump the reachable deviator game")
    p.add_argument("--game", required=True)
    p.add_argument("--max-players", type=int, default=8)
    p.set_defaults(func=cmd_deviator)

    p = sub.add_parser("qbf-gen", help="compile a QDIMACS-style formula into a game")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="game JSON to write")
    p.add_argument("--label", help="label file (default: OUT with .label.json)")
    p.set_defaults(func=cmd_qbf_gen)

    p = sub.add_parser("meancycle", help="extreme mean cycle of a weighted graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--dimension", type=int, default=0)
    p.add_argument("--sense", choices=("max", "min"), default="max")
    p.add_argument("--start")
    p.set_defaults(func=cmd_meancycle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GameError, SizeError, OSError, ValueError) as exc:
        sys.stderr.write(f"robusteq {args.command}: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
