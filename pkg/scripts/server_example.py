"""Robustness queries on the two-client file server fragment.

Sweeps (k, t, r) and prints the decision and witness payoff for each query.

    python3 scripts/server_example.py --denbound 4
"""

import argparse
import itertools
import time
from fractions import Fraction
from pathlib import Path

from robusteq.io import load_game
from robusteq.mdmp import RobustQuery, solve_robustness
from robusteq.numerics import format_rational

DEFAULT_GAME = Path(__file__).resolve().parent.parent / "tests" / "data" / "server_fragment.json"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--game", default=str(DEFAULT_GAME))
    ap.add_argument("--denbound", type=int, default=4, help="largest candidate denominator")
    ap.add_argument("--r", nargs="+", default=["0", "1/2", "1"])
    ap.add_argument("--mode", choices=("enum", "lp"), default="enum")
    args = ap.parse_args(argv)

    game = load_game(args.game)
    print(f"{game.n} players, {len(game.states)} states")
    for k, t, r in itertools.product(range(game.n + 1), range(game.n + 1), args.r):
        t0 = time.perf_counter()
        res = solve_robustness(game, RobustQuery(k, t, Fraction(r), args.denbound, args.mode))
        pay = "-" if res.payoff is None else " ".join(format_rational(x) for x in res.payoff)
        print(f"k={k} t={t} r={r:4} {res.decision:12} payoff={pay:12} {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    raise SystemExit(main())
