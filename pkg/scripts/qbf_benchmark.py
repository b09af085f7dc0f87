"""Generate random QBF instances, solve their games and compare with brute-force labels.

    python3 scripts/qbf_benchmark.py --count 20 --vars 2 4 --clauses 1 3 --out bench/
"""

import argparse
import json
import random
import time
from pathlib import Path

from robusteq.io import game_to_dict
from robusteq.mdmp import solve_robustness
from robusteq.numerics import format_rational
from robusteq.qbf import REFERENCE_FORMULA, compile_game, qbf_eval, random_formula, to_qdimacs


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--vars", type=int, nargs="+", default=[2, 4])
    ap.add_argument("--clauses", type=int, nargs=2, default=[1, 3], metavar=("MIN", "MAX"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="directory for .qdimacs, game and label files")
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    formulas = [REFERENCE_FORMULA] + [random_formula(rng.choice(args.vars), rng.randint(*args.clauses), rng)
                                   for _ in range(args.count - 1)]
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, phi in enumerate(formulas):
        game, query = compile_game(phi)
        valid = qbf_eval(phi)
        t0 = time.perf_counter()
        res = solve_robustness(game, query)
        secs = time.perf_counter() - t0
        ok = res.decision == ("yes" if valid else "no")
        rows.append({"formula": phi.describe(), "valid": valid, "decision": res.decision, "agree": ok,
                     "players": game.n, "states": len(game.states), "seconds": round(secs, 3)})
        print(f"{i:3d} {'ok ' if ok else 'BAD'} valid={valid!s:5} {res.decision:12} {secs:6.2f}s  {phi.describe()}")
        if out:
            stem = out / f"qbf{i:03d}"
            stem.with_suffix(".qdimacs").write_text(to_qdimacs(phi))
            stem.with_suffix(".json").write_text(json.dumps(game_to_dict(game)) + "\n")
            stem.with_suffix(".label.json").write_text(json.dumps(
                {"valid": valid, "k": query.k, "t": query.t, "r": format_rational(query.r)}) + "\n")
    bad = sum(not r["agree"] for r in rows)
    total = sum(r["seconds"] for r in rows)
    print(f"{len(rows)} formulas, {bad} mismatches, {total:.1f}s total")
    if out:
        (out / "summary.json").write_text(json.dumps(rows, indent=1) + "\n")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
