"""QBF formulas and their encoding as robustness queries.

Formulas are prenex, strictly alternating ``forall x1 exists x2 ... exists xn``
with n even and clauses of exactly three literals (nonzero ints, DIMACS
style). The game has a player ``Am`` for each positive literal ``xm``, a
player ``Bm`` for each negative literal, plus ``Adam`` (universal choices)
and ``Eve`` (existential choices and clause literal choices).

Picking ``Bm`` at the m-th quantifier sets ``xm`` true, picking ``Am`` sets
it false. The owner of the picked literal state may bail out to the sink
``bot`` (paying 1 to Eve and every literal player) or continue. After all
variables, Eve picks one literal per clause; its owner may send the play to
``top`` (paying 1 to Adam) or continue to the next clause. The formula is
valid iff the game has an (n+1)-resilient equilibrium.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .game import ConcurrentGame, GameError, make_game
from .mdmp import RobustQuery

DUMMY = "-"


@dataclass(frozen=True)
class QbfFormula:
    n: int
    clauses: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self):
        if self.n <= 0 or self.n % 2:
            raise GameError(f"variable count must be positive and even, got {self.n}")
        for c in self.clauses:
            if len(c) != 3:
                raise GameError(f"clause {list(c)} does not have exactly 3 literals")
            for lit in c:
                if lit == 0 or abs(lit) > self.n:
                    raise GameError(f"literal {lit} out of range 1..{self.n}")

    def describe(self) -> str:
        quant = " ".join(("A" if m % 2 else "E") + f"x{m}" for m in range(1, self.n + 1))
        body = " & ".join("(" + " | ".join(("~" if l < 0 else "") + f"x{abs(l)}" for l in c) + ")"
                          for c in self.clauses)
        return f"{quant}. {body}" if body else f"{quant}. true"


def _satisfied(clauses, val: Dict[int, bool]) -> bool:
    return all(any(val[abs(l)] == (l > 0) for l in c) for c in clauses)


def qbf_eval(phi: QbfFormula) -> bool:
    """Brute-force evaluation; odd variables universal, even ones existential."""
    val: Dict[int, bool] = {}

    def go(m):
        if m > phi.n:
            return _satisfied(phi.clauses, val)
        results = []
        for b in (False, True):
            val[m] = b
            results.append(go(m + 1))
            # short-circuit: universal fails on a False, existential succeeds on a True
            if m % 2 and not results[-1]:
                return False
            if not m % 2 and results[-1]:
                return True
        return m % 2 == 1

    return go(1)


def parse_qdimacs(text: str, source: str = "<qbf>") -> QbfFormula:
    """``p cnf N K`` header, quantifier lines (``a``/``e`` ... ``0``), clause lines."""
    n = k = None
    order: List[Tuple[str, int]] = []
    clauses = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        try:
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "cnf":
                    raise GameError("expected 'p cnf VARS CLAUSES'")
                n, k = int(parts[2]), int(parts[3])
                continue
            if n is None:
                raise GameError("missing 'p cnf' header")
            if parts[0] in ("a", "e"):
                nums = [int(x) for x in parts[1:]]
                if not nums or nums[-1] != 0:
                    raise GameError("quantifier line must end with 0")
                order.extend((parts[0], v) for v in nums[:-1])
                continue
            nums = [int(x) for x in parts]
            if nums[-1] != 0:
                raise GameError("clause line must end with 0")
            clause = tuple(nums[:-1])
            if len(clause) != 3:
                raise GameError(f"clause {list(clause)} does not have exactly 3 literals")
            bad = [l for l in clause if l == 0 or abs(l) > n]
            if bad:
                raise GameError(f"literal {bad[0]} out of range 1..{n}")
            clauses.append(clause)
        except GameError as exc:
            raise GameError(f"{source}: line {lineno}: {exc}") from None
        except ValueError:
            raise GameError(f"{source}: line {lineno}: not an integer in {line!r}") from None
    if n is None:
        raise GameError(f"{source}: missing 'p cnf' header")
    expected = [("a" if m % 2 else "e", m) for m in range(1, n + 1)]
    if order != expected:
        raise GameError(f"{source}: prefix must be 'a 1 0', 'e 2 0', ... strictly alternating over 1..{n}")
    if k is not None and len(clauses) != k:
        raise GameError(f"{source}: header announces {k} clauses, found {len(clauses)}")
    return QbfFormula(n, tuple(clauses))


def load_qdimacs(path) -> QbfFormula:
    return parse_qdimacs(Path(path).read_text(encoding="utf-8"), str(path))


def to_qdimacs(phi: QbfFormula) -> str:
    lines = [f"p cnf {phi.n} {len(phi.clauses)}"]
    lines += [f"{'a' if m % 2 else 'e'} {m} 0" for m in range(1, phi.n + 1)]
    lines += [" ".join(str(l) for l in c) + " 0" for c in phi.clauses]
    return "\n".join(lines) + "\n"


def literal_player(lit: int) -> str:
    return f"A{lit}" if lit > 0 else f"B{-lit}"


def compile_game(phi: QbfFormula) -> Tuple[ConcurrentGame, RobustQuery]:
    """The reachability game of the formula and its (n+1)-resilience query."""
    n = phi.n
    players = ["Adam", "Eve"] + [f"A{m}" for m in range(1, n + 1)] + [f"B{m}" for m in range(1, n + 1)]
    literal_players = players[2:]
    states: List[str] = []
    owner: Dict[str, str] = {}
    moves: Dict[str, Dict[str, str]] = {}  # state -> owner action -> successor

    def add(name, who, edges):
        states.append(name)
        owner[name] = who
        moves[name] = edges

    first_clause = "c1" if phi.clauses else "bot"
    for m in range(1, n + 1):
        nxt = f"q{m + 1}" if m < n else first_clause
        edges = {"A": f"lit_A{m}", "B": f"lit_B{m}"}
        if m % 2:
            edges["bot"] = "bot"
        add(f"q{m}", "Adam" if m % 2 else "Eve", edges)
        add(f"lit_A{m}", f"A{m}", {"cont": nxt, "bot": "bot"})
        add(f"lit_B{m}", f"B{m}", {"cont": nxt, "bot": "bot"})
    for j, clause in enumerate(phi.clauses, 1):
        nxt = f"c{j + 1}" if j < len(phi.clauses) else "bot"
        add(f"c{j}", "Eve", {f"l{idx}": f"c{j}_{idx}" for idx in range(1, 4)})
        for idx, lit in enumerate(clause, 1):
            add(f"c{j}_{idx}", literal_player(lit), {"cont": nxt, "top": "top"})
    add("bot", None, {})
    add("top", None, {})
    actions = sorted({a for e in moves.values() for a in e} | {DUMMY})
    available = {}
    for s in states:
        per = {p: [DUMMY] for p in players}
        if owner[s] is not None:
            per[owner[s]] = list(moves[s])
        available[s] = per
    weights = {s: {p: 0 for p in players} for s in states}
    weights["bot"].update({"Eve": 1, **{p: 1 for p in literal_players}})
    weights["top"]["Adam"] = 1

    def transition(s, move):
        who = owner[s]
        if who is None:
            return s
        return moves[s][move[players.index(who)]]

    game = make_game(players, actions, states, "q1", weights, transition, available)
    return game, RobustQuery(k=n + 1, t=0, r=0)


REFERENCE_FORMULA = QbfFormula(4, ((1, 2, -3), (-2, 3, 4)))


def random_formula(n: int, clauses: int, rng: Optional[random.Random] = None) -> QbfFormula:
    rng = rng or random.Random()
    cs = []
    for _ in range(clauses):
        cs.append(tuple(rng.choice((1, -1)) * rng.randint(1, n) for _ in range(3)))
    return QbfFormula(n, tuple(cs))
