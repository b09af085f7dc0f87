"""Check a given finite-memory profile for resilience and immunity.

Deviations of a coalition are exactly the plays of the product of the game
with the profile's memory in which the coalition picks its own actions and
everybody else follows the profile. The best and worst payoffs a coalition
can cause are therefore extreme mean cycles of that product.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .game import ConcurrentGame, GameError, LassoPlay, StrategyMachine, outcome, payoff_vector
from .numerics import WeightedDigraph, extreme_mean_cycle, format_rational


@dataclass
class DeviationProduct:
    """Vertices ``(state, memory)``; one edge per coalition action choice."""

    game: ConcurrentGame
    coalition: Tuple[int, ...]
    graph: WeightedDigraph
    label: Dict[Tuple, Tuple[str, ...]]  # (src, dst) -> a realizing move
    start: Tuple


def deviation_product(game: ConcurrentGame, profile: StrategyMachine, coalition: Iterable[int]) -> DeviationProduct:
    coal = tuple(sorted(set(coalition)))
    start = (game.initial, profile.initial_memory)
    g = WeightedDigraph([start])
    label = {}
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        s, m = v
        base = profile.act(m, s)
        for acts in itertools.product(*(game.available[s][i] for i in coal)):
            move = list(base)
            for i, a in zip(coal, acts):
                move[i] = a
            move = tuple(move)
            w = (game.step(s, move), profile.next_memory(m, s, move))
            if (v, w) in label:
                continue
            label[(v, w)] = move
            g.add_edge(v, w, game.weights[s])
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return DeviationProduct(game, coal, g, label, start)


@dataclass
class Deviation:
    value: Fraction
    lasso: Optional[LassoPlay]


def _witness(prod: DeviationProduct, cycle) -> LassoPlay:
    succ = prod.graph.successors()
    prev = {prod.start: None}
    queue = deque([prod.start])
    while queue:
        v = queue.popleft()
        if v == cycle[0]:
            break
        for w in succ[v]:
            if w not in prev:
                prev[w] = v
                queue.append(w)
    path = []
    v = cycle[0]
    while prev[v] is not None:
        path.append(prev[v])
        v = prev[v]
    path.reverse()
    verts = path + [cycle[0]]
    prefix = tuple((a[0], prod.label[(a, b)]) for a, b in zip(verts, verts[1:]))
    cyc = list(cycle)
    loop = tuple((a[0], prod.label[(a, b)]) for a, b in zip(cyc, cyc[1:] + cyc[:1]))
    return LassoPlay(prefix, loop)


def _best(prod: DeviationProduct, player: int, sense: str) -> Deviation:
    mc = extreme_mean_cycle(prod.graph, player, sense, start=prod.start)
    if not mc.found:  # pragma: no cover - product graphs always contain a cycle
        raise GameError("deviation product has no cycle")
    return Deviation(mc.value, _witness(prod, mc.cycle))


def best_deviation(game: ConcurrentGame, profile: StrategyMachine, coalition: Iterable[int],
                   player: int, sense: str = "max") -> Deviation:
    """Best (``max``) payoff a coalition member can reach, or worst (``min``) it can
    inflict on an outsider, over all deviations of the coalition."""
    coal = frozenset(coalition)
    if sense == "max" and player not in coal:
        raise GameError("maximizing deviation needs the player inside the coalition")
    if sense == "min" and player in coal:
        raise GameError("minimizing deviation needs the player outside the coalition")
    return _best(deviation_product(game, profile, coal), player, sense)


@dataclass
class Violation:
    coalition: Tuple[int, ...]
    player: int
    kind: str  # "resilience" or "immunity"
    value: Fraction
    bound: Fraction
    witness: Optional[LassoPlay] = None

    def to_json(self, game: ConcurrentGame) -> dict:
        return {"coalition": game.coalition_names(self.coalition), "player": game.players[self.player],
                "kind": self.kind, "value": format_rational(self.value), "bound": format_rational(self.bound)}


@dataclass
class Verdict:
    robust: bool
    payoff: Tuple[Fraction, ...]
    violations: List[Violation] = field(default_factory=list)

    def to_json(self, game: ConcurrentGame) -> dict:
        return {"robust": self.robust,
                "payoff": {p: format_rational(x) for p, x in zip(game.players, self.payoff)},
                "violations": [v.to_json(game) for v in self.violations]}


def is_robust(game: ConcurrentGame, profile: StrategyMachine, k: int, t: int, r=0,
              first_only: bool = False) -> Verdict:
    """(k,t,r)-robustness of ``profile``.

    Only coalitions of size exactly min(k, n) and min(t, n - 1) are examined:
    a larger coalition can replay any deviation of a smaller one. For
    immunity the victim has to stay outside, hence the n - 1.
    """
    r = Fraction(r)
    n = game.n
    payoff = payoff_vector(game, outcome(game, profile))
    verdict = Verdict(True, payoff)
    for c in itertools.combinations(range(n), min(k, n)):
        if not c:
            continue
        prod = deviation_product(game, profile, c)
        for a in c:
            best = _best(prod, a, "max")
            if best.value > payoff[a]:
                verdict.violations.append(Violation(c, a, "resilience", best.value, payoff[a], best.lasso))
                if first_only:
                    verdict.robust = False
                    return verdict
    for c in itertools.combinations(range(n), min(t, n - 1)):
        prod = deviation_product(game, profile, c)
        for a in range(n):
            if a in c:
                continue
            worst = _best(prod, a, "min")
            if worst.value < payoff[a] - r:
                verdict.violations.append(Violation(c, a, "immunity", worst.value, payoff[a] - r, worst.lasso))
                if first_only:
                    verdict.robust = False
                    return verdict
    verdict.robust = not verdict.violations
    return verdict
