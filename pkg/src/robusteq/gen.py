"""Random instances for tests and experiment scripts."""

from __future__ import annotations

import itertools
import random
from typing import Iterator, List, Sequence

from .deviator import AdamMachine, DeviatorGame
from .game import ConcurrentGame, StrategyMachine, make_game, memoryless_profile
from .numerics import WeightedDigraph


def random_game(rng: random.Random, players: int = 2, states: int = 3, actions: int = 2,
                weights: Sequence[int] = (0, 1)) -> ConcurrentGame:
    names = [f"A{i + 1}" for i in range(players)]
    acts = [chr(ord("a") + j) for j in range(actions)]
    sts = [f"s{i}" for i in range(states)]
    table = {(s, m): rng.choice(sts) for s in sts for m in itertools.product(acts, repeat=players)}
    w = {s: [rng.choice(weights) for _ in names] for s in sts}
    return make_game(names, acts, sts, sts[0], w, lambda s, m: table[(s, m)])


def random_machine(rng: random.Random, game: ConcurrentGame, controls: Sequence[int],
                   memory: int = 2) -> StrategyMachine:
    """Moore machine for ``controls`` with memory states ``0..memory-1``."""
    controls = tuple(sorted(controls))
    output, update = {}, {}
    for m in range(memory):
        for s in range(len(game.states)):
            output[(m, s)] = tuple(rng.choice(game.available[s][i]) for i in controls)
            for move in game.moves(s):
                update[(m, s, move)] = rng.randrange(memory)
    return StrategyMachine(controls, 0, output, update, default_stay=False)


def random_profile(rng: random.Random, game: ConcurrentGame, memory: int = 2) -> StrategyMachine:
    return random_machine(rng, game, range(game.n), memory)


def random_adam(rng: random.Random, dgame: DeviatorGame, memory: int = 2) -> AdamMachine:
    game = dgame.game
    output, update = {}, {}
    for m in range(memory):
        for s in range(len(game.states)):
            moves = game.moves(s)
            for e in moves:
                output[(m, s, e)] = rng.choice(moves)
                for a in moves:
                    update[(m, s, e, a)] = rng.randrange(memory)
    return AdamMachine(0, output, update)


def positional_profiles(game: ConcurrentGame) -> Iterator[StrategyMachine]:
    """Every memoryless profile, in a fixed order."""
    per_state = [game.moves(s) for s in range(len(game.states))]
    for combo in itertools.product(*per_state):
        yield memoryless_profile(game, dict(enumerate(combo)))


def random_graph(rng: random.Random, vertices: int, dims: int = 1, lo: int = -3, hi: int = 3,
                 density: float = 0.35) -> WeightedDigraph:
    g = WeightedDigraph(list(range(vertices)))
    for a in range(vertices):
        for b in range(vertices):
            if rng.random() < density:
                g.add_edge(a, b, tuple(rng.randint(lo, hi) for _ in range(dims)))
    return g


def simple_cycles(graph: WeightedDigraph) -> List[List]:
    """All simple cycles as vertex lists rooted at their smallest vertex (small graphs only)."""
    order = {v: i for i, v in enumerate(graph.vertices)}
    succ = graph.successors()
    out = []
    for root in graph.vertices:
        stack = [(root, [root])]
        while stack:
            v, path = stack.pop()
            for w in set(succ[v]):
                if w == root:
                    out.append(path)
                elif order[w] > order[root] and w not in path:
                    stack.append((w, path + [w]))
    return out
