"""Weighted concurrent games, lasso plays, finite-memory strategies.

Players and states are referred to by their index in ``game.players`` and
``game.states``; a move is a tuple with one action name per player. Coalitions
are frozensets of player indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

Move = Tuple[str, ...]
Coalition = FrozenSet[int]


class GameError(ValueError):
    """Structural problem with a game, play or strategy."""


@dataclass(frozen=True)
class ConcurrentGame:
    players: Tuple[str, ...]
    actions: Tuple[str, ...]
    states: Tuple[str, ...]
    initial: int
    weights: Tuple[Tuple[int, ...], ...]  # weights[s][i]
    available: Tuple[Tuple[Tuple[str, ...], ...], ...]  # available[s][i]
    table: Tuple[Dict[Move, int], ...]  # table[s][move] -> successor index

    def __post_init__(self):
        n = len(self.players)
        if not 0 <= self.initial < len(self.states):
            raise GameError("initial state out of range")
        for s, name in enumerate(self.states):
            if len(self.weights[s]) != n:
                raise GameError(f"state {name}: expected {n} weights")
            if len(self.available[s]) != n or any(not a for a in self.available[s]):
                raise GameError(f"state {name}: every player needs an available action")
            for move in itertools.product(*self.available[s]):
                if move not in self.table[s]:
                    raise GameError(f"state {name}: no transition for move {move}")

    @property
    def n(self) -> int:
        return len(self.players)

    @cached_property
    def W(self) -> int:
        return max((abs(w) for ws in self.weights for w in ws), default=0)

    @cached_property
    def state_index(self) -> Dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def player_index(self) -> Dict[str, int]:
        return {p: i for i, p in enumerate(self.players)}

    def moves(self, s: int) -> List[Move]:
        """All legal move vectors at state ``s`` (the product of available actions)."""
        return list(self.table[s].keys())

    def step(self, s: int, move: Move) -> int:
        try:
            return self.table[s][tuple(move)]
        except KeyError:
            raise GameError(f"illegal move {move} at state {self.states[s]}") from None

    def coalition_names(self, coalition: Iterable[int]) -> List[str]:
        return [self.players[i] for i in sorted(coalition)]

    def graph_successors(self, s: int) -> List[int]:
        seen = []
        for t in self.table[s].values():
            if t not in seen:
                seen.append(t)
        return seen


def make_game(players, actions, states, initial, weights, transition, available=None):
    """Build a game from a transition callable ``transition(state, move) -> state``.

    ``weights`` maps state name to a sequence (or player-name mapping) of ints;
    ``available`` optionally maps state name to per-player action lists.
    """
    players = tuple(players)
    actions = tuple(actions)
    states = tuple(states)
    sidx = {s: i for i, s in enumerate(states)}
    wt, av, tab = [], [], []
    for s in states:
        w = weights[s]
        if isinstance(w, dict):
            w = [w.get(p, 0) for p in players]
        wt.append(tuple(int(x) for x in w))
        if available and s in available:
            a = available[s]
            if isinstance(a, dict):
                a = [a.get(p, actions) for p in players]
            av.append(tuple(tuple(x) for x in a))
        else:
            av.append(tuple(actions for _ in players))
        row = {}
        for move in itertools.product(*av[-1]):
            row[move] = sidx[transition(s, move)]
        tab.append(row)
    return ConcurrentGame(players, actions, states, sidx[initial], tuple(wt), tuple(av), tuple(tab))


def deviators_move(a: Sequence[str], b: Sequence[str]) -> Coalition:
    """Players whose action differs between moves ``a`` and ``b``."""
    if len(a) != len(b):
        raise GameError(f"move length mismatch: {len(a)} vs {len(b)}")
    return frozenset(i for i, (x, y) in enumerate(zip(a, b)) if x != y)


# ---------------------------------------------------------------------------
# Plays


@dataclass(frozen=True)
class LassoPlay:
    """The infinite play ``prefix . cycle^omega``; steps are ``(state, move)`` pairs."""

    prefix: Tuple[Tuple[int, Move], ...]
    cycle: Tuple[Tuple[int, Move], ...]

    def __post_init__(self):
        if not self.cycle:
            raise GameError("lasso cycle must be nonempty")

    def steps(self) -> List[Tuple[int, Move]]:
        return list(self.prefix) + list(self.cycle)

    def check(self, game: ConcurrentGame) -> None:
        """Raise GameError naming the first step whose successor is wrong."""
        seq = self.steps()
        for i, (s, m) in enumerate(seq):
            nxt = seq[i + 1][0] if i + 1 < len(seq) else self.cycle[0][0]
            if len(m) != game.n:
                raise GameError(f"step {i}: move has {len(m)} actions, expected {game.n}")
            if tuple(m) not in game.table[s]:
                raise GameError(f"step {i}: move {m} not legal at {game.states[s]}")
            if game.table[s][tuple(m)] != nxt:
                raise GameError(
                    f"step {i}: {game.states[s]} --{m}--> {game.states[game.table[s][tuple(m)]]}"
                    f" but play continues at {game.states[nxt]}")

    def canonical(self) -> "LassoPlay":
        """Shortest representation of the same infinite play."""
        cyc = list(self.cycle)
        n = len(cyc)
        for p in range(1, n + 1):
            if n % p == 0 and cyc == cyc[:p] * (n // p):
                cyc = cyc[:p]
                break
        pre = list(self.prefix)
        while pre and pre[-1] == cyc[-1]:
            pre.pop()
            cyc = [cyc[-1]] + cyc[:-1]
        return LassoPlay(tuple(pre), tuple(cyc))

    def same_play(self, other: "LassoPlay") -> bool:
        return self.canonical() == other.canonical()


def lasso_payoff(game: ConcurrentGame, lasso: LassoPlay, player: int) -> Fraction:
    """Mean payoff of ``player``: the average weight over the cycle states."""
    lasso.check(game)
    ws = [game.weights[s][player] for s, _ in lasso.cycle]
    return Fraction(sum(ws), len(ws))


def payoff_vector(game: ConcurrentGame, lasso: LassoPlay) -> Tuple[Fraction, ...]:
    lasso.check(game)
    c = len(lasso.cycle)
    return tuple(Fraction(sum(game.weights[s][i] for s, _ in lasso.cycle), c) for i in range(game.n))


# ---------------------------------------------------------------------------
# Strategies


@dataclass(frozen=True)
class StrategyMachine:
    """Deterministic Moore-style strategy for the players in ``controls``.

    ``output[(m, s)]`` is a tuple of actions, one per controlled player (sorted
    by index). ``update[(m, s, observed_move)]`` is the next memory; missing
    update entries keep the memory unchanged only if ``default_stay`` is set.
    """

    controls: Tuple[int, ...]
    initial_memory: object
    output: Dict[Tuple[object, int], Tuple[str, ...]]
    update: Dict[Tuple[object, int, Move], object] = field(default_factory=dict)
    default_stay: bool = True

    def act(self, m, s) -> Tuple[str, ...]:
        try:
            return self.output[(m, s)]
        except KeyError:
            raise GameError(f"strategy has no output for memory {m!r} at state {s}") from None

    def next_memory(self, m, s, move: Move):
        key = (m, s, tuple(move))
        if key in self.update:
            return self.update[key]
        if self.default_stay:
            return m
        raise GameError(f"strategy has no update for {key!r}")

    @property
    def memory(self) -> set:
        mem = {self.initial_memory}
        mem.update(m for m, _ in self.output)
        return mem


def memoryless_profile(game: ConcurrentGame, choice: Dict[int, Move]) -> StrategyMachine:
    return StrategyMachine(tuple(range(game.n)), 0, {(0, s): tuple(m) for s, m in choice.items()})


def _full_move(game, profile_move, coalition, coalition_move):
    move = list(profile_move)
    for i, a in zip(coalition, coalition_move):
        move[i] = a
    return tuple(move)


def _simulate(game: ConcurrentGame, start_config, step) -> LassoPlay:
    # step(config) -> (state, move, next_config); config[0] is the state
    seen: Dict[object, int] = {}
    trace = []
    cfg = start_config
    while cfg not in seen:
        seen[cfg] = len(trace)
        s, move, nxt = step(cfg)
        trace.append((s, move))
        cfg = nxt
    k = seen[cfg]
    return LassoPlay(tuple(trace[:k]), tuple(trace[k:]))


def outcome(game: ConcurrentGame, profile: StrategyMachine) -> LassoPlay:
    """The unique play of a full profile, as a lasso over (state, memory)."""
    if tuple(profile.controls) != tuple(range(game.n)):
        raise GameError("outcome needs a full strategy profile")

    def step(cfg):
        s, m = cfg
        move = profile.act(m, s)
        return s, move, (game.step(s, move), profile.next_memory(m, s, move))

    return _simulate(game, (game.initial, profile.initial_memory), step)


def coalition_outcome(game: ConcurrentGame, profile: StrategyMachine,
                      coalition_strategy: StrategyMachine, coalition: Iterable[int]) -> LassoPlay:
    """Outcome of the profile where the coalition follows ``coalition_strategy``."""
    coal = tuple(sorted(set(coalition)))
    if tuple(coalition_strategy.controls) != coal:
        raise GameError(f"coalition strategy controls {coalition_strategy.controls}, expected {coal}")

    def step(cfg):
        s, m, c = cfg
        move = _full_move(game, profile.act(m, s), coal, coalition_strategy.act(c, s) if coal else ())
        nxt = game.step(s, move)
        return s, move, (nxt, profile.next_memory(m, s, move),
                         coalition_strategy.next_memory(c, s, move))

    return _simulate(game, (game.initial, profile.initial_memory, coalition_strategy.initial_memory), step)


def deviators_of_lasso(game: ConcurrentGame, lasso: LassoPlay, profile: StrategyMachine) -> Coalition:
    """Union of deviators from the profile's prescriptions along the whole play."""
    lasso.check(game)
    m = profile.initial_memory
    devs = frozenset()
    for s, move in lasso.prefix:
        devs |= deviators_move(profile.act(m, s), move)
        m = profile.next_memory(m, s, move)
    seen = set()
    pos = 0
    while (pos, m, devs) not in seen:
        seen.add((pos, m, devs))
        s, move = lasso.cycle[pos]
        devs |= deviators_move(profile.act(m, s), move)
        m = profile.next_memory(m, s, move)
        pos = (pos + 1) % len(lasso.cycle)
    return devs


def replay_strategy(game: ConcurrentGame, lasso: LassoPlay, coalition: Iterable[int]) -> StrategyMachine:
    """Coalition strategy that reproduces the coalition's actions of ``lasso``.

    Memory is the position in ``prefix + cycle``; it advances on every step.
    """
    coal = tuple(sorted(set(coalition)))
    seq = lasso.steps()
    np_ = len(lasso.prefix)
    output, update = {}, {}
    for pos, (s, move) in enumerate(seq):
        output[(pos, s)] = tuple(move[i] for i in coal)
        nxt = pos + 1 if pos + 1 < len(seq) else np_
        for obs in game.moves(s):
            update[(pos, s, obs)] = nxt
    return StrategyMachine(coal, 0, output, update, default_stay=False)
