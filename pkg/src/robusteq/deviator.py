"""The deviator game: Eve proposes a move, Adam picks the move that is played.

Deviator sets are int bitmasks over the player order (bit ``i`` is player
``i``). States of the deviator game are :class:`DeviatorState` pairs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from .game import ConcurrentGame, GameError, LassoPlay, Move, StrategyMachine

DEFAULT_MAX_PLAYERS = 8


class SizeError(GameError):
    pass


def mask_of(players: Iterable[int]) -> int:
    m = 0
    for i in players:
        m |= 1 << i
    return m


def members(mask: int) -> frozenset:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def dev_mask(a: Move, b: Move) -> int:
    m = 0
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            m |= 1 << i
    return m


class DeviatorState(NamedTuple):
    state: int
    devs: int


@dataclass
class DeviatorGame:
    """Lazily explored deviator game over ``game``.

    Successor maps are built on first request per base state and cached; the
    deviator component only enters through a bitwise or.
    """

    game: ConcurrentGame
    max_players: int = DEFAULT_MAX_PLAYERS
    _resp: Dict[int, List[Tuple[Move, List[Tuple[Move, int, int]]]]] = field(default_factory=dict, repr=False)

    @property
    def initial(self) -> DeviatorState:
        return DeviatorState(self.game.initial, 0)

    def weight(self, ds: DeviatorState) -> Tuple[int, ...]:
        return self.game.weights[ds.state]

    def step(self, ds: DeviatorState, eve: Move, adam: Move) -> DeviatorState:
        t = self.game.step(ds.state, adam)
        if tuple(eve) not in self.game.table[ds.state]:
            raise GameError(f"Eve move {eve} illegal at {self.game.states[ds.state]}")
        return DeviatorState(t, ds.devs | dev_mask(eve, adam))

    def responses(self, s: int):
        """For each Eve move at base state ``s``: (eve, [(adam, next_state, dev_mask)])."""
        r = self._resp.get(s)
        if r is None:
            table = self.game.table[s]
            moves = list(table)
            r = [(e, [(a, table[a], dev_mask(e, a)) for a in moves]) for e in moves]
            self._resp[s] = r
        return r

    def choices(self, ds: DeviatorState) -> List[Tuple[Move, List[DeviatorState]]]:
        """Eve moves with the distinct deviator states Adam can reach, in first-seen order."""
        out = []
        for e, rs in self.responses(ds.state):
            seen = []
            for _, t, m in rs:
                nxt = DeviatorState(t, ds.devs | m)
                if nxt not in seen:
                    seen.append(nxt)
            out.append((e, seen))
        return out

    def reachable(self, limit: Optional[int] = None) -> List[DeviatorState]:
        """Breadth-first reachable deviator states from ``(s0, {})``."""
        start = self.initial
        seen = {start}
        order = [start]
        queue = deque([start])
        while queue:
            ds = queue.popleft()
            for _, rs in self.responses(ds.state):
                for _, t, m in rs:
                    nxt = DeviatorState(t, ds.devs | m)
                    if nxt not in seen:
                        seen.add(nxt)
                        order.append(nxt)
                        queue.append(nxt)
                        if limit is not None and len(order) > limit:
                            raise SizeError(f"more than {limit} reachable deviator states")
        return order

    def explicit(self) -> List[DeviatorState]:
        if self.game.n > self.max_players:
            raise SizeError(f"explicit deviator game refused: {self.game.n} players > bound {self.max_players}")
        return self.reachable()

    def state_name(self, ds: DeviatorState) -> str:
        names = ",".join(self.game.players[i] for i in sorted(members(ds.devs)))
        return f"{self.game.states[ds.state]}@{{{names}}}"


def build_deviator(game: ConcurrentGame, max_players: int = DEFAULT_MAX_PLAYERS) -> DeviatorGame:
    return DeviatorGame(game, max_players)


# ---------------------------------------------------------------------------
# Strategies and plays in the deviator game


@dataclass(frozen=True)
class EveStrategyMachine:
    """Eve machine; ``profile`` supplies outputs read on the base state."""

    profile: StrategyMachine

    @property
    def initial_memory(self):
        return self.profile.initial_memory

    def act(self, m, ds: DeviatorState) -> Move:
        return self.profile.act(m, ds.state)

    def next_memory(self, m, ds: DeviatorState, adam: Move):
        return self.profile.next_memory(m, ds.state, adam)


def lift_profile(profile: StrategyMachine) -> EveStrategyMachine:
    """Eve plays what the profile plays on the projected history."""
    return EveStrategyMachine(profile)


@dataclass(frozen=True)
class AdamMachine:
    """Adam strategy: ``output[(m, base_state, eve_move)]`` is the move that is played.

    Missing outputs mean Adam copies Eve; missing updates keep the memory.
    """

    initial_memory: object = 0
    output: Dict = field(default_factory=dict)
    update: Dict = field(default_factory=dict)

    def act(self, m, ds: DeviatorState, eve: Move) -> Move:
        return self.output.get((m, ds.state, tuple(eve)), tuple(eve))

    def next_memory(self, m, ds: DeviatorState, eve: Move, adam: Move):
        return self.update.get((m, ds.state, tuple(eve), tuple(adam)), m)


@dataclass(frozen=True)
class DeviatorLasso:
    """Lasso in the deviator game; steps are ``(DeviatorState, eve_move, adam_move)``."""

    prefix: Tuple[Tuple[DeviatorState, Move, Move], ...]
    cycle: Tuple[Tuple[DeviatorState, Move, Move], ...]

    def check(self, dgame: DeviatorGame) -> None:
        seq = list(self.prefix) + list(self.cycle)
        if not self.cycle:
            raise GameError("lasso cycle must be nonempty")
        for i, (ds, e, a) in enumerate(seq):
            nxt = seq[i + 1][0] if i + 1 < len(seq) else self.cycle[0][0]
            if dgame.step(ds, e, a) != nxt:
                raise GameError(f"step {i}: inconsistent deviator transition from {dgame.state_name(ds)}")

    def project(self) -> LassoPlay:
        """Projection onto the original game: base states and Adam's moves."""
        return LassoPlay(tuple((ds.state, a) for ds, _, a in self.prefix),
                         tuple((ds.state, a) for ds, _, a in self.cycle))


def play_deviator(dgame: DeviatorGame, eve: EveStrategyMachine, adam: AdamMachine) -> DeviatorLasso:
    seen = {}
    trace = []
    cfg = (dgame.initial, eve.initial_memory, adam.initial_memory)
    while cfg not in seen:
        seen[cfg] = len(trace)
        ds, me, ma = cfg
        e = eve.act(me, ds)
        a = adam.act(ma, ds, e)
        trace.append((ds, e, a))
        cfg = (dgame.step(ds, e, a), eve.next_memory(me, ds, a), adam.next_memory(ma, ds, e, a))
    k = seen[cfg]
    return DeviatorLasso(tuple(trace[:k]), tuple(trace[k:]))


def annotate(game: ConcurrentGame, lasso: LassoPlay, profile: StrategyMachine) -> DeviatorLasso:
    """Lift a play of the game into the deviator game along the profile.

    Each step records the accumulated deviators, the profile's proposal as Eve's
    move and the actual move as Adam's. The result is unrolled until the
    (cycle position, memory, deviators) configuration repeats.
    """
    lasso.check(game)
    steps = []
    m = profile.initial_memory
    devs = 0
    for s, move in lasso.prefix:
        e = profile.act(m, s)
        steps.append((DeviatorState(s, devs), e, tuple(move)))
        devs |= dev_mask(e, move)
        m = profile.next_memory(m, s, move)
    seen = {}
    pos = 0
    while (pos, m, devs) not in seen:
        seen[(pos, m, devs)] = len(steps)
        s, move = lasso.cycle[pos]
        e = profile.act(m, s)
        steps.append((DeviatorState(s, devs), e, tuple(move)))
        devs |= dev_mask(e, move)
        m = profile.next_memory(m, s, move)
        pos = (pos + 1) % len(lasso.cycle)
    k = seen[(pos, m, devs)]
    return DeviatorLasso(tuple(steps[:k]), tuple(steps[k:]))


def limit_deviators(lasso: DeviatorLasso) -> frozenset:
    """Deviator set of the cycle (constant there, since it only grows)."""
    masks = {ds.devs for ds, _, _ in lasso.cycle}
    if len(masks) != 1:
        raise GameError("deviator component is not constant along the cycle")
    return members(masks.pop())


def _limit_mask(lasso: DeviatorLasso) -> int:
    return mask_of(limit_deviators(lasso))


# ---------------------------------------------------------------------------
# Objectives


@dataclass(frozen=True)
class Interval:
    """Rational interval; ``None`` bounds are infinite."""

    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    lo_closed: bool = True
    hi_closed: bool = True

    def __contains__(self, x) -> bool:
        if self.lo is not None and (x < self.lo or (x == self.lo and not self.lo_closed)):
            return False
        if self.hi is not None and (x > self.hi or (x == self.hi and not self.hi_closed)):
            return False
        return True

    @classmethod
    def at_most(cls, x):
        return cls(None, Fraction(x))

    @classmethod
    def at_least(cls, x):
        return cls(Fraction(x), None)

    @classmethod
    def empty(cls):
        return cls(Fraction(1), Fraction(0))


def projected_payoffs(game: ConcurrentGame, lasso: DeviatorLasso) -> Tuple[Fraction, ...]:
    cyc = [ds.state for ds, _, _ in lasso.cycle]
    return tuple(Fraction(sum(game.weights[s][i] for s in cyc), len(cyc)) for i in range(game.n))


def objective_omega(game: ConcurrentGame, lasso: DeviatorLasso, coalition: Iterable[int],
                    player: int, goal: Interval) -> bool:
    """delta(rho) within the coalition implies the player's projected payoff lies in ``goal``."""
    delta = limit_deviators(lasso)
    if not delta <= frozenset(coalition):
        return True
    return projected_payoffs(game, lasso)[player] in goal


def resilience_obj(game: ConcurrentGame, lasso: DeviatorLasso, k: int, p) -> bool:
    delta = limit_deviators(lasso)
    pay = projected_payoffs(game, lasso)
    if len(delta) > k:
        return True
    capped = delta if len(delta) == k else range(game.n)
    return all(pay[i] <= p[i] for i in capped)


def immunity_obj(game: ConcurrentGame, lasso: DeviatorLasso, t: int, r, p) -> bool:
    delta = limit_deviators(lasso)
    if len(delta) > t:
        return True
    pay = projected_payoffs(game, lasso)
    return all(p[i] - r <= pay[i] for i in range(game.n) if i not in delta)


def robustness_obj(game: ConcurrentGame, lasso: DeviatorLasso, k: int, t: int, r, p) -> bool:
    return resilience_obj(game, lasso, k, p) and immunity_obj(game, lasso, t, r, p)
