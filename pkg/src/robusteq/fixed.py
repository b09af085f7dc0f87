"""Component-by-component solving of the deviator game.

The deviator set only grows along a play, so the deviator game splits into
one component per reachable set D, ordered by inclusion. Each component is
solved as a small game whose exits to larger sets are absorbing sinks already
labelled with their outcome.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from .deviator import DeviatorGame, DeviatorState, members, popcount
from .twoplayer import (DEFAULT_BUDGET, BudgetExceeded, TwoPlayerGame, as_budget, reduce_choices,
                        value_ensure, winning_region)


def succ_component(dgame: DeviatorGame, devs: int, sources: Optional[Sequence[int]] = None) -> List[DeviatorState]:
    """One-step successors of ``sources x {devs}`` with a strictly larger deviator set.

    ``sources`` defaults to every base state.
    """
    if sources is None:
        sources = range(len(dgame.game.states))
    out = []
    seen = set()
    for s in sources:
        for _, rs in dgame.responses(s):
            for _, t, m in rs:
                nd = devs | m
                if nd != devs:
                    ds = DeviatorState(t, nd)
                    if ds not in seen:
                        seen.add(ds)
                        out.append(ds)
    return out


@dataclass
class FixedCoalitionGame:
    """Component ``devs`` with its exits made absorbing and pre-labelled."""

    devs: int
    states: List[DeviatorState]
    succ: List[DeviatorState]
    winners: Dict[DeviatorState, bool]
    weight: Dict[DeviatorState, tuple] = field(repr=False)
    choices: Dict[DeviatorState, list] = field(repr=False)

    def arena(self) -> TwoPlayerGame:
        return TwoPlayerGame(self.states + self.succ, self.weight, self.choices,
                             {s: self.winners[s] for s in self.succ})


def build_fixed_game(dgame: DeviatorGame, spec, devs: int, winners: Dict[DeviatorState, bool],
                     sources: Optional[Sequence[int]] = None) -> FixedCoalitionGame:
    """Winning exits weigh W on every dimension, losing ones -W-1."""
    if sources is None:
        sources = range(len(dgame.game.states))
    states = [DeviatorState(s, devs) for s in sources]
    succ = succ_component(dgame, devs, sources)
    missing = [s for s in succ if s not in winners]
    if missing:
        raise ValueError(f"no winner label for {dgame.state_name(missing[0])}"
                         f" ({len(missing)} unlabelled)")
    d = spec.d
    weight = {ds: spec.vector(ds) for ds in states}
    choices = {}
    for ds in states:
        choices[ds] = reduce_choices([opts for _, opts in dgame.choices(ds)])
    for ds in succ:
        weight[ds] = (spec.W,) * d if winners[ds] else (-spec.W - 1,) * d
        choices[ds] = [[ds]]
    return FixedCoalitionGame(devs, states, succ, {s: winners[s] for s in succ}, weight, choices)


def clamp_threshold(u, W) -> Optional[List[Fraction]]:
    """Raise entries below -W to -W; None if some entry exceeds W (unattainable)."""
    u = [Fraction(x) for x in u]
    if any(x > W for x in u):
        return None
    return [max(x, Fraction(-W)) for x in u]


def solve_deviator_value(dgame: DeviatorGame, spec, u, budget=DEFAULT_BUDGET,
                         method: str = "cegar", trace: Optional[Callable[[dict], None]] = None,
                         reach: Optional[List[DeviatorState]] = None) -> Dict[DeviatorState, bool]:
    """Eve's winning reachable deviator states for threshold ``u``.

    Components are solved depth-first from ``(s0, {})``, each after the
    components it can exit to; results are memoized per deviator set. The
    budget is shared by all components.
    """
    budget = as_budget(budget)
    if reach is None:
        reach = dgame.reachable()
    by_devs: Dict[int, List[int]] = {}
    for ds in reach:
        by_devs.setdefault(ds.devs, []).append(ds.state)
    uu = clamp_threshold(u, spec.W)
    if uu is None:
        return {ds: False for ds in reach}
    win: Dict[DeviatorState, bool] = {}
    done = set()
    bound = len(dgame.game.states) * max(len(t) for t in dgame.game.table)

    def solve(devs: int):
        if devs in done:
            return
        sources = sorted(by_devs[devs])
        t0 = time.perf_counter()
        if spec.saturated(devs):
            # every dimension weighs W here and beyond, and u <= W
            for s in sources:
                win[DeviatorState(s, devs)] = True
            done.add(devs)
            if trace:
                trace({"coalition": dgame.game.coalition_names(members(devs)), "states": len(sources),
                       "succ": None, "saturated": True, "winning": len(sources),
                       "seconds": round(time.perf_counter() - t0, 6)})
            return
        succ = succ_component(dgame, devs, sources)
        assert len(succ) <= bound
        for nd in sorted({ds.devs for ds in succ}, key=lambda m: (popcount(m), m)):
            solve(nd)
        fg = build_fixed_game(dgame, spec, devs, {ds: win[ds] for ds in succ}, sources)
        try:
            res = winning_region(fg.arena(), spec.I, spec.J, uu, budget, method)
        except BudgetExceeded as exc:
            raise BudgetExceeded(exc.count, exc.budget,
                                 "{" + ",".join(dgame.game.coalition_names(members(devs))) + "}") from None
        for ds in fg.states:
            win[ds] = res[ds]
        done.add(devs)
        if trace:
            trace({"coalition": dgame.game.coalition_names(members(devs)), "states": len(sources),
                   "succ": len(succ), "saturated": False,
                   "winners": {dgame.state_name(ds): win[ds] for ds in succ},
                   "winning": sum(win[ds] for ds in fg.states),
                   "seconds": round(time.perf_counter() - t0, 6)})

    solve(0)
    for devs in sorted(by_devs, key=lambda m: (popcount(m), m)):
        solve(devs)
    return win


def full_deviator_arena(dgame: DeviatorGame, spec, reach: Optional[List[DeviatorState]] = None,
                        collapse: bool = False) -> TwoPlayerGame:
    """The whole reachable deviator game as one two-player arena.

    With ``collapse``, saturated states become absorbing winning sinks (valid
    for thresholds at most W).
    """
    if reach is None:
        reach = dgame.reachable()
    weight, choices, status = {}, {}, {}
    for ds in reach:
        if collapse and spec.saturated(ds.devs):
            weight[ds] = (spec.W,) * spec.d
            choices[ds] = [[ds]]
            status[ds] = True
        else:
            weight[ds] = spec.vector(ds)
            choices[ds] = reduce_choices([opts for _, opts in dgame.choices(ds)])
    return TwoPlayerGame(list(reach), weight, choices, status)


def solve_direct(dgame: DeviatorGame, spec, u, budget=DEFAULT_BUDGET, method: str = "cegar",
                 starts: Optional[Sequence[DeviatorState]] = None, whole: bool = False) -> Dict[DeviatorState, bool]:
    """Value of each start state on the undecomposed deviator game.

    By default the arena is split only by its own strongly connected
    components, ignoring deviator sets and exit weights; ``whole`` runs the
    value check on the entire arena at once (small games only).
    """
    reach = dgame.reachable()
    arena = full_deviator_arena(dgame, spec, reach)
    uu = clamp_threshold(u, spec.W)
    starts = reach if starts is None else starts
    if uu is None:
        return {ds: False for ds in starts}
    budget = as_budget(budget)
    if whole:
        return {ds: value_ensure(arena, spec.I, spec.J, uu, ds, budget, method) for ds in starts}
    win = winning_region(arena, spec.I, spec.J, uu, budget, method, only=list(starts))
    return {ds: win[ds] for ds in starts}
