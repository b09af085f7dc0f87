import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from robusteq.game import (GameError, LassoPlay, StrategyMachine, coalition_outcome, deviators_move,
                           deviators_of_lasso, lasso_payoff, make_game, memoryless_profile, outcome,
                           payoff_vector, replay_strategy)
from robusteq.gen import random_game, random_machine, random_profile

from conftest import one_state_game


def chain_game(weights):
    """States s0 -> s1 -> ... -> s{k-1} -> s0 with the given single-player weights."""
    k = len(weights)
    states = [f"s{i}" for i in range(k)]
    return make_game(["A"], ["x"], states, "s0", {s: [w] for s, w in zip(states, weights)},
                     lambda s, m: states[(states.index(s) + 1) % k])


def test_payoff_self_loop():
    g = one_state_game((3,))
    assert lasso_payoff(g, LassoPlay((), ((0, ("x",)),)), 0) == 3


def test_payoff_prefix_vanishes():
    states = ["p", "a", "b"]
    nxt = {"p": "a", "a": "b", "b": "a"}
    g = make_game(["A"], ["x"], states, "p", {"p": [100], "a": [0], "b": [1]}, lambda s, m: nxt[s])
    lasso = LassoPlay(((0, ("x",)),), ((1, ("x",)), (2, ("x",))))
    assert lasso_payoff(g, lasso, 0) == Fraction(1, 2)


def test_payoff_three_cycle():
    g = chain_game([1, 0, 0])
    lasso = LassoPlay((), tuple((i, ("x",)) for i in range(3)))
    assert lasso_payoff(g, lasso, 0) == Fraction(1, 3)
    # running averages of 1,0,0,1,0,0,... approach 1/3
    seq = [1, 0, 0] * 2000
    assert abs(Fraction(sum(seq), len(seq)) - Fraction(1, 3)) < Fraction(1, 1000)


def test_inconsistent_lasso_names_step():
    g = chain_game([0, 0, 0])
    bad = LassoPlay(((0, ("x",)),), ((2, ("x",)),))
    with pytest.raises(GameError, match="step 0"):
        lasso_payoff(g, bad, 0)


def test_payoff_rotation_and_prefix_invariance():
    g = chain_game([2, -1, 4, 0])
    cyc = tuple((i, ("x",)) for i in range(4))
    base = lasso_payoff(g, LassoPlay((), cyc), 0)
    for r in range(4):
        rot = cyc[r:] + cyc[:r]
        pre = cyc[:r]
        assert lasso_payoff(g, LassoPlay(pre, rot), 0) == base


def test_deviators_move_examples():
    assert deviators_move(("x", "y"), ("x", "y")) == frozenset()
    assert deviators_move(("x", "y"), ("x", "z")) == {1}
    assert deviators_move(("x", "y"), ("z", "w")) == {0, 1}
    with pytest.raises(GameError):
        deviators_move(("x",), ("x", "y"))


def test_deviators_of_lasso_examples():
    g = one_state_game((0, 0))
    prof = memoryless_profile(g, {0: ("x", "x")})
    assert deviators_of_lasso(g, outcome(g, prof), prof) == frozenset()
    once = LassoPlay(((0, ("x", "y")),), ((0, ("x", "x")),))
    assert deviators_of_lasso(g, once, prof) == {1}
    always = LassoPlay((), ((0, ("y", "y")),))
    assert deviators_of_lasso(g, always, prof) == {0, 1}


def test_outcome_examples():
    g = one_state_game((1,))
    prof = memoryless_profile(g, {0: ("x",)})
    assert outcome(g, prof).cycle == ((0, ("x",)),)
    g4 = chain_game([0, 1, 2, 3])
    assert len(outcome(g4, memoryless_profile(g4, {i: ("x",) for i in range(4)})).cycle) == 4
    # memory flips every step: plays x, y, x, y, ... on a self-loop
    flip = StrategyMachine((0,), 0, {(0, 0): ("x",), (1, 0): ("y",)},
                           {(0, 0, ("x",)): 1, (0, 0, ("y",)): 1, (1, 0, ("x",)): 0, (1, 0, ("y",)): 0})
    lasso = outcome(g, flip)
    assert [m for _, m in lasso.cycle] == [("x",), ("y",)] and not lasso.prefix


def test_coalition_outcome_examples():
    g = one_state_game((0, 0))
    prof = memoryless_profile(g, {0: ("x", "x")})
    empty = StrategyMachine((), 0, {(0, 0): ()})
    assert coalition_outcome(g, prof, empty, ()).same_play(outcome(g, prof))
    full = memoryless_profile(g, {0: ("y", "y")})
    assert coalition_outcome(g, prof, full, (0, 1)).same_play(outcome(g, full))
    # A2 deviates at step 0 only
    dev = StrategyMachine((1,), 0, {(0, 0): ("y",), (1, 0): ("x",)},
                          {(0, 0, m): 1 for m in g.moves(0)})
    lasso = coalition_outcome(g, prof, dev, (1,))
    assert deviators_of_lasso(g, lasso, prof) <= {1}
    with pytest.raises(GameError):
        coalition_outcome(g, prof, dev, (0,))


def test_outcome_length_bound(rng):
    for _ in range(50):
        g = random_game(rng, players=2, states=rng.randint(1, 5))
        prof = random_profile(rng, g, memory=2)
        lasso = outcome(g, prof)
        assert len(lasso.prefix) + len(lasso.cycle) <= len(g.states) * 2
        assert deviators_of_lasso(g, lasso, prof) == frozenset()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_deviator_path_both_directions(seed):
    rng = random.Random(seed)
    g = random_game(rng, players=rng.randint(1, 3), states=rng.randint(1, 5))
    prof = random_profile(rng, g, memory=rng.randint(1, 2))
    coal = tuple(i for i in range(g.n) if rng.random() < 0.5)
    strat = random_machine(rng, g, coal, memory=rng.randint(1, 2))
    lasso = coalition_outcome(g, prof, strat, coal)
    devs = deviators_of_lasso(g, lasso, prof)
    assert devs <= set(coal)
    # the play is reproduced by its own deviators replaying their actions
    replay = replay_strategy(g, lasso, devs)
    assert coalition_outcome(g, prof, replay, devs).same_play(lasso)


def test_deviator_monotone_stabilization(rng):
    for _ in range(40):
        g = random_game(rng, players=3, states=4)
        prof = random_profile(rng, g)
        coal = (0, 2)
        lasso = coalition_outcome(g, prof, random_machine(rng, g, coal), coal)
        # walk the play and track the accumulated deviators
        m = prof.initial_memory
        devs = frozenset()
        seq = lasso.steps() + list(lasso.cycle) * (g.n * 2)
        history = []
        for s, move in seq:
            devs = devs | deviators_move(prof.act(m, s), move)
            history.append(devs)
            m = prof.next_memory(m, s, move)
        assert all(a <= b for a, b in zip(history, history[1:]))
        bound = len(lasso.prefix) + g.n * len(lasso.cycle) * 2
        assert history[min(bound, len(history) - 1)] == history[-1] == deviators_of_lasso(g, lasso, prof)


def test_payoff_vector_bounds(rng):
    for _ in range(30):
        g = random_game(rng, players=2, states=3, weights=(-2, 0, 3))
        p = payoff_vector(g, outcome(g, random_profile(rng, g)))
        assert all(-g.W <= x <= g.W for x in p)


def test_missing_transition_rejected():
    with pytest.raises(KeyError):
        make_game(["A"], ["x", "y"], ["s"], "s", {"s": [0]}, lambda s, m: {("x",): "s"}[m])


def test_canonical_lasso():
    a = LassoPlay(((0, ("x",)),), ((0, ("x",)), (0, ("x",))))
    b = LassoPlay((), ((0, ("x",)),))
    assert a.same_play(b)
    assert list(itertools.islice(a.canonical().cycle, 5)) == [(0, ("x",))]
