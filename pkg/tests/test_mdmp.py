import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from robusteq.deviator import (DeviatorGame, DeviatorState, immunity_obj, lift_profile, limit_deviators,
                               play_deviator, projected_payoffs, resilience_obj, robustness_obj)
from robusteq.game import make_game
from robusteq.gen import random_adam, random_game, random_profile
from robusteq.mdmp import (RobustQuery, build_weights, candidate_payoffs, lasso_means, meets_threshold,
                           polyhedron_query_lp, pvar, robust_constraints, solve_robustness, threshold_for, uvar)
from robusteq.numerics import extreme_mean_cycle, WeightedDigraph

from conftest import choice_game, one_state_game, pennies_game


def two_player_one_state(w=(1, 0)):
    return one_state_game(w)


def test_weights_no_deviator():
    spec = build_weights(two_player_one_state(), 1, 1)
    assert spec.vector(DeviatorState(0, 0)) == (1, 0, -1, 0, 1, 0, -1, 0)


def test_weights_one_deviator():
    spec = build_weights(two_player_one_state(), 1, 1)
    assert spec.vector(DeviatorState(0, 0b01)) == (1, 0, -1, 1, 1, 1, 1, 1)


def test_weights_saturated():
    spec = build_weights(two_player_one_state(), 1, 0)
    assert spec.saturated(0b11)
    assert spec.vector(DeviatorState(0, 0b11)) == (1,) * 8


def test_weights_clamp_k_t():
    spec = build_weights(two_player_one_state(), 5, 7)
    assert (spec.k, spec.t) == (2, 2)
    with pytest.raises(ValueError):
        build_weights(two_player_one_state(), -1, 0)


def test_dimension_split():
    spec = build_weights(random_game(random.Random(0), players=3), 1, 1)
    assert spec.I == [0, 1, 2, 6, 7, 8]
    assert spec.J == [3, 4, 5, 9, 10, 11]


def row_values(system, p):
    """Solve the equality pairs of a robust system for u given p."""
    point = {pvar(i): x for i, x in enumerate(p)}
    out = {}
    for row, rel, b in system.constraints:
        (u,) = [v for v in row if v.startswith("u")]
        rest = sum(c * point[v] for v, c in row.items() if v != u)
        out[u] = (b - rest) / row[u]
    return out


def test_constraints_single_player():
    sys_ = robust_constraints(1, 1, 0, 0)
    assert len(sys_.constraints) == 8
    vals = row_values(sys_, [Fraction(2, 3)])
    assert vals == {"u1": Fraction(2, 3), "u2": Fraction(-2, 3), "u3": Fraction(2, 3), "u4": Fraction(-2, 3)}


def test_constraints_with_r():
    vals = row_values(robust_constraints(1, 1, 1, Fraction(1, 2)), [Fraction(1)])
    assert vals["u1"] == Fraction(1, 2) and vals["u2"] == -1 and vals["u3"] == 1 and vals["u4"] == -1


def test_constraints_counts():
    sys_ = robust_constraints(2, 1, 1, 0)
    assert len(sys_.constraints) == 16
    assert sum(rel == "<=" for _, rel, _ in sys_.constraints) == 8
    with pytest.raises(ValueError):
        robust_constraints(2, 1, 1, -1)


def test_threshold_matches_constraints(rng):
    for _ in range(20):
        n = rng.randint(1, 3)
        p = [Fraction(rng.randint(-4, 4), rng.randint(1, 4)) for _ in range(n)]
        r = Fraction(rng.randint(0, 3), 2)
        vals = row_values(robust_constraints(n, 1, 1, r), p)
        assert [vals[uvar(i)] for i in range(4 * n)] == threshold_for(n, p, r)


# -- identities on lassos, each side computed independently

def random_case(seed):
    rng = random.Random(seed)
    g = random_game(rng, players=rng.randint(1, 3), states=rng.randint(1, 4), weights=(-1, 0, 1))
    d = DeviatorGame(g)
    lasso = play_deviator(d, lift_profile(random_profile(rng, g)), random_adam(rng, d, memory=rng.randint(1, 3)))
    # payoff vectors live in [-W, W]
    grid = [Fraction(a, 2) for a in range(-2 * g.W, 2 * g.W + 1)]
    p = tuple(rng.choice(grid) for _ in range(g.n))
    r = Fraction(rng.randint(0, 2), 2)
    return rng, g, lasso, p, rng.randint(0, g.n), rng.randint(0, g.n), r


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_pinning_dims(seed):
    _, g, lasso, p, k, t, _ = random_case(seed)
    spec = build_weights(g, k, t)
    means = lasso_means(spec, lasso)
    n = g.n
    pay = projected_payoffs(g, lasso)
    for i in range(n):
        lhs = bool(limit_deviators(lasso)) or pay[i] == p[i]
        assert lhs == (means[2 * n + i] >= p[i] and means[3 * n + i] >= -p[i])


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_resilience_and_immunity_dims(seed):
    _, g, lasso, p, k, t, r = random_case(seed)
    spec = build_weights(g, k, t)
    means = lasso_means(spec, lasso)
    n = g.n
    assert resilience_obj(g, lasso, k, p) == all(means[n + i] >= -p[i] for i in range(n))
    assert immunity_obj(g, lasso, t, r, p) == all(means[i] >= p[i] - r for i in range(n))
    u = threshold_for(n, p, r)
    pinned = all(means[j] >= u[j] for j in range(2 * n, 4 * n))
    assert meets_threshold(spec, lasso, u) == (robustness_obj(g, lasso, k, t, r, p) and pinned)


# -- candidate payoffs

def test_candidates_include_cycle_means():
    g = choice_game()
    cands = candidate_payoffs(g, 2)
    # integers first, then halves
    assert cands == [(Fraction(0),), (Fraction(1),), (Fraction(1, 2),)]
    assert candidate_payoffs(g, 3)[-2:] == [(Fraction(1, 3),), (Fraction(2, 3),)]


def test_candidates_constant_component():
    g = one_state_game((1, -1))
    assert candidate_payoffs(g, 5) == [(Fraction(1), Fraction(-1))]


# -- end-to-end decisions

@pytest.mark.parametrize("mode", ["enum", "lp"])
def test_all_zero_weights(mode):
    g = make_game(["A1", "A2"], ["a", "b"], ["s", "t"], "s", {"s": [0, 0], "t": [0, 0]},
                  lambda s, m: "t" if m[0] == m[1] else "s")
    for k, t, r in ((1, 0, 0), (2, 2, 0), (0, 1, 1)):
        res = solve_robustness(g, RobustQuery(k, t, r, mode=mode))
        assert res.decision == "yes" and res.payoff == (0, 0)


@pytest.mark.parametrize("mode", ["enum", "lp"])
def test_matching_pennies_no(mode):
    assert solve_robustness(pennies_game(), RobustQuery(1, 0, 0, mode=mode)).decision == "no"


def single_player_game(rng):
    g = random_game(rng, players=1, states=rng.randint(1, 4), actions=2, weights=(-1, 0, 1, 2))
    return g


def max_mean_from_start(g):
    gr = WeightedDigraph(list(range(len(g.states))))
    for s in range(len(g.states)):
        for t in g.graph_successors(s):
            gr.add_edge(s, t, g.weights[s])
    return extreme_mean_cycle(gr, 0, "max", start=g.initial).value


def test_single_player_gets_best_cycle(rng):
    for _ in range(15):
        g = single_player_game(rng)
        res = solve_robustness(g, RobustQuery(1, 0, 0))
        assert res.decision == "yes"
        assert res.payoff == (max_mean_from_start(g),)


def test_lp_mode_single_player():
    res = solve_robustness(choice_game(), RobustQuery(1, 0, 0, mode="lp"))
    assert res.decision == "yes" and res.payoff == (1,)


def mixing_game():
    """A1 walks a hub with loops through (1,0) and (0,1) states; A2 has no say."""
    nxt = {("h", "x"): "a", ("h", "y"): "b", ("a", "x"): "h", ("a", "y"): "h", ("b", "x"): "h", ("b", "y"): "h"}
    return make_game(["A1", "A2"], ["x", "y"], ["h", "a", "b"], "h",
                     {"h": [0, 0], "a": [2, 0], "b": [0, 2]}, lambda s, m: nxt[(s, m[0])])


def test_joint_lp_with_extra_equality():
    g = mixing_game()
    spec = build_weights(g, 0, 0)
    sys_ = robust_constraints(2, 0, 0, 0)
    sys_.add({"p1": 1, "p2": -1}, "=", 0)
    point = polyhedron_query_lp(DeviatorGame(g), spec, sys_)
    assert point is not None
    assert point["p1"] == point["p2"] == Fraction(1, 2)
    sys_.add({"p1": 1}, ">=", 1)
    assert polyhedron_query_lp(DeviatorGame(g), spec, sys_) is None


def test_unattainable_threshold():
    g = choice_game()
    spec = build_weights(g, 1, 0)
    sys_ = robust_constraints(1, 1, 0, 0)
    sys_.add({"u1": 1}, ">=", 2)
    assert polyhedron_query_lp(DeviatorGame(g), spec, sys_) is None


def test_budget_gives_inconclusive():
    res = solve_robustness(pennies_game(), RobustQuery(1, 0, 0, budget=0))
    assert res.decision == "inconclusive" and "budget" in res.note


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_modes_agree(seed):
    rng = random.Random(seed)
    g = random_game(rng, players=rng.randint(1, 2), states=rng.randint(1, 3), weights=(0, 1))
    k, t = rng.randint(0, 1), rng.randint(0, 1)
    a = solve_robustness(g, RobustQuery(k, t, 0, mode="enum"))
    b = solve_robustness(g, RobustQuery(k, t, 0, mode="lp", budget=20_000))
    # the joint LP gives up on larger arenas; compare where both decide
    if "inconclusive" not in (a.decision, b.decision):
        assert a.decision == b.decision


def test_query_validation():
    with pytest.raises(ValueError):
        RobustQuery(-1, 0)
    with pytest.raises(ValueError):
        RobustQuery(1, 0, mode="magic")
