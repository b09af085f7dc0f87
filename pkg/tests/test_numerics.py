import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from robusteq.gen import random_graph, simple_cycles
from robusteq.numerics import (LinearSystem, WeightedDigraph, extreme_mean_cycle, format_rational,
                               lp_feasible, parse_rational, sccs)


def test_rational_round_trip():
    for q in (Fraction(0), Fraction(-3, 4), Fraction(7)):
        assert parse_rational(format_rational(q)) == q
    assert format_rational(2) == "2/1"
    assert parse_rational(" -1/2 ") == Fraction(-1, 2)
    with pytest.raises(ValueError):
        parse_rational("half")


# -- strongly connected components

def test_scc_single_cycle():
    g = WeightedDigraph()
    for a, b in ((0, 1), (1, 2), (2, 0)):
        g.add_edge(a, b, (0,))
    comps = sccs(g)
    assert len(comps) == 1 and not comps[0].trivial and set(comps[0].vertices) == {0, 1, 2}


def test_scc_dag_singletons():
    g = WeightedDigraph()
    g.add_edge("a", "b", (0,))
    g.add_edge("b", "c", (0,))
    comps = sccs(g)
    assert [c.vertices for c in comps] == [("a",), ("b",), ("c",)]
    assert all(c.trivial for c in comps)


def test_scc_bridge():
    g = WeightedDigraph()
    for a, b in ((0, 1), (1, 0), (1, 2), (2, 3), (3, 2)):
        g.add_edge(a, b, (0,))
    comps = sccs(g)
    assert [set(c.vertices) for c in comps] == [{0, 1}, {2, 3}]
    assert not any(c.trivial for c in comps)


def test_scc_self_loop_not_trivial():
    g = WeightedDigraph()
    g.add_edge("x", "x", (1,))
    assert not sccs(g)[0].trivial


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 9))
def test_scc_is_topological_partition(seed, n):
    g = random_graph(random.Random(seed), n)
    comps = sccs(g)
    where = {}
    for i, c in enumerate(comps):
        for v in c.vertices:
            assert v not in where
            where[v] = i
    assert set(where) == set(g.vertices)
    for s, d, _ in g.edges:
        assert where[s] <= where[d]
    # independent check against networkx
    ng = nx.DiGraph()
    ng.add_nodes_from(g.vertices)
    ng.add_edges_from((s, d) for s, d, _ in g.edges)
    assert {frozenset(c.vertices) for c in comps} == {frozenset(c) for c in nx.strongly_connected_components(ng)}


# -- extreme mean cycles

def loop_vs_two_cycle():
    g = WeightedDigraph()
    g.add_edge("a", "a", (1,))
    g.add_edge("a", "b", (0,))
    g.add_edge("b", "a", (4,))
    return g


def test_mean_cycle_self_loop():
    g = WeightedDigraph()
    g.add_edge(0, 0, (3,))
    mc = extreme_mean_cycle(g)
    assert mc.value == 3 and mc.cycle == (0,)


def test_mean_cycle_max_and_min():
    g = loop_vs_two_cycle()
    hi = extreme_mean_cycle(g, sense="max")
    lo = extreme_mean_cycle(g, sense="min")
    assert hi.value == 2 and set(hi.cycle) == {"a", "b"}
    assert lo.value == 1 and lo.cycle == ("a",)


def test_mean_cycle_acyclic():
    g = WeightedDigraph()
    g.add_edge(0, 1, (5,))
    assert not extreme_mean_cycle(g).found


def test_mean_cycle_respects_start():
    g = WeightedDigraph()
    g.add_edge("s", "s", (0,))
    g.add_edge("t", "t", (9,))
    assert extreme_mean_cycle(g, start="s").value == 0
    assert extreme_mean_cycle(g).value == 9


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 8), st.sampled_from(["max", "min"]))
def test_mean_cycle_matches_brute_force(seed, n, sense):
    rng = random.Random(seed)
    g = random_graph(rng, n, dims=2)
    dim = rng.randrange(2)
    # brute force: best parallel edge per pair, all simple cycles
    pick = max if sense == "max" else min
    best_edge = {}
    for s, d, w in g.edges:
        best_edge[(s, d)] = pick(best_edge.get((s, d), w[dim]), w[dim])
    means = []
    for cyc in simple_cycles(g):
        pairs = list(zip(cyc, cyc[1:] + cyc[:1]))
        means.append(Fraction(sum(best_edge[p] for p in pairs), len(pairs)))
    mc = extreme_mean_cycle(g, dim, sense)
    if not means:
        assert not mc.found
        return
    assert mc.value == pick(means)
    # the witness is a simple cycle attaining the value
    cyc = list(mc.cycle)
    assert len(set(cyc)) == len(cyc)
    pairs = list(zip(cyc, cyc[1:] + cyc[:1]))
    assert Fraction(sum(best_edge[p] for p in pairs), len(pairs)) == mc.value


# -- linear feasibility

def test_lp_trivial_feasible():
    s = LinearSystem()
    s.add({"x": 1}, ">=", 0)
    s.add({"x": 1}, ">=", 1)
    res = lp_feasible(s)
    assert res.feasible and res.point["x"] >= 1 and s.satisfied_by(res.point)


def test_lp_trivial_infeasible():
    s = LinearSystem()
    s.add({"x": 1}, ">=", 1)
    s.add({"x": -1}, ">=", 0)
    assert not lp_feasible(s).feasible


def test_lp_two_cycle_flow():
    # edges a->b and b->a, conservation and unit total
    s = LinearSystem()
    s.add({"ab": 1, "ba": -1}, "=", 0)
    s.add({"ab": 1, "ba": 1}, "=", 1)
    res = lp_feasible(s, nonneg=["ab", "ba"])
    assert res.feasible
    assert res.point == {"ab": Fraction(1, 2), "ba": Fraction(1, 2)}


def test_lp_empty_system():
    assert lp_feasible(LinearSystem()).feasible


def test_lp_substitute():
    s = LinearSystem()
    s.add({"x": 1, "y": 1}, "=", 3)
    t = s.substitute({"x": Fraction(1)})
    res = lp_feasible(t)
    assert res.point["y"] == 2


def random_system(rng, nvars, rows):
    names = [f"v{i}" for i in range(nvars)]
    s = LinearSystem(list(names))
    for _ in range(rows):
        coeffs = {v: rng.randint(-3, 3) for v in names if rng.random() < 0.7}
        s.add(coeffs, rng.choice((">=", "<=", "=", ">=")), rng.randint(-4, 4))
    return s, names


def scipy_feasible(s, names, nonneg):
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row, rel, b in s.constraints:
        vec = [float(row.get(v, 0)) for v in names]
        if rel == "=":
            a_eq.append(vec)
            b_eq.append(float(b))
        elif rel == "<=":
            a_ub.append(vec)
            b_ub.append(float(b))
        else:
            a_ub.append([-x for x in vec])
            b_ub.append(-float(b))
    bounds = [(0, None) if v in nonneg else (None, None) for v in names]
    res = linprog([0] * len(names), A_ub=a_ub or None, b_ub=b_ub or None, A_eq=a_eq or None,
                  b_eq=b_eq or None, bounds=bounds, method="highs")
    return res.status == 0


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_lp_agrees_with_scipy_and_points_check(seed):
    rng = random.Random(seed)
    s, names = random_system(rng, rng.randint(1, 4), rng.randint(1, 6))
    nonneg = [v for v in names if rng.random() < 0.5]
    res = lp_feasible(s, nonneg)
    if res.feasible:
        assert s.satisfied_by(res.point)
        assert all(res.point.get(v, 0) >= 0 for v in nonneg)
    assert res.feasible == scipy_feasible(s, names, set(nonneg))
