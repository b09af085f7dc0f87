"""Turn-based two-player games with multidimensional mean-payoff thresholds.

Eve wants, for every dimension ``i`` in ``I``, the liminf of the running
average of ``v_i`` to be at least ``u_i``, and for every ``j`` in ``J`` the
limsup of ``v_j`` to be at least ``u_j``. Adam is assumed to have positional
spoiling strategies; a positional Adam strategy leaves Eve a one-player graph.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from pysat.solvers import Solver

from .numerics import LinearSystem, WeightedDigraph, extreme_mean_cycle, lp_feasible, sccs, tarjan

DEFAULT_BUDGET = 200_000


class BudgetExceeded(RuntimeError):
    """Raised when a search needs more Adam strategies than allowed."""

    def __init__(self, count, budget, where=None):
        self.count = count
        self.budget = budget
        self.where = where
        msg = f"needs {count} Adam strategies, budget is {budget}"
        if where is not None:
            msg += f" (at {where})"
        super().__init__(msg)


class Budget:
    """Running count of Adam strategies examined, shared across calls."""

    def __init__(self, limit: int = DEFAULT_BUDGET):
        self.limit = limit
        self.used = 0

    def spend(self, count: int, where=None) -> None:
        self.used += count
        if self.used > self.limit:
            raise BudgetExceeded(self.used, self.limit, where)


def as_budget(budget) -> Budget:
    return budget if isinstance(budget, Budget) else Budget(budget)


@dataclass
class TwoPlayerGame:
    """Eve vertices with integer weight vectors.

    ``choices[v]`` lists Eve's options at ``v``; each option is the list of
    successors Adam may pick from. ``status`` marks absorbing vertices whose
    outcome is already known (True: Eve wins from there).
    """

    vertices: List[Hashable]
    weight: Dict[Hashable, Tuple[int, ...]]
    choices: Dict[Hashable, List[List[Hashable]]]
    status: Dict[Hashable, bool] = field(default_factory=dict)

    def successors(self, v):
        out = []
        for opts in self.choices[v]:
            for w in opts:
                if w not in out:
                    out.append(w)
        return out


def reduce_choices(choices: List[List[Hashable]]) -> List[List[Hashable]]:
    """Drop Eve options whose Adam successor set contains another option's.

    Offering Adam a superset of responses never helps Eve, and identical
    options are interchangeable, so the game's value is unchanged.
    """
    sets = [frozenset(o) for o in choices]
    keep = []
    for i, a in enumerate(sets):
        dominated = any(b < a or (b == a and j < i) for j, b in enumerate(sets))
        if not dominated:
            keep.append(choices[i])
    return keep


@dataclass
class Achievability:
    ok: bool
    component: Tuple = ()
    flows: List[Tuple[str, Dict[Tuple, Fraction]]] = field(default_factory=list)
    note: str = ""


def _shortest_cycle(verts, succ, inside):
    best = None
    for root in verts:
        prev = {root: None}
        q = deque([root])
        found = None
        while q and found is None:
            v = q.popleft()
            for w in succ[v]:
                if w not in inside:
                    continue
                if w == root:
                    found = v
                    break
                if w not in prev:
                    prev[w] = v
                    q.append(w)
        if found is not None:
            cyc = []
            v = found
            while v is not None:
                cyc.append(v)
                v = prev[v]
            cyc.reverse()
            if best is None or len(cyc) < len(best):
                best = cyc
        if best is not None and len(best) == 1:
            break
    return best


def _cycle_flow(cycle, by_pair, score=None):
    k = len(cycle)
    flow = {}
    for i in range(k):
        keys = by_pair[(cycle[i], cycle[(i + 1) % k])]
        e = max(keys, key=score) if score else keys[0]
        flow[e] = Fraction(1, k)
    return flow


def _flow_for(dims, u, verts, edges, wmap, succ, inside, by_pair):
    """A unit conservative flow on ``edges`` meeting ``u`` on ``dims``, or None."""
    dims = list(dims)
    if not dims:
        cyc = _shortest_cycle(verts, succ, inside)
        return _cycle_flow(cyc, by_pair) if cyc else None
    if len(dims) == 1:
        d = dims[0]
        g = WeightedDigraph(list(verts))
        g.edges = [(e[0], e[1], (wmap[e][d],)) for e in edges]
        mc = extreme_mean_cycle(g, 0, "max")
        if mc.found and mc.value >= u[d]:
            return _cycle_flow(mc.cycle, by_pair, lambda e: wmap[e][d])
        return None
    sys_ = LinearSystem()
    names = [f"x{k}" for k in range(len(edges))]
    sys_.variables = list(names)
    sys_.add({n: 1 for n in names}, "=", 1)
    for v in verts:
        row = {}
        for k, e in enumerate(edges):
            if e[0] == e[1]:
                continue
            if e[0] == v:
                row[names[k]] = row.get(names[k], 0) + 1
            if e[1] == v:
                row[names[k]] = row.get(names[k], 0) - 1
        if row:
            sys_.add(row, "=", 0)
    for d in dims:
        sys_.add({names[k]: wmap[e][d] for k, e in enumerate(edges)}, ">=", u[d])
    res = lp_feasible(sys_, nonneg=names)
    if not res.feasible:
        return None
    return {e: res.point[names[k]] for k, e in enumerate(edges) if res.point[names[k]]}


def component_achievable(verts, edges, wmap, I, J, u) -> Optional[List[Tuple[str, Dict]]]:
    """Flows certifying that a strongly connected vertex set meets the threshold.

    ``edges`` are hashable keys whose first two entries are source and target;
    ``wmap`` gives each key's weight vector.
    """
    inside = set(verts)
    succ = {v: [] for v in verts}
    by_pair = {}
    for e in edges:
        if (e[0], e[1]) not in by_pair:
            succ[e[0]].append(e[1])
            by_pair[(e[0], e[1])] = []
        by_pair[(e[0], e[1])].append(e)
    live_I, live_J = [], []
    for dims, live in ((I, live_I), (J, live_J)):
        for i in dims:
            lo = min(wmap[e][i] for e in edges)
            hi = max(wmap[e][i] for e in edges)
            if hi < u[i]:
                return None
            if lo < u[i]:
                live.append(i)
    args = (u, verts, edges, wmap, succ, inside, by_pair)
    both = _flow_for(live_I + live_J, *args)
    if both is not None:
        return [("all", both)]
    if not live_J:
        return None
    x0 = _flow_for(live_I, *args)
    if x0 is None:
        return None
    flows = [("liminf", x0)]
    for j in live_J:
        xj = _flow_for(live_I + [j], *args)
        if xj is None:
            return None
        flows.append((f"limsup{j}", xj))
    return flows


def one_player_achievable(graph: WeightedDigraph, I: Sequence[int], J: Sequence[int], u,
                          start=None) -> Achievability:
    """Can a single player meet the threshold ``u`` from ``start``?

    True iff some reachable SCC carries a unit conservative flow meeting the
    liminf dimensions, and for each limsup dimension another flow meeting it
    together with the liminf dimensions.
    """
    u = [Fraction(x) for x in u]
    g = graph if start is None else graph.restrict(graph.reachable(start))
    keyed = [(s_, t, k) for k, (s_, t, _) in enumerate(g.edges)]
    wmap = {key: g.edges[key[2]][2] for key in keyed}
    any_cycle = False
    for comp in sccs(g):
        if comp.trivial:
            continue
        any_cycle = True
        inside = set(comp.vertices)
        edges = [e for e in keyed if e[0] in inside and e[1] in inside]
        flows = component_achievable(comp.vertices, edges, wmap, I, J, u)
        if flows is not None:
            return Achievability(True, comp.vertices, flows)
    return Achievability(False, note="" if any_cycle else "no reachable cycle")


# ---------------------------------------------------------------------------
# Value problem


def _prune(game: TwoPlayerGame):
    """Adam's options per (vertex, choice) after dominance pruning on labelled sinks."""
    points = {}
    fixed = {}
    for v in game.vertices:
        for ci, opts in enumerate(game.choices[v]):
            lose = [w for w in opts if game.status.get(w) is False]
            if lose:
                fixed[(v, ci)] = lose[0]
                continue
            keep = [w for w in opts if game.status.get(w) is not True] or [opts[0]]
            if len(keep) == 1:
                fixed[(v, ci)] = keep[0]
            else:
                points[(v, ci)] = keep
    return points, fixed


def _induced(game, fixed, points, tau):
    """One-player graph and, per edge, the Adam literal that produced it (None if forced)."""
    succ = {v: [] for v in game.vertices}
    origin = {}
    for v in game.vertices:
        for ci in range(len(game.choices[v])):
            key = (v, ci)
            if key in fixed:
                w, lit = fixed[key], None
            else:
                k = tau.get(key, 0)
                w, lit = points[key][k], (key, k)
            e = (v, w)
            if e not in origin:
                succ[v].append(w)
                origin[e] = lit
            elif lit is None:
                origin[e] = None
    return succ, origin


def _check_induced(game, succ, I, J, u, start):
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    order = [v for v in game.vertices if v in seen]
    comps = tarjan(order, lambda v: succ[v])
    comps.reverse()
    pos = {v: i for i, v in enumerate(game.vertices)}
    for comp in comps:
        comp.sort(key=pos.__getitem__)
        inside = set(comp)
        edges = [(v, w) for v in comp for w in succ[v] if w in inside]
        if not edges:
            continue
        wmap = {e: game.weight[e[0]] for e in edges}
        flows = component_achievable(comp, edges, wmap, I, J, u)
        if flows is not None:
            return comp, flows
    return None


def _bfs_path(succ, src, targets, inside=None, cost=None):
    """Path from ``src`` into ``targets`` as an edge list; with ``cost`` (edge -> 0/1)
    the path crossing the fewest cost-1 edges."""
    prev = {src: None}
    dist = {src: 0}
    q = deque([src])
    while q:
        v = q.popleft()
        if v in targets:
            path = []
            while prev[v] is not None:
                path.append((prev[v], v))
                v = prev[v]
            return path
        for w in succ[v]:
            if inside is not None and w not in inside:
                continue
            c = cost((v, w)) if cost else 1
            if w not in dist or dist[v] + c < dist[w]:
                dist[w] = dist[v] + c
                prev[w] = v
                if c == 0:
                    q.appendleft(w)
                else:
                    q.append(w)
    return None


def _certificate_edges(succ, start, comp, flows, origin=None):
    """Edges Eve's win relies on: flow supports, links between them, and an access path.

    Paths prefer edges Adam cannot redirect, so the resulting nogood is small.
    """
    cost = (lambda e: 0 if origin[e] is None else 1) if origin is not None else None
    inside = set(comp)
    support = set()
    for _, f in flows:
        support.update((e[0], e[1]) for e, x in f.items() if x)
    touched = sorted({v for e in support for v in e}, key=comp.index)
    root = touched[0]
    edges = set(support)
    pred = {v: [] for v in comp}
    for v in comp:
        for w in succ[v]:
            if w in inside:
                pred[w].append(v)
    rcost = (lambda e: cost((e[1], e[0]))) if cost else None
    for v in touched[1:]:
        edges.update(_bfs_path(succ, root, {v}, inside, cost))
        edges.update((b, a) for a, b in _bfs_path(pred, root, {v}, inside, rcost))
    edges.update(_bfs_path(succ, start, set(touched), None, cost))
    return edges


class _TauSearch:
    """Adam strategies avoiding every nogood so far, via incremental SAT.

    One boolean per (point, option); each point needs some true option, each
    nogood forbids its literals from all being true together. Any true option
    of a point may be played: a strategy built that way never contains a
    whole nogood.
    """

    def __init__(self, points):
        self.points = points
        self.var: Dict[Tuple, int] = {}
        self.solver = Solver(name="m22")

    def _lit(self, p, k):
        key = (p, k)
        if key not in self.var:
            if not any((p, j) in self.var for j in range(len(self.points[p]))):
                base = len(self.var) + 1
                for j in range(len(self.points[p])):
                    self.var[(p, j)] = base + j
                self.solver.add_clause([base + j for j in range(len(self.points[p]))])
        return self.var[key]

    def forbid(self, literals) -> None:
        self.solver.add_clause([-self._lit(p, k) for p, k in sorted(literals, key=repr)])

    def next(self) -> Optional[Dict[Tuple, int]]:
        if not self.solver.solve():
            return None
        true = {v for v in self.solver.get_model() if v > 0}
        tau = {}
        for (p, k), v in self.var.items():
            if v in true and p not in tau:
                tau[p] = k
        return tau

    def close(self) -> None:
        self.solver.delete()


def _sure_wins(game: TwoPlayerGame, u) -> set:
    """Vertices from which every play meets ``u`` whatever either player does.

    An SCC qualifies when all its exits lead to such vertices and its minimum
    cycle mean reaches u in every dimension: the running average of any long
    path inside is then at least that minimum, liminf and limsup alike.
    """
    succ = {v: game.successors(v) for v in game.vertices}
    sure = set()
    for comp in tarjan(game.vertices, lambda v: succ[v]):  # sinks first
        inside = set(comp)
        if any(w not in inside and w not in sure for v in comp for w in succ[v]):
            continue
        if any(v in game.status for v in comp):
            if all(game.status.get(v) is True for v in comp):
                sure |= inside
            continue
        g = WeightedDigraph(comp)
        for v in comp:
            for w in succ[v]:
                if w in inside:
                    g.add_edge(v, w, game.weight[v])
        if not g.edges or all(extreme_mean_cycle(g, d, "min").value >= x for d, x in enumerate(u)):
            sure |= inside
    return sure


def _as_sinks(game: TwoPlayerGame, verts, u) -> TwoPlayerGame:
    top = tuple(math.ceil(x) for x in u)
    weight, choices, status = dict(game.weight), dict(game.choices), dict(game.status)
    for v in verts:
        weight[v], choices[v], status[v] = top, [[v]], True
    return TwoPlayerGame(game.vertices, weight, choices, status)


def value_ensure(game: TwoPlayerGame, I, J, u, start, budget=DEFAULT_BUDGET,
                 method: str = "cegar") -> bool:
    """Can Eve ensure ``u`` from ``start`` against every positional Adam strategy?

    ``method="enumerate"`` tries every positional Adam strategy; the default
    ``"cegar"`` refines a set of nogoods: each Eve certificate found against
    one Adam strategy rules out every strategy that agrees with it on the
    certificate's edges. Both are exact; ``budget`` (an int or a shared
    :class:`Budget`) bounds the number of Adam strategies examined.
    """
    budget = as_budget(budget)
    u = [Fraction(x) for x in u]
    points, fixed = _prune(game)
    order = list(points)
    if method == "enumerate":
        budget.spend(math.prod(len(points[p]) for p in order), start)
        for combo in itertools.product(*(range(len(points[p])) for p in order)):
            succ, _ = _induced(game, fixed, points, dict(zip(order, combo)))
            if _check_induced(game, succ, I, J, u, start) is None:
                return False
        return True
    if method != "cegar":
        raise ValueError(f"unknown method {method!r}")
    # regions won whatever Adam does would otherwise be refuted choice by choice
    sure = _sure_wins(game, u)
    if start in sure:
        return True
    if sure - set(game.status):
        game = _as_sinks(game, sure, u)
        points, fixed = _prune(game)
    search = _TauSearch(points)
    try:
        while True:
            tau = search.next()
            if tau is None:
                return True
            budget.spend(1, start)
            succ, origin = _induced(game, fixed, points, tau)
            found = _check_induced(game, succ, I, J, u, start)
            if found is None:
                return False
            comp, flows = found
            lits = {origin[e] for e in _certificate_edges(succ, start, comp, flows, origin) if origin[e] is not None}
            if not lits:
                return True
            search.forbid(lits)
    finally:
        search.close()


def winning_region(game: TwoPlayerGame, I, J, u, budget=DEFAULT_BUDGET,
                   method: str = "cegar", only=None) -> Dict[Hashable, bool]:
    """Eve's winning vertices, solving the arena SCC by SCC from the bottom up.

    Vertices in acyclic positions are decided by one-step lookahead; each
    nontrivial SCC becomes a subgame whose exits are absorbing sinks labelled
    with the already known outcome. ``only`` restricts the answer (and the
    work) to vertices reachable from the given ones.
    """
    budget = as_budget(budget)
    u = [Fraction(x) for x in u]
    verts = game.vertices
    if only is not None:
        seen = set(only)
        stack = list(only)
        while stack:
            v = stack.pop()
            for w in game.successors(v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        verts = [v for v in verts if v in seen]
    succ = {v: game.successors(v) for v in verts}
    comps = tarjan(verts, lambda v: succ[v])  # sinks first
    win: Dict[Hashable, bool] = {}
    win_w = tuple(math.ceil(x) for x in u)
    lose_w = tuple(math.floor(x) - 1 for x in u)
    for comp in comps:
        if len(comp) == 1 and comp[0] not in succ[comp[0]]:
            v = comp[0]
            if v in game.status:
                win[v] = game.status[v]
                continue
            win[v] = any(all(win[w] for w in opts) for opts in game.choices[v])
            continue
        inside = set(comp)
        if all(v in game.status for v in comp):
            for v in comp:
                win[v] = game.status[v]
            continue
        W_, L_ = ("__win__",), ("__lose__",)
        sub_choices = {W_: [[W_]], L_: [[L_]]}
        for v in comp:
            opts_out = []
            for opts in game.choices[v]:
                mapped = []
                for w in opts:
                    x = w if w in inside else (W_ if win[w] else L_)
                    if x not in mapped:
                        mapped.append(x)
                opts_out.append(mapped)
            sub_choices[v] = opts_out
        ordered = [v for v in verts if v in inside]
        sub = TwoPlayerGame(ordered + [W_, L_], {**{v: game.weight[v] for v in comp}, W_: win_w, L_: lose_w},
                            sub_choices, {W_: True, L_: False})
        for v in ordered:
            win[v] = value_ensure(sub, I, J, u, v, budget, method)
    return win
