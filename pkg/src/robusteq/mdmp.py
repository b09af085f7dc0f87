"""Robust equilibria as a multidimensional mean-payoff value problem.

Every deviator state carries a vector of 4n integer weights (n players):

* dims ``0..n-1`` (immunity): ``w_i`` if at most ``t`` players deviated and
  player ``i`` is not among them, ``W`` otherwise;
* dims ``n..2n-1`` (resilience): ``-w_i`` while fewer than ``k`` deviated, or
  exactly ``k`` including ``i``; ``W`` otherwise;
* dims ``2n..3n-1`` and ``3n..4n-1`` pin the payoff when nobody deviated:
  ``w_i`` and ``-w_i`` with no deviator, ``W`` otherwise.

Liminf is required on immunity and ``2n..3n-1``, limsup on the other two.
A profile with payoff ``p`` is (k,t,r)-robust exactly when Eve can ensure
``u = (p - r, -p, p, -p)``.
"""

from __future__ import annotations

import bisect
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .deviator import DeviatorGame, DeviatorLasso, DeviatorState, popcount
from .fixed import full_deviator_arena, solve_deviator_value
from .game import ConcurrentGame
from .numerics import LinearSystem, format_rational, lp_feasible, tarjan
from .twoplayer import DEFAULT_BUDGET, BudgetExceeded, _prune


@dataclass
class MultiWeightSpec:
    n: int
    k: int
    t: int
    W: int
    base: Tuple[Tuple[int, ...], ...] = field(repr=False)
    _cache: Dict[DeviatorState, Tuple[int, ...]] = field(default_factory=dict, repr=False)

    @property
    def d(self) -> int:
        return 4 * self.n

    @property
    def I(self) -> List[int]:
        n = self.n
        return list(range(n)) + list(range(2 * n, 3 * n))

    @property
    def J(self) -> List[int]:
        n = self.n
        return list(range(n, 2 * n)) + list(range(3 * n, 4 * n))

    def saturated(self, devs: int) -> bool:
        """Every dimension weighs W once more than max(k, t) players deviated."""
        return popcount(devs) > max(self.k, self.t)

    def vector(self, ds: DeviatorState) -> Tuple[int, ...]:
        v = self._cache.get(ds)
        if v is None:
            v = self._compute(ds.state, ds.devs)
            self._cache[ds] = v
        return v

    def _compute(self, s: int, devs: int) -> Tuple[int, ...]:
        n, W, w = self.n, self.W, self.base[s]
        size = popcount(devs)
        imm, res = [], []
        for i in range(n):
            inside = bool(devs >> i & 1)
            imm.append(w[i] if size <= self.t and not inside else W)
            if size < self.k or (size == self.k and inside):
                res.append(-w[i])
            else:
                res.append(W)
        if devs == 0:
            pin = list(w) + [-x for x in w]
        else:
            pin = [W] * (2 * n)
        return tuple(imm + res + pin)


def build_weights(game: ConcurrentGame, k: int, t: int) -> MultiWeightSpec:
    if k < 0 or t < 0:
        raise ValueError("k and t must be nonnegative")
    n = game.n
    return MultiWeightSpec(n, min(k, n), min(t, n), game.W, game.weights)


def lasso_means(spec: MultiWeightSpec, lasso: DeviatorLasso) -> Tuple[Fraction, ...]:
    """Per-dimension cycle mean; on a lasso both liminf and limsup equal it."""
    vs = [spec.vector(ds) for ds, _, _ in lasso.cycle]
    return tuple(Fraction(sum(v[i] for v in vs), len(vs)) for i in range(spec.d))


def meets_threshold(spec: MultiWeightSpec, lasso: DeviatorLasso, u) -> bool:
    means = lasso_means(spec, lasso)
    return all(means[i] >= u[i] for i in range(spec.d))


def pvar(i: int) -> str:
    return f"p{i + 1}"


def uvar(i: int) -> str:
    return f"u{i + 1}"


def robust_constraints(n: int, k: int, t: int, r) -> LinearSystem:
    """u_i = p_i - r, u_{n+i} = -p_i, u_{2n+i} = p_i, u_{3n+i} = -p_i, as pairs of inequalities.

    ``k`` and ``t`` do not enter the system; they shape the weights instead.
    """
    r = Fraction(r)
    if r < 0:
        raise ValueError("r must be nonnegative")
    sys_ = LinearSystem([pvar(i) for i in range(n)] + [uvar(i) for i in range(4 * n)])
    for i in range(n):
        p = pvar(i)
        for j, coef, const in ((i, 1, -r), (n + i, -1, 0), (2 * n + i, 1, 0), (3 * n + i, -1, 0)):
            # u_j - coef * p = const
            row = {uvar(j): 1, p: -coef}
            sys_.add(row, "<=", const)
            sys_.add(row, ">=", const)
    return sys_


def threshold_for(n: int, p, r) -> List[Fraction]:
    p = [Fraction(x) for x in p]
    r = Fraction(r)
    return [x - r for x in p] + [-x for x in p] + list(p) + [-x for x in p]


# ---------------------------------------------------------------------------
# Queries


@dataclass
class RobustQuery:
    k: int
    t: int
    r: Fraction = Fraction(0)
    denbound: Optional[int] = None  # default: number of reachable deviator states
    mode: str = "enum"  # "enum" (candidate payoffs) or "lp" (joint LP, tiny games)
    budget: int = DEFAULT_BUDGET
    workers: int = 1

    def __post_init__(self):
        self.r = Fraction(self.r)
        if self.k < 0 or self.t < 0 or self.r < 0:
            raise ValueError("k, t, r must be nonnegative")
        if self.mode not in ("enum", "lp"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class RobustResult:
    decision: str  # "yes", "no" or "inconclusive"
    payoff: Optional[Tuple[Fraction, ...]] = None
    certificates: List[dict] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    note: str = ""

    def to_json(self, game: ConcurrentGame) -> dict:
        out = {"decision": self.decision,
               "payoff": None if self.payoff is None else
               {p: format_rational(x) for p, x in zip(game.players, self.payoff)},
               "certificates": self.certificates}
        if self.note:
            out["note"] = self.note
        return out


def _empty_graph_sccs(game: ConcurrentGame):
    """Nontrivial SCCs of the game graph reachable from the initial state."""
    succ = {s: game.graph_successors(s) for s in range(len(game.states))}
    seen = {game.initial}
    stack = [game.initial]
    while stack:
        s = stack.pop()
        for t in succ[s]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    order = sorted(seen)
    comps = []
    for comp in reversed(tarjan(order, lambda s: succ[s])):
        comp = sorted(comp)
        if len(comp) > 1 or comp[0] in succ[comp[0]]:
            comps.append(comp)
    return comps, succ


def _pin_system(game: ConcurrentGame, comp, succ) -> Tuple[LinearSystem, List[str]]:
    """Payoffs p that a play settling in ``comp`` can have as liminf vector.

    For each player i one unit conservative flow whose mean is at least p
    everywhere and exactly p_i on coordinate i; long excursions along it pull
    the running average of player i down to p_i without dropping anybody
    below p. This is weaker than asking for a single flow of mean p.
    """
    inside = set(comp)
    edges = [(s, t) for s in comp for t in succ[s] if t in inside]
    sys_ = LinearSystem([pvar(i) for i in range(game.n)])
    names: List[str] = []
    for i in range(game.n):
        xs = [f"x{i}_{k}" for k in range(len(edges))]
        names.extend(xs)
        sys_.add({x: 1 for x in xs}, "=", 1)
        for v in comp:
            row = {}
            for x, (s, t) in zip(xs, edges):
                if s != t:
                    if s == v:
                        row[x] = row.get(x, 0) + 1
                    if t == v:
                        row[x] = row.get(x, 0) - 1
            if row:
                sys_.add(row, "=", 0)
        for j in range(game.n):
            row = {x: game.weights[s][j] for x, (s, _) in zip(xs, edges)}
            row[pvar(j)] = -1
            sys_.add(row, "=" if j == i else ">=", 0)
    return sys_, names


def _first(a, b, ok):
    """Smallest k in [a, b] with ok(k), given ok(b) and ok monotone on the range."""
    while a < b:
        m = (a + b) // 2
        if ok(m):
            b = m
        else:
            a = m + 1
    return a


def _last(a, b, ok):
    """Largest k in [a, b] with ok(k), given ok(a) and ok monotone on the range."""
    while a < b:
        m = (a + b + 1) // 2
        if ok(m):
            a = m
        else:
            b = m - 1
    return a


def candidate_payoffs(game: ConcurrentGame, denbound: int) -> List[Tuple[Fraction, ...]]:
    """Payoff vectors with denominators at most ``denbound`` that some play without
    deviation can have.

    A winning threshold pins the payoff of the deviation-free play, so only
    liminf vectors of plays settling in a reachable SCC of the game graph
    qualify. Ordered by largest denominator, then lexicographically, so
    simple cycle means come early.
    """
    comps, succ = _empty_graph_sccs(game)
    n, W, B = game.n, game.W, denbound
    grid: List[Fraction] = []
    found = set()
    for comp in comps:
        ws = {game.weights[s] for s in comp}
        if len(ws) == 1:
            found.add(tuple(Fraction(x) for x in next(iter(ws))))
            continue
        if not grid:  # only built when some component mixes weights
            grid = sorted({Fraction(a, q) for q in range(1, B + 1) for a in range(-W * q, W * q + 1)})
        sys_, names = _pin_system(game, comp, succ)

        def feasible(fixed):
            return lp_feasible(sys_.substitute(fixed), nonneg=names)

        def extend(prefix):
            i = len(prefix)
            if i == n:
                found.add(tuple(prefix))
                return
            fixed = {pvar(j): prefix[j] for j in range(i)}
            res = feasible(fixed)
            if not res.feasible:
                return
            # the feasible values of p_i form an interval containing the witness;
            # bisect the sorted grid for its ends instead of testing every point
            v = res.point[pvar(i)]
            ok = lambda k: feasible({**fixed, pvar(i): grid[k]}).feasible
            mid = bisect.bisect_left(grid, v)
            if mid < len(grid) and (grid[mid] == v or ok(mid)):
                anchor = mid
            elif mid > 0 and ok(mid - 1):
                anchor = mid - 1
            else:
                return
            lo_k, hi_k = _first(0, anchor, ok), _last(anchor, len(grid) - 1, ok)
            for k in range(lo_k, hi_k + 1):
                extend(prefix + [grid[k]])

        extend([])
    return sorted(found, key=lambda p: (max(x.denominator for x in p), p))


_CTX = {}


def _init_worker(ctx):
    _CTX.clear()
    _CTX.update(ctx)


def _try_candidate(p):
    dgame, spec, query, reach = _CTX["dgame"], _CTX["spec"], _CTX["query"], _CTX["reach"]
    u = threshold_for(spec.n, p, query.r)
    comps = []
    try:
        win = solve_deviator_value(dgame, spec, u, query.budget, trace=comps.append, reach=reach)
    except BudgetExceeded as exc:
        return ("budget", str(exc))
    return ("ok", win[dgame.initial], comps)


def polyhedron_query_enum(dgame: DeviatorGame, spec: MultiWeightSpec, query: RobustQuery,
                          candidates: Sequence[Tuple[Fraction, ...]], reach, trace=None) -> RobustResult:
    """First candidate payoff (in the given order) whose threshold Eve ensures."""
    ctx = {"dgame": dgame, "spec": spec, "query": query, "reach": reach}
    budget_hit = None
    tried = 0

    def handle(p, res):
        nonlocal budget_hit
        if res[0] == "budget":
            budget_hit = budget_hit or res[1]
            return None
        if trace is not None:
            for c in res[2]:
                trace({"candidate": [format_rational(x) for x in p], **c})
        if res[1]:
            certs = [{k: v for k, v in c.items() if k != "seconds"} for c in res[2]]
            return RobustResult("yes", tuple(p), certs, {"candidates": len(candidates), "tried": tried})
        return None

    if query.workers <= 1 or len(candidates) <= 1:
        _init_worker(ctx)
        for p in candidates:
            tried += 1
            out = handle(p, _try_candidate(p))
            if out:
                return out
    else:
        with ProcessPoolExecutor(query.workers, initializer=_init_worker, initargs=(ctx,)) as ex:
            for p, res in zip(candidates, ex.map(_try_candidate, candidates)):
                tried += 1
                out = handle(p, res)
                if out:
                    ex.shutdown(wait=True, cancel_futures=True)
                    return out
    stats = {"candidates": len(candidates), "tried": tried}
    if budget_hit:
        return RobustResult("inconclusive", stats=stats, note=budget_hit)
    return RobustResult("no", stats=stats)


def _minimal_graphs(arena, start, budget):
    """Reachable edge sets of every positional Adam strategy, keeping only minimal ones.

    Adam's choice is branched on only where the play can actually get to, so
    strategies differing on unreachable vertices are counted once.
    """
    points, fixed = _prune(arena)
    graphs = set()
    leaves = 0

    def succ_of(v, assign):
        for ci in range(len(arena.choices[v])):
            key = (v, ci)
            if key in fixed:
                yield key, fixed[key]
            elif key in assign:
                yield key, points[key][assign[key]]
            else:
                yield key, None

    def go(assign):
        nonlocal leaves
        seen = {start}
        stack = [start]
        edges = set()
        while stack:
            v = stack.pop()
            for key, w in succ_of(v, assign):
                if w is None:
                    for k in range(len(points[key])):
                        go({**assign, key: k})
                    return
                edges.add((v, w))
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        leaves += 1
        if leaves > budget:
            raise BudgetExceeded(leaves, budget, "joint LP")
        graphs.add(frozenset(edges))

    go({})
    # every non-minimal graph contains a minimal one, so comparing with the kept ones suffices
    minimal = []
    for g in sorted(graphs, key=len):
        if not any(h < g for h in minimal):
            minimal.append(g)
    pos = {v: i for i, v in enumerate(arena.vertices)}
    minimal.sort(key=lambda g: sorted((pos[a], pos[b]) for a, b in g))
    return minimal, pos


def _graph_sccs(edges, pos):
    succ = {}
    for a, b in edges:
        succ.setdefault(a, []).append(b)
        succ.setdefault(b, [])
    verts = sorted(succ, key=pos.__getitem__)
    out = []
    for comp in tarjan(verts, lambda v: succ[v]):
        inside = set(comp)
        es = sorted(((a, b) for a, b in edges if a in inside and b in inside),
                    key=lambda e: (pos[e[0]], pos[e[1]]))
        if es:
            out.append(tuple(es))
    return out


def _flow_block(tag, es, weight, spec: MultiWeightSpec) -> Tuple[LinearSystem, List[str]]:
    """Flow x0 for the liminf dimensions plus one flow per limsup dimension."""
    sys_ = LinearSystem()
    flows: List[str] = []
    verts = {v for e in es for v in e}
    for f, extra in [("a", [])] + [(f"b{j}", [j]) for j in spec.J]:
        names = [f"{tag}{f}_{k}" for k in range(len(es))]
        flows.extend(names)
        sys_.add({x: 1 for x in names}, "=", 1)
        for v in verts:
            row = {}
            for x, (a, b) in zip(names, es):
                if a != b:
                    if a == v:
                        row[x] = row.get(x, 0) + 1
                    if b == v:
                        row[x] = row.get(x, 0) - 1
            if row:
                sys_.add(row, "=", 0)
        for i in spec.I + extra:
            row = {x: weight[a][i] for x, (a, _) in zip(names, es)}
            row[uvar(i)] = -1
            sys_.add(row, ">=", 0)
    return sys_, flows


def polyhedron_query_lp(dgame: DeviatorGame, spec: MultiWeightSpec, system: LinearSystem,
                        budget: int = DEFAULT_BUDGET) -> Optional[Dict[str, Fraction]]:
    """Joint LP search over SCC choices, one per minimal Adam-induced graph.

    Returns a point (p and u values) or None. Exact but exponential; meant
    for tiny games.
    """
    reach = dgame.reachable()
    arena = full_deviator_arena(dgame, spec, reach, collapse=True)
    graphs, pos = _minimal_graphs(arena, dgame.initial, budget)
    options = [_graph_sccs(g, pos) for g in graphs]
    if any(not o for o in options):
        return None
    order = sorted(range(len(graphs)), key=lambda i: (len(options[i]), i))
    blocks: Dict[tuple, Tuple[LinearSystem, List[str]]] = {}
    base = LinearSystem(list(system.variables))
    base.extend(system)
    for i in range(spec.n):
        base.add({pvar(i): 1}, "<=", spec.W)
        base.add({pvar(i): 1}, ">=", -spec.W)

    def block(es):
        if es not in blocks:
            blocks[es] = _flow_block(f"c{len(blocks)}", es, arena.weight, spec)
        return blocks[es]

    chosen: List[tuple] = []

    def feasible():
        sys_ = LinearSystem(list(base.variables))
        sys_.extend(base)
        nonneg = []
        for es in chosen:
            bs, names = block(es)
            sys_.extend(bs)
            nonneg.extend(names)
        return lp_feasible(sys_, nonneg)

    def go(idx, point):
        # graphs already served by a chosen component add no constraint
        while idx < len(order) and any(es in chosen for es in options[order[idx]]):
            idx += 1
        if idx == len(order):
            return point
        for es in options[order[idx]]:
            chosen.append(es)
            res = feasible()
            out = go(idx + 1, res.point) if res.feasible else None
            chosen.pop()
            if out is not None:
                return out
        return None

    first = feasible()
    point = go(0, first.point) if first.feasible else None
    if point is None:
        return None
    return {v: point[v] for v in system.variables}


def solve_robustness(game: ConcurrentGame, query: RobustQuery, trace=None) -> RobustResult:
    """Is there a (k,t,r)-robust equilibrium? Decided through the deviator game."""
    t0 = time.perf_counter()
    spec = build_weights(game, query.k, query.t)
    dgame = DeviatorGame(game, max_players=max(game.n, 1))
    reach = dgame.reachable()
    timings = {"explore": time.perf_counter() - t0}
    if query.mode == "lp":
        system = robust_constraints(game.n, spec.k, spec.t, query.r)
        try:
            point = polyhedron_query_lp(dgame, spec, system, query.budget)
        except BudgetExceeded as exc:
            return RobustResult("inconclusive", note=str(exc), stats={"timings": timings})
        timings["search"] = time.perf_counter() - t0 - timings["explore"]
        if point is None:
            return RobustResult("no", stats={"timings": timings})
        p = tuple(point[pvar(i)] for i in range(game.n))
        cert = [{"threshold": [format_rational(point[uvar(i)]) for i in range(spec.d)]}]
        return RobustResult("yes", p, cert, {"timings": timings})
    B = query.denbound or len(reach)
    cands = candidate_payoffs(game, B)
    timings["candidates"] = time.perf_counter() - t0 - timings["explore"]
    res = polyhedron_query_enum(dgame, spec, query, cands, reach, trace)
    res.stats["denbound"] = B
    res.stats["deviator_states"] = len(reach)
    timings["search"] = time.perf_counter() - t0 - sum(timings.values())
    res.stats["timings"] = timings
    return res
