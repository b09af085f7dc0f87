"""Exact numerical building blocks: SCCs, extreme mean cycles and a rational LP.

Everything here works on python ints and :class:`fractions.Fraction`; there is
no floating point on any code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

Vertex = Hashable


def parse_rational(text) -> Fraction:
    """Parse ``"num/den"``, an integer, or a Fraction into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        return Fraction(text.strip())
    raise ValueError(f"not a rational: {text!r}")


def format_rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass
class WeightedDigraph:
    """Directed multigraph whose edges carry integer weight vectors."""

    vertices: List[Vertex] = field(default_factory=list)
    edges: List[Tuple[Vertex, Vertex, Tuple[int, ...]]] = field(default_factory=list)

    def __post_init__(self):
        self._index = {v: i for i, v in enumerate(self.vertices)}

    def add_vertex(self, v):
        if v not in self._index:
            self._index[v] = len(self.vertices)
            self.vertices.append(v)

    def add_edge(self, src, dst, weight):
        self.add_vertex(src)
        self.add_vertex(dst)
        self.edges.append((src, dst, tuple(weight)))

    def successors(self) -> Dict[Vertex, List[Vertex]]:
        succ = {v: [] for v in self.vertices}
        for s, d, _ in self.edges:
            succ[s].append(d)
        return succ

    def reachable(self, start) -> set:
        succ = self.successors()
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in succ[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def restrict(self, keep) -> "WeightedDigraph":
        keep = set(keep)
        g = WeightedDigraph([v for v in self.vertices if v in keep])
        g.edges = [e for e in self.edges if e[0] in keep and e[1] in keep]
        return g


@dataclass(frozen=True)
class Component:
    vertices: Tuple[Vertex, ...]
    trivial: bool  # single vertex without self-loop


def tarjan(vertices: Sequence[Vertex], succ) -> List[List[Vertex]]:
    """Iterative Tarjan; returns SCCs in reverse topological order (sinks first)."""
    index: Dict[Vertex, int] = {}
    low: Dict[Vertex, int] = {}
    on_stack = set()
    stack: List[Vertex] = []
    out: List[List[Vertex]] = []
    counter = 0
    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def sccs(graph: WeightedDigraph) -> List[Component]:
    """Strongly connected components in topological order (sources first).

    Every edge of the graph either stays inside a component or goes to a
    component that appears later in the returned list.
    """
    succ = graph.successors()
    comps = tarjan(graph.vertices, lambda v: succ[v])
    comps.reverse()
    loops = {s for s, d, _ in graph.edges if s == d}
    order = {v: i for i, v in enumerate(graph.vertices)}
    result = []
    for comp in comps:
        comp.sort(key=order.__getitem__)
        trivial = len(comp) == 1 and comp[0] not in loops
        result.append(Component(tuple(comp), trivial))
    return result


@dataclass(frozen=True)
class MeanCycle:
    value: Optional[Fraction]
    cycle: Tuple[Vertex, ...] = ()  # simple cycle, first vertex not repeated

    @property
    def found(self) -> bool:
        return self.value is not None


def _karp_min(verts, edges) -> Fraction:
    # edges: list of (i, j, w) on 0..n-1, graph strongly connected
    n = len(verts)
    inf = None
    dist = [[inf] * n for _ in range(n + 1)]
    dist[0][0] = 0
    for k in range(1, n + 1):
        prev, cur = dist[k - 1], dist[k]
        for i, j, w in edges:
            if prev[i] is not None:
                c = prev[i] + w
                if cur[j] is None or c < cur[j]:
                    cur[j] = c
    best = None
    for v in range(n):
        if dist[n][v] is None:
            continue
        worst = None
        for k in range(n):
            if dist[k][v] is None:
                continue
            q = Fraction(dist[n][v] - dist[k][v], n - k)
            if worst is None or q > worst:
                worst = q
        if worst is not None and (best is None or worst < best):
            best = worst
    return best


def _zero_cycle(n, edges, lam) -> List[int]:
    # All cycles have reweighted cost >= 0; find one with cost exactly 0 among tight edges.
    rew = [(i, j, w - lam) for i, j, w in edges]
    dist = [Fraction(0)] * n
    for _ in range(n):
        changed = False
        for i, j, c in rew:
            if dist[i] + c < dist[j]:
                dist[j] = dist[i] + c
                changed = True
        if not changed:
            break
    tight = [[] for _ in range(n)]
    for i, j, c in rew:
        if dist[i] + c == dist[j]:
            tight[i].append(j)
    color = [0] * n
    for root in range(n):
        if color[root]:
            continue
        path = [root]
        iters = [iter(tight[root])]
        color[root] = 1
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                color[path.pop()] = 2
                iters.pop()
                continue
            if color[nxt] == 1:
                return path[path.index(nxt):]
            if color[nxt] == 0:
                color[nxt] = 1
                path.append(nxt)
                iters.append(iter(tight[nxt]))
    raise AssertionError("no tight cycle; mean-cycle value inconsistent")


def extreme_mean_cycle(graph: WeightedDigraph, dimension: int = 0, sense: str = "max",
                       start=None) -> MeanCycle:
    """Optimal cycle mean of one weight dimension among cycles reachable from ``start``.

    Karp's path-length dynamic program per SCC, then a simple witness cycle is
    read off the tight subgraph of the reweighted graph. ``start=None`` means
    the whole graph. Returns ``MeanCycle(None)`` when no cycle is reachable.
    """
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be max or min, got {sense!r}")
    sign = -1 if sense == "max" else 1
    g = graph if start is None else graph.restrict(graph.reachable(start))
    best: Optional[Fraction] = None
    witness: Tuple = ()
    for comp in sccs(g):
        if comp.trivial:
            continue
        local = {v: i for i, v in enumerate(comp.vertices)}
        edges = [(local[s], local[d], sign * w[dimension]) for s, d, w in g.edges
                 if s in local and d in local]
        val = _karp_min(comp.vertices, edges)
        if best is None or val < best:
            cyc = _zero_cycle(len(comp.vertices), edges, val)
            best = val
            witness = tuple(comp.vertices[i] for i in cyc)
    if best is None:
        return MeanCycle(None)
    return MeanCycle(sign * best, witness)


# ---------------------------------------------------------------------------
# Linear feasibility


@dataclass
class LinearSystem:
    """Rows ``sum(coeffs[v] * v) rel b`` with ``rel`` in ``>=``, ``<=``, ``=``."""

    variables: List[str] = field(default_factory=list)
    constraints: List[Tuple[Dict[str, Fraction], str, Fraction]] = field(default_factory=list)

    def add(self, coeffs: Dict[str, object], rel: str, b) -> None:
        if rel not in (">=", "<=", "="):
            raise ValueError(f"bad relation {rel!r}")
        row = {}
        for v, c in coeffs.items():
            if v not in self.variables:
                self.variables.append(v)
            c = Fraction(c)
            if c:
                row[v] = row.get(v, 0) + c
        self.constraints.append((row, rel, Fraction(b)))

    def extend(self, other: "LinearSystem") -> None:
        for v in other.variables:
            if v not in self.variables:
                self.variables.append(v)
        self.constraints.extend(other.constraints)

    def satisfied_by(self, point: Dict[str, Fraction]) -> bool:
        for row, rel, b in self.constraints:
            lhs = sum((c * point.get(v, 0) for v, c in row.items()), Fraction(0))
            if rel == ">=" and not lhs >= b:
                return False
            if rel == "<=" and not lhs <= b:
                return False
            if rel == "=" and lhs != b:
                return False
        return True

    def substitute(self, values: Dict[str, Fraction]) -> "LinearSystem":
        out = LinearSystem([v for v in self.variables if v not in values])
        for row, rel, b in self.constraints:
            nb = b - sum((c * values[v] for v, c in row.items() if v in values), Fraction(0))
            out.constraints.append(({v: c for v, c in row.items() if v not in values}, rel, nb))
        return out


@dataclass(frozen=True)
class LPResult:
    feasible: bool
    point: Optional[Dict[str, Fraction]] = None


try:  # exact rationals in C when available; same results, much faster pivots
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


def _to_fraction(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def lp_feasible(system: LinearSystem, nonneg: Iterable[str] = ()) -> LPResult:
    """Exact phase-one simplex with Bland's rule.

    Variables in ``nonneg`` are constrained to be >= 0, the rest are free.
    Returns a witness point satisfying every row exactly when feasible.
    """
    nonneg = set(nonneg)
    cols: List[Tuple[str, int]] = []  # (variable, sign)
    for v in system.variables:
        cols.append((v, 1))
        if v not in nonneg:
            cols.append((v, -1))
    nstruct = len(cols)
    colpos: Dict[str, List[Tuple[int, int]]] = {}
    for j, (v, s) in enumerate(cols):
        colpos.setdefault(v, []).append((j, s))
    # sparse rows: column index -> coefficient
    rows: List[Dict[int, Fraction]] = []
    rhs: List[Fraction] = []
    slack = nstruct
    for row, rel, b in system.constraints:
        r: Dict[int, Fraction] = {}
        for v, c in row.items():
            for j, s in colpos[v]:
                if c:
                    r[j] = _Q(c.numerator, c.denominator) * s
        if rel == ">=":
            r[slack] = _Q(-1)
            slack += 1
        elif rel == "<=":
            r[slack] = _Q(1)
            slack += 1
        if b < 0:
            r = {j: -x for j, x in r.items()}
            b = -b
        rows.append(r)
        rhs.append(_Q(b.numerator, b.denominator))
    width = slack
    m = len(rows)
    if m == 0:
        return LPResult(True, {v: Fraction(0) for v in system.variables})
    total = width + m
    for i, r in enumerate(rows):
        r[width + i] = _Q(1)
    basis = [width + i for i in range(m)]
    # reduced costs for min sum(artificials): c_j - c_B B^-1 A_j
    cost: Dict[int, Fraction] = {}
    for r in rows:
        for j, x in r.items():
            if j < width:
                cost[j] = cost.get(j, 0) - x
    obj = -sum(rhs, _Q(0))
    while True:
        enter = min((j for j, c in cost.items() if c < 0), default=None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = rows[i].get(enter)
            if a is not None and a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # cannot happen: phase-one objective is bounded below
            raise AssertionError("unbounded phase one")
        piv_row = rows[leave]
        piv = piv_row[enter]
        if piv != 1:
            inv = 1 / piv
            for j in piv_row:
                piv_row[j] *= inv
            rhs[leave] *= inv
        for i in range(m):
            if i == leave:
                continue
            ri = rows[i]
            f = ri.get(enter)
            if f:
                for j, x in piv_row.items():
                    y = ri.get(j, 0) - f * x
                    if y:
                        ri[j] = y
                    else:
                        ri.pop(j, None)
                rhs[i] -= f * rhs[leave]
        f = cost.get(enter)
        for j, x in piv_row.items():
            y = cost.get(j, 0) - f * x
            if y:
                cost[j] = y
            else:
                cost.pop(j, None)
        obj -= f * rhs[leave]
        basis[leave] = enter
    if obj != 0:
        return LPResult(False)
    values = [Fraction(0)] * total
    for i, b in enumerate(basis):
        values[b] = _to_fraction(rhs[i])
    point = {v: Fraction(0) for v in system.variables}
    for j, (v, s) in enumerate(cols):
        point[v] += s * values[j]
    return LPResult(True, point)
