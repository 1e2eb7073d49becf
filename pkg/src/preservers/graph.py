"""Exact weighted graphs, shortest paths and path utilities.

All weights are Python ints, so distances never overflow; the stretch
parameter is a :class:`fractions.Fraction` and every comparison against
``alpha * dist`` is done by cross-multiplication.
"""
from __future__ import annotations

import enum
import heapq
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Iterator, Sequence


class _Unreachable(enum.Enum):
    UNREACHABLE = "UNREACHABLE"

    def __repr__(self) -> str:
        return "UNREACHABLE"


UNREACHABLE = _Unreachable.UNREACHABLE


class GraphError(ValueError):
    """Invalid graph, node id, or path argument."""


class BudgetExhausted(RuntimeError):
    """Raised when a bounded enumeration hits its expansion budget."""


class NotADag(GraphError):
    def __init__(self, cycle: Sequence[int]):
        super().__init__(f"graph has a cycle: {list(cycle)}")
        self.cycle = list(cycle)


def as_fraction(alpha) -> Fraction:
    a = Fraction(alpha)
    if a < 1:
        raise GraphError(f"stretch must be >= 1, got {a}")
    return a


def within_stretch(weight: int, dist: int, alpha: Fraction | None) -> bool:
    """``weight <= alpha * dist`` in exact arithmetic; ``alpha=None`` is infinite."""
    if alpha is None:
        return True
    return weight * alpha.denominator <= alpha.numerator * dist


class Graph:
    """Immutable simple graph on nodes ``0..node_count-1``.

    For undirected graphs each edge is stored once and ``out`` lists both
    directions.
    """

    __slots__ = ("directed", "node_count", "_edges", "_out", "_in")

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int, int]] = (), directed: bool = True):
        if node_count < 0:
            raise GraphError("node_count must be nonnegative")
        self.directed = bool(directed)
        self.node_count = int(node_count)
        out: list[dict[int, int]] = [{} for _ in range(node_count)]
        inn: list[dict[int, int]] = [{} for _ in range(node_count)] if directed else out
        stored = []
        for u, v, w in edges:
            u, v, w = int(u), int(v), int(w)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphError(f"edge ({u}, {v}) out of range for n={node_count}")
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if w < 0:
                raise GraphError(f"negative weight on ({u}, {v})")
            if v in out[u]:
                raise GraphError(f"duplicate edge ({u}, {v})")
            out[u][v] = w
            inn[v][u] = w
            stored.append((u, v, w))
        self._edges = tuple(stored)
        self._out = out
        self._in = inn

    # -- construction helpers

    @classmethod
    def merged(cls, node_count: int, edges: Iterable[tuple[int, int, int]], directed: bool = True) -> "Graph":
        """Build a graph keeping the minimum weight among duplicate edges."""
        best: dict[tuple[int, int], int] = {}
        for u, v, w in edges:
            key = (u, v) if directed or u < v else (v, u)
            if key not in best or w < best[key]:
                best[key] = w
        return cls(node_count, ((u, v, w) for (u, v), w in best.items()), directed)

    def union(self, extra: Iterable[tuple[int, int, int]]) -> "Graph":
        return Graph.merged(self.node_count, list(self._edges) + list(extra), self.directed)

    def subgraph(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Edge-induced subgraph on the same node set, weights taken from ``self``."""
        seen = set()
        picked = []
        for u, v in edges:
            key = (u, v) if self.directed else (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            picked.append((key[0], key[1], self.weight(u, v)))
        return Graph(self.node_count, picked, self.directed)

    def transpose(self) -> "Graph":
        if not self.directed:
            return self
        return Graph(self.node_count, ((v, u, w) for u, v, w in self._edges), True)

    def with_unit_weights(self) -> "Graph":
        return Graph(self.node_count, ((u, v, 1) for u, v, _ in self._edges), self.directed)

    # -- queries

    @property
    def edges(self) -> tuple[tuple[int, int, int], ...]:
        return self._edges

    def num_edges(self) -> int:
        return len(self._edges)

    def edge_keys(self) -> set[tuple[int, int]]:
        return {(u, v) for u, v, _ in self._edges}

    def check_node(self, v: int) -> None:
        if not (isinstance(v, int) and 0 <= v < self.node_count):
            raise GraphError(f"invalid node id {v!r}")

    def out_items(self, u: int):
        return self._out[u].items()

    def in_items(self, v: int):
        return self._in[v].items()

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._out[u]

    def weight(self, u: int, v: int) -> int:
        try:
            return self._out[u][v]
        except KeyError:
            raise GraphError(f"no edge ({u}, {v})") from None

    def outdeg(self, v: int) -> int:
        return len(self._out[v])

    def indeg(self, v: int) -> int:
        return len(self._in[v])

    def degree(self, v: int) -> int:
        """indeg + outdeg for directed graphs, number of incident edges otherwise."""
        if self.directed:
            return len(self._out[v]) + len(self._in[v])
        return len(self._out[v])

    def active_nodes(self) -> list[int]:
        return [v for v in range(self.node_count) if self._out[v] or self._in[v]]

    def total_weight(self) -> int:
        return sum(w for _, _, w in self._edges)

    def is_unit_weighted(self) -> bool:
        return all(w == 1 for _, _, w in self._edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.directed == other.directed
            and self.node_count == other.node_count
            and sorted(self._edges) == sorted(other._edges)
        )

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph({kind}, n={self.node_count}, m={len(self._edges)})"


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]
    weight: int
    hops: int

    @classmethod
    def in_graph(cls, graph: Graph, nodes: Sequence[int]) -> "Path":
        nodes = tuple(int(v) for v in nodes)
        if not nodes:
            raise GraphError("empty path")
        for v in nodes:
            graph.check_node(v)
        w = 0
        for a, b in zip(nodes, nodes[1:]):
            if not graph.has_edge(a, b):
                raise GraphError(f"path uses missing edge ({a}, {b})")
            w += graph.weight(a, b)
        return cls(nodes, w, len(nodes) - 1)

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def target(self) -> int:
        return self.nodes[-1]

    def edge_pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.nodes, self.nodes[1:]))

    def __len__(self) -> int:
        return self.hops


# ---------------------------------------------------------------- distances


def dijkstra(graph: Graph, source: int, reverse: bool = False, cutoff: int | None = None) -> dict[int, int]:
    """Exact single-source distances; nodes absent from the result are unreachable.

    With ``reverse=True`` distances are *to* ``source``.  ``cutoff`` drops
    every node farther than it.
    """
    graph.check_node(source)
    adj = graph._in if reverse else graph._out
    dist = {source: 0}
    done: set[int] = set()
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if cutoff is not None and d > cutoff:
            break
        done.add(u)
        for v, w in adj[u].items():
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return {v: d for v, d in dist.items() if v in done}


def bfs_hops(graph: Graph, source: int, reverse: bool = False, cutoff: int | None = None) -> dict[int, int]:
    """Unweighted hop distances (edge weights ignored)."""
    adj = graph._in if reverse else graph._out
    hops = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        h = hops[u]
        if cutoff is not None and h >= cutoff:
            continue
        for v in adj[u]:
            if v not in hops:
                hops[v] = h + 1
                queue.append(v)
    return hops


def shortest_distance(graph: Graph, source: int, target: int):
    graph.check_node(source)
    graph.check_node(target)
    return dijkstra(graph, source).get(target, UNREACHABLE)


def tiebroken_shortest_path(graph: Graph, source: int, target: int):
    """Shortest path minimising (weight, node sequence lexicographically).

    The comparator is prefix-monotone, so the family of returned paths is a
    consistent tiebreaking scheme whenever all weights are positive.
    """
    graph.check_node(source)
    graph.check_node(target)
    to_t = dijkstra(graph, target, reverse=True)
    if source not in to_t:
        return UNREACHABLE
    return _greedy_lexmin(graph, source, target, to_t)


def _greedy_lexmin(graph: Graph, source: int, target: int, to_t: dict[int, int]) -> Path:
    nodes = [source]
    seen = {source}
    u = source
    weight = 0
    while u != target:
        best = None
        for v, w in graph._out[u].items():
            if v in seen or v not in to_t:
                continue
            if w + to_t[v] == to_t[u] and (best is None or v < best):
                best = v
        if best is None:
            raise GraphError(f"tiebreak walk stuck at {u} (zero-weight cycle?)")
        weight += graph._out[u][best]
        nodes.append(best)
        seen.add(best)
        u = best
    return Path(tuple(nodes), weight, len(nodes) - 1)


def _count_tight_paths(graph: Graph, source: int, dist: dict[int, int], cap: int | None) -> dict[int, int]:
    """Number of shortest source->v paths for every reached v (optionally capped)."""
    by_dist: dict[int, list[int]] = {}
    for v, d in dist.items():
        by_dist.setdefault(d, []).append(v)
    count = {source: 1}
    for d in sorted(by_dist):
        group = by_dist[d]
        if len(group) > 1:
            # zero-weight tight edges inside one distance class need an order
            members = set(group)
            ts = TopologicalSorter({v: [u for u, w in graph._in[v].items() if w == 0 and u in members] for v in group})
            try:
                group = list(ts.static_order())
            except CycleError:
                raise GraphError("zero-weight cycle among shortest paths") from None
        for v in group:
            if v == source:
                continue
            total = 0
            for u, w in graph._in[v].items():
                if u in dist and dist[u] + w == d:
                    total += count.get(u, 0)
            if cap is not None and total > cap:
                total = cap
            count[v] = total
    return count


def count_shortest_paths(graph: Graph, source: int, target: int, cap: int | None = None) -> int:
    dist = dijkstra(graph, source)
    if target not in dist:
        return 0
    sub = {v: d for v, d in dist.items() if d <= dist[target]}
    return _count_tight_paths(graph, source, sub, cap).get(target, 0)


def count_unit_shortest_paths(graph: Graph, source: int, target: int, cap: int | None = None) -> int:
    """Shortest-path count for unit-weight graphs by level-synchronous BFS, stopping at the target's level."""
    graph.check_node(source)
    graph.check_node(target)
    count = {source: 1}
    seen = {source}
    frontier = [source]
    while frontier and target not in count:
        level: dict[int, int] = {}
        for u in frontier:
            cu = count[u]
            for v in graph._out[u]:
                if v in seen:
                    continue
                total = level.get(v, 0) + cu
                level[v] = min(total, cap) if cap is not None else total
        seen.update(level)
        count.update(level)
        frontier = list(level)
    return count.get(target, 0)


def is_unique_shortest(graph: Graph, path: Path) -> bool:
    """True iff ``path`` is the one and only minimum-weight path between its ends."""
    s, t = path.source, path.target
    dist = dijkstra(graph, s, cutoff=path.weight)
    if t not in dist:
        raise GraphError(f"path endpoints {s}->{t} not connected within the path weight")
    if dist[t] != path.weight:
        return False
    try:
        return _count_tight_paths(graph, s, dist, cap=2).get(t, 0) == 1
    except GraphError:
        # zero-weight tight cycle: walks are infinite, count simple paths instead
        return _count_tight_simple_paths(graph, s, t, dist, cap=2) == 1


def _count_tight_simple_paths(graph: Graph, s: int, t: int, dist: dict[int, int], cap: int) -> int:
    to_t = dijkstra(graph, t, reverse=True)
    target = dist[t]
    found = 0
    on_path = {s}
    stack = [iter(graph._out[s].items())]
    nodes = [s]
    while stack:
        u = nodes[-1]
        for v, w in stack[-1]:
            if v in on_path or v not in dist or v not in to_t:
                continue
            if dist[u] + w != dist[v] or dist[v] + to_t[v] != target:
                continue
            if v == t:
                found += 1
                if found >= cap:
                    return found
                continue
            on_path.add(v)
            nodes.append(v)
            stack.append(iter(graph._out[v].items()))
            break
        else:
            stack.pop()
            on_path.discard(nodes.pop())
    return found


def count_paths_from(graph: Graph, source: int, cap: int | None = None) -> dict[int, int]:
    """Number of (all, not only shortest) paths from ``source`` to each reachable node.

    Requires the reachable part of the graph to be acyclic.
    """
    if not graph.directed:
        raise GraphError("path counting needs a directed acyclic graph")
    reach = bfs_hops(graph, source)
    preds = {v: [u for u in graph._in[v] if u in reach] for v in reach}
    try:
        order = list(TopologicalSorter(preds).static_order())
    except CycleError as exc:
        raise NotADag(exc.args[1]) from None
    count = {}
    for v in order:
        if v == source:
            count[v] = 1
            continue
        total = sum(count[u] for u in preds[v])
        count[v] = min(total, cap) if cap is not None else total
    return count


def is_unique_alpha_approx(graph: Graph, path: Path, alpha, budget: int = 200_000) -> bool:
    """True iff ``path`` is the only s->t path of weight <= alpha * dist(s, t).

    Exhaustive DFS over simple paths, pruned by the exact distance-to-target
    bound.  Raises :class:`BudgetExhausted` after ``budget`` node expansions.
    """
    alpha = as_fraction(alpha)
    s, t = path.source, path.target
    if s == t:
        return path.hops == 0
    to_t = dijkstra(graph, t, reverse=True)
    if s not in to_t:
        raise GraphError(f"{t} unreachable from {s}")
    limit_num, limit_den = alpha.numerator * to_t[s], alpha.denominator
    if path.weight * limit_den > limit_num:
        return False
    found = 0
    expansions = 0
    on_stack = {s}
    stack: list[tuple[int, int, Iterator]] = [(s, 0, iter(graph._out[s].items()))]
    while stack:
        u, w_u, it = stack[-1]
        advanced = False
        for v, w in it:
            if v in on_stack or v not in to_t:
                continue
            nw = w_u + w
            if (nw + to_t[v]) * limit_den > limit_num:
                continue
            if v == t:
                found += 1
                if found > 1:
                    return False
                continue
            expansions += 1
            if expansions > budget:
                raise BudgetExhausted(f"more than {budget} expansions enumerating {s}->{t}")
            on_stack.add(v)
            stack.append((v, nw, iter(graph._out[v].items())))
            advanced = True
            break
        if not advanced:
            stack.pop()
            on_stack.discard(u)
    # a t-terminal path of weight within budget exists (``path`` itself)
    return found == 1


def hop_bounded_distance(graph: Graph, source: int, target: int, max_hops: int):
    """Minimum weight over paths with at most ``max_hops`` edges."""
    if max_hops < 0:
        raise GraphError("max_hops must be >= 0")
    graph.check_node(source)
    graph.check_node(target)
    best = {source: 0}
    frontier = {source: 0}
    for _ in range(max_hops):
        nxt: dict[int, int] = {}
        for u, d in frontier.items():
            for v, w in graph._out[u].items():
                nd = d + w
                if nd < best.get(v, nd + 1) and nd < nxt.get(v, nd + 1):
                    nxt[v] = nd
        for v, d in nxt.items():
            best[v] = d
        frontier = nxt
        if not frontier:
            break
    return best.get(target, UNREACHABLE)


def hop_profile(graph: Graph, source: int, max_hops: int, reverse: bool = False) -> dict[int, list[tuple[int, int]]]:
    """Pareto frontier of (hops, weight) labels from ``source`` (or into it).

    For every reached node the list holds strictly improving labels in
    increasing hop order: each entry is the least weight achievable with at
    most that many hops.
    """
    adj = graph._in if reverse else graph._out
    labels: dict[int, list[tuple[int, int]]] = {source: [(0, 0)]}
    frontier = {source: 0}
    for h in range(1, max_hops + 1):
        nxt: dict[int, int] = {}
        for u, d in frontier.items():
            for v, w in adj[u].items():
                nd = d + w
                if nd < nxt.get(v, nd + 1):
                    nxt[v] = nd
        frontier = {}
        for v, d in nxt.items():
            lab = labels.get(v)
            if lab is None:
                labels[v] = [(h, d)]
                frontier[v] = d
            elif d < lab[-1][1]:
                lab.append((h, d))
                frontier[v] = d
        if not frontier:
            break
    return labels


def alpha_hopdist(graph: Graph, source: int, target: int, alpha, dist: int | None = None):
    """Fewest edges on a source->target path of weight <= alpha * dist(source, target).

    ``alpha=None`` means unbounded stretch (plain reachability hops).  ``dist``
    may be supplied when the reference distance comes from another graph.
    """
    graph.check_node(source)
    graph.check_node(target)
    if alpha is None:
        return bfs_hops(graph, source).get(target, UNREACHABLE)
    alpha = as_fraction(alpha)
    to_t = dijkstra(graph, target, reverse=True)
    if source not in to_t:
        return UNREACHABLE
    if dist is None:
        dist = to_t[source]
    num, den = alpha.numerator * dist, alpha.denominator
    if source == target:
        return 0
    frontier = {source: 0}
    best: dict[int, int] = {source: 0}
    for h in range(1, graph.node_count):
        nxt: dict[int, int] = {}
        for u, d in frontier.items():
            for v, w in graph._out[u].items():
                if v not in to_t:
                    continue
                nd = d + w
                if (nd + to_t[v]) * den > num:
                    continue
                if nd < nxt.get(v, nd + 1):
                    nxt[v] = nd
        if target in nxt:
            return h
        frontier = {v: d for v, d in nxt.items() if d < best.get(v, d + 1)}
        best.update(frontier)
        if not frontier:
            break
    return UNREACHABLE


def min_hops_shortest_from(graph: Graph, source: int) -> dict[int, tuple[int, int]]:
    """For each reachable node, (distance, fewest hops among shortest paths)."""
    best = {source: (0, 0)}
    done: set[int] = set()
    heap = [(0, 0, source)]
    while heap:
        d, h, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in graph._out[u].items():
            cand = (d + w, h + 1)
            if v not in best or cand < best[v]:
                best[v] = cand
                heapq.heappush(heap, (cand[0], cand[1], v))
    return best


def path_intersection(paths: Iterable[Path]) -> set[int]:
    paths = list(paths)
    if not paths:
        raise GraphError("need at least one path")
    common = set(paths[0].nodes)
    for p in paths[1:]:
        common &= set(p.nodes)
    return common


def count_branching_events(graph: Graph) -> int:
    if not graph.directed:
        raise GraphError("branching events are defined for directed graphs")
    return sum(k * (k - 1) // 2 for k in (graph.outdeg(v) for v in range(graph.node_count)))


def topological_order(graph: Graph) -> list[int]:
    """Deterministic Kahn order (smallest available id first); raises NotADag."""
    if not graph.directed:
        raise GraphError("topological order needs a directed graph")
    indeg = [graph.indeg(v) for v in range(graph.node_count)]
    heap = [v for v in range(graph.node_count) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in graph._out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) < graph.node_count:
        raise NotADag(find_cycle(graph, {v for v in range(graph.node_count) if indeg[v] > 0}))
    return order


def find_cycle(graph: Graph, within: set[int]) -> list[int]:
    # every node left after peeling has an in-neighbour left; walk backwards
    start = min(within)
    seen: dict[int, int] = {}
    walk = []
    v = start
    while v not in seen:
        seen[v] = len(walk)
        walk.append(v)
        v = min(u for u in graph._in[v] if u in within)
    cycle = walk[seen[v]:]
    cycle.reverse()
    return cycle + [cycle[0]]


# ---------------------------------------------------------------- path systems


@dataclass(frozen=True)
class PathSystem:
    """Demand pairs with one chosen shortest path each."""

    graph: Graph
    pairs: tuple[tuple[int, int], ...]
    paths: tuple[Path, ...]
    all_unique: bool = False
    edge_disjoint: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.pairs) != len(self.paths):
            raise GraphError("pairs and paths differ in length")
        for (s, t), p in zip(self.pairs, self.paths):
            if (p.source, p.target) != (s, t):
                raise GraphError(f"path {p.nodes} does not join {s}->{t}")

    def __len__(self) -> int:
        return len(self.paths)

    def union_graph(self) -> Graph:
        keys = []
        for p in self.paths:
            keys.extend(p.edge_pairs())
        return self.graph.subgraph(keys)

    def total_length(self) -> int:
        return sum(p.hops for p in self.paths)

    def check_shortest(self) -> None:
        for p in self.paths:
            d = shortest_distance(self.graph, p.source, p.target)
            if d != p.weight:
                raise GraphError(f"path {p.nodes} has weight {p.weight}, distance is {d}")

    def pairwise_edge_disjoint(self) -> bool:
        seen: set[tuple[int, int]] = set()
        for p in self.paths:
            es = set(p.edge_pairs())
            if es & seen:
                return False
            seen |= es
        return True


def tiebroken_system(graph: Graph, demands: Iterable[tuple[int, int]], check_unique: bool = True) -> PathSystem:
    """Tiebroken shortest path for every demand; raises on unreachable demands."""
    pairs = []
    paths = []
    cache: dict[int, dict[int, int]] = {}
    for s, t in demands:
        graph.check_node(s)
        graph.check_node(t)
        to_t = cache.get(t)
        if to_t is None:
            to_t = cache[t] = dijkstra(graph, t, reverse=True)
        if s not in to_t:
            raise GraphError(f"demand ({s}, {t}) is unreachable")
        pairs.append((s, t))
        paths.append(_greedy_lexmin(graph, s, t, to_t))
    unique = check_unique and all(is_unique_shortest(graph, p) for p in paths)
    system = PathSystem(graph, tuple(pairs), tuple(paths), all_unique=unique)
    return PathSystem(graph, system.pairs, system.paths, unique, system.pairwise_edge_disjoint())
