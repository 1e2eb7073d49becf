"""Seeded random instance factories used by tests, acceptance runs and the CLI."""
from __future__ import annotations

import random

from .graph import Graph


def random_dag(rng: random.Random, n: int, edge_prob: float, max_weight: int, min_weight: int = 0) -> Graph:
    """DAG under a hidden random topological order (so ids are not already sorted)."""
    order = list(range(n))
    rng.shuffle(order)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.append((order[i], order[j], rng.randint(min_weight, max_weight)))
    return Graph(n, edges, directed=True)


def random_digraph(rng: random.Random, n: int, edge_prob: float, max_weight: int, min_weight: int = 1) -> Graph:
    edges = []
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < edge_prob:
                edges.append((u, v, rng.randint(min_weight, max_weight)))
    return Graph(n, edges, directed=True)


def reachable_demands(rng: random.Random, graph: Graph, count: int, reach: dict[int, set[int]] | None = None) -> list[tuple[int, int]]:
    """Up to ``count`` distinct demand pairs (s, t), s != t, with t reachable from s."""
    from .graph import bfs_hops

    if reach is None:
        reach = {s: set(bfs_hops(graph, s)) - {s} for s in range(graph.node_count)}
    candidates = sorted((s, t) for s, ts in reach.items() for t in ts)
    if len(candidates) <= count:
        return candidates
    return sorted(rng.sample(candidates, count))
