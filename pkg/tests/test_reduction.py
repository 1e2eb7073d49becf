import random

import pytest
from hypothesis import given, settings, strategies as st

from preservers.graph import (
    UNREACHABLE,
    Graph,
    GraphError,
    NotADag,
    Path,
    PathSystem,
    dijkstra,
    is_unique_shortest,
    shortest_distance,
    tiebroken_shortest_path,
    tiebroken_system,
)
from preservers.instances import random_dag, random_digraph, reachable_demands
from preservers.reduction import (
    apsp_dag,
    dag_to_undirected,
    edge_disjointify,
    induced_dag,
    reduce_directed_preserver,
)

# v1..v6 -> 0..5; pivot visits v1, v6, v2, v3, v4, v5
V1, V2, V3, V4, V5, V6 = 0, 1, 2, 3, 4, 5
X1, X2, Y, Z, W, A, C = 6, 7, 8, 9, 10, 11, 12


def crossing_instance():
    edges = [
        (V1, V6, 1), (V6, V2, 1), (V2, V3, 1), (V3, V4, 1), (V4, V5, 1),
        (V4, X1, 1), (X1, V2, 1), (V2, X2, 1), (X2, V1, 1),  # v4 -> v2 -> v1
        (V3, Z, 1), (Z, V1, 2),  # v3 -> v1
        (V4, Y, 1), (Y, V3, 1), (V3, W, 1), (W, V6, 1),  # v4 -> v3 -> v6
        (A, V5, 1), (V5, C, 1),  # meets the pivot once
    ]
    g = Graph(13, edges)
    demands = [(V1, V5), (V4, V1), (V3, V1), (V4, V6), (A, C)]
    return g, demands


def test_figure_configuration():
    g, demands = crossing_instance()
    system = tiebroken_system(g, demands)
    assert system.all_unique and system.edge_disjoint
    pivot = system.paths[0]
    assert pivot.nodes == (V1, V6, V2, V3, V4, V5)
    res = induced_dag(system, pivot)
    host_edges = {(res.back_map[a], res.back_map[b]) for a, b, _ in res.dag.edges}
    assert host_edges == {(V4, V2), (V2, V1), (V3, V1), (V4, V3), (V3, V6)}
    for a, b, w in res.dag.edges:
        assert w == shortest_distance(g, res.back_map[a], res.back_map[b])
    pos = {v: i for i, v in enumerate(res.topo_order)}
    assert all(pos[a] < pos[b] for a, b, _ in res.dag.edges)
    for p in res.paths.paths:
        assert is_unique_shortest(res.dag, p)

    report = reduce_directed_preserver(g, demands)
    assert (report.pivot_length, report.q_count, report.dag_edges) == (5, 1, 5)


def test_induced_dag_trivial():
    g = Graph(3, [(0, 1, 1), (1, 2, 1)])
    system = tiebroken_system(g, [(0, 2)])
    res = induced_dag(system, system.paths[0])
    assert res.dag.num_edges() == 0

    # pivot a..b..c, other path visits c then a
    g = Graph(5, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1), (4, 2, 1)])
    system = tiebroken_system(g, [(0, 2), (2, 0)])
    res = induced_dag(system, system.paths[0])
    assert [(res.back_map[a], res.back_map[b], w) for a, b, w in res.dag.edges] == [(2, 0, 2)]


def test_induced_dag_rejects_non_unique():
    g = Graph(4, [(0, 1, 1), (1, 3, 1), (0, 2, 1), (2, 3, 1)])
    system = tiebroken_system(g, [(0, 3)])
    assert not system.all_unique
    with pytest.raises(GraphError):
        induced_dag(system, system.paths[0])


def test_dag_to_undirected_examples():
    red = dag_to_undirected(Graph(2, [(0, 1, 5)]))
    assert red.big_w == 6 and red.graph.weight(0, 1) == 11

    red = dag_to_undirected(Graph(3, [(0, 1, 2), (1, 2, 3)]))
    assert red.big_w == 6
    assert sorted(w for *_, w in red.graph.edges) == [8, 9]
    assert shortest_distance(red.graph, 0, 2) == 17 == 5 + 2 * red.big_w

    # diamond: W = 1 + total weight = 10
    red = dag_to_undirected(Graph(3, [(0, 2, 4), (0, 1, 2), (1, 2, 3)]))
    assert red.big_w == 10
    assert shortest_distance(red.graph, 0, 2) == 24


def test_dag_to_undirected_rejects_cycle():
    with pytest.raises(NotADag) as exc:
        dag_to_undirected(Graph(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)]))
    cyc = exc.value.cycle
    assert cyc[0] == cyc[-1] and len(cyc) == 4


def test_apsp_examples():
    assert apsp_dag(Graph(2)) == [[0, UNREACHABLE], [UNREACHABLE, 0]]
    assert apsp_dag(Graph(2, [(0, 1, 5)])) == [[0, 5], [UNREACHABLE, 0]]
    assert apsp_dag(Graph(2, [(1, 0, 5)])) == [[0, UNREACHABLE], [5, 0]]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 14), st.sampled_from([0.2, 0.5, 0.9]))
def test_apsp_matches_dijkstra(seed, n, prob):
    dag = random_dag(random.Random(seed), n, prob, 20)
    matrix = apsp_dag(dag)
    for s in range(n):
        d = dijkstra(dag, s)
        assert matrix[s] == [d.get(t, UNREACHABLE) for t in range(n)]


def test_apsp_parallel_matches_serial():
    dag = random_dag(random.Random(3), 20, 0.3, 50)
    assert apsp_dag(dag, jobs=2) == apsp_dag(dag)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_reweighting_keeps_unique_paths(seed):
    rng = random.Random(seed)
    dag = random_dag(rng, rng.randint(2, 12), 0.4, 1000, min_weight=1)
    red = dag_to_undirected(dag)
    for s in range(dag.node_count):
        for t in range(dag.node_count):
            p = tiebroken_shortest_path(dag, s, t)
            if s == t or p is UNREACHABLE or not is_unique_shortest(dag, p):
                continue
            q = tiebroken_shortest_path(red.graph, s, t)
            assert q.nodes == p.nodes
            assert is_unique_shortest(red.graph, Path.in_graph(red.graph, p.nodes))


def test_edge_disjointify():
    g = Graph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 9)])
    p = Path.in_graph(g, [0, 1, 2])
    q = Path.in_graph(g, [1, 2, 3])
    same = PathSystem(g, ((0, 2), (0, 2)), (p, p), True)
    assert edge_disjointify(same).paths == (p,)
    overlap = PathSystem(g, ((0, 2), (1, 3)), (p, q), True)
    assert edge_disjointify(overlap).paths == (p,)
    r = Path.in_graph(g, [2, 3])
    disjoint = PathSystem(g, ((0, 2), (2, 3)), (p, r), True)
    out = edge_disjointify(disjoint)
    assert out.paths == disjoint.paths and out.edge_disjoint


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_random_systems_induce_dags(seed):
    rng = random.Random(seed)
    g = random_digraph(rng, 8, 0.35, 10**6)
    demands = reachable_demands(rng, g, 10)
    system = tiebroken_system(g, demands, check_unique=False)
    unique = [(pair, p) for pair, p in zip(system.pairs, system.paths) if is_unique_shortest(g, p)]
    base = PathSystem(g, tuple(x for x, _ in unique), tuple(p for _, p in unique), True)
    out = edge_disjointify(base)
    assert out.pairwise_edge_disjoint()
    for pivot in out.paths:
        res = induced_dag(out, pivot)
        for p in res.paths.paths:
            assert is_unique_shortest(res.dag, p)


def test_reduce_single_demand_and_empty():
    g = Graph(3, [(0, 1, 1), (1, 2, 1)])
    r = reduce_directed_preserver(g, [(0, 2)])
    assert (r.pivot_length, r.q_count, r.dag_edges) == (2, 0, 0)
    r = reduce_directed_preserver(g, [])
    assert (r.pivot_length, r.q_count, r.dag_edges) == (0, 0, 0)


def test_reduce_random_incidence_bound():
    rng = random.Random(11)
    for _ in range(10):
        g = random_digraph(rng, 30, 0.12, 10**6)
        r = reduce_directed_preserver(g, reachable_demands(rng, g, 10))
        assert r.dag_edges <= r.pivot_incident_edges
