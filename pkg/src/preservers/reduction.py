"""Directed -> DAG -> undirected reductions and APSP on DAGs via reweighting."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .graph import (
    UNREACHABLE,
    Graph,
    GraphError,
    Path,
    PathSystem,
    dijkstra,
    is_unique_shortest,
    tiebroken_system,
    topological_order,
)


class InvariantError(AssertionError):
    """An internal invariant failed; indicates an upstream consistency bug."""


@dataclass(frozen=True)
class InducedDagResult:
    dag: Graph
    paths: PathSystem
    topo_order: tuple[int, ...]  # dag node ids, earliest first
    back_map: tuple[int, ...]  # dag node id -> host node id
    source_index: tuple[int, ...]  # for each induced path, index in the host system


@dataclass(frozen=True)
class ReweightedUndirected:
    graph: Graph
    big_w: int
    topo_order: tuple[int, ...]
    dag: Graph


def induced_dag(system: PathSystem, pivot: Path) -> InducedDagResult:
    """Project every other path onto the pivot's node set.

    DAG node ``i`` is ``pivot.nodes[i]``.  An induced path keeps the pivot
    nodes of a path in that path's order; consecutive kept nodes are joined
    by an edge weighted by their host distance.  Only paths meeting the pivot
    at two or more nodes contribute edges.
    """
    if not system.all_unique:
        raise GraphError("induced DAG needs a system of unique shortest paths")
    if not system.edge_disjoint:
        raise GraphError("induced DAG needs pairwise edge-disjoint paths")
    if pivot not in system.paths:
        raise GraphError("pivot is not a path of the system")
    host = system.graph
    pos = {v: i for i, v in enumerate(pivot.nodes)}
    k = len(pivot.nodes)
    dist_cache: dict[int, dict[int, int]] = {}

    def host_dist(a: int, b: int) -> int:
        if a not in dist_cache:
            dist_cache[a] = dijkstra(host, a)
        return dist_cache[a][b]

    edges: dict[tuple[int, int], int] = {}
    projected: list[list[int]] = []
    source_index = []
    for idx, p in enumerate(system.paths):
        if p is pivot or p == pivot:
            continue
        kept = [pos[v] for v in p.nodes if v in pos]
        if len(kept) < 2:
            continue
        for a, b in zip(kept, kept[1:]):
            if not a > b:
                raise InvariantError(
                    f"path {p.nodes} meets pivot nodes {pivot.nodes[a]} and {pivot.nodes[b]} in pivot order"
                )
            w = host_dist(pivot.nodes[a], pivot.nodes[b])
            if edges.setdefault((a, b), w) != w:
                raise InvariantError("conflicting induced edge weights")
        projected.append(kept)
        source_index.append(idx)
    dag = Graph(k, [(a, b, w) for (a, b), w in sorted(edges.items())], directed=True)
    dag_paths = tuple(Path.in_graph(dag, nodes) for nodes in projected)
    sub = PathSystem(
        dag,
        tuple((q.source, q.target) for q in dag_paths),
        dag_paths,
        all_unique=False,
        edge_disjoint=False,
    )
    return InducedDagResult(
        dag=dag,
        paths=PathSystem(dag, sub.pairs, sub.paths, False, sub.pairwise_edge_disjoint()),
        topo_order=tuple(range(k - 1, -1, -1)),
        back_map=tuple(pivot.nodes),
        source_index=tuple(source_index),
    )


def dag_to_undirected(dag: Graph, order: list[int] | None = None) -> ReweightedUndirected:
    """Reweight a DAG so that undirected shortest paths follow the topological order.

    Edge (v_i, v_j) gets weight w + W*(j - i) with W = 1 + total weight.
    """
    if not dag.directed:
        raise GraphError("dag_to_undirected expects a directed graph")
    supplied = order is not None
    if not supplied:
        order = topological_order(dag)
    else:
        order = list(order)
        if sorted(order) != list(range(dag.node_count)):
            raise GraphError("order must be a permutation of the nodes")
    pos = {v: i for i, v in enumerate(order)}
    for u, v, _ in dag.edges:
        if pos[u] >= pos[v]:
            if supplied:
                topological_order(dag)  # raises NotADag with a cycle if there is one
            raise GraphError(f"edge ({u}, {v}) violates the supplied order")
    big_w = 1 + dag.total_weight()
    reweighted = Graph(
        dag.node_count,
        ((u, v, w + big_w * (pos[v] - pos[u])) for u, v, w in dag.edges),
        directed=False,
    )
    return ReweightedUndirected(reweighted, big_w, tuple(order), dag)


def _decode_row(args):
    graph, big_w, pos, source = args
    dist = dijkstra(graph, source)
    i = pos[source]
    row = []
    for v in range(graph.node_count):
        d = dist.get(v)
        j = pos[v]
        if d is None or d >= big_w * (j - i + 1):
            row.append(UNREACHABLE)
        else:
            row.append(d - big_w * (j - i))
    return row


def apsp_dag(dag: Graph, jobs: int = 1) -> list[list]:
    """All-pairs distances of a DAG computed on its undirected reweighting."""
    red = dag_to_undirected(dag)
    pos = {v: i for i, v in enumerate(red.topo_order)}
    tasks = [(red.graph, red.big_w, pos, s) for s in range(dag.node_count)]
    if jobs > 1 and dag.node_count > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_decode_row, tasks, chunksize=8))
    return [_decode_row(t) for t in tasks]


def edge_disjointify(system: PathSystem) -> PathSystem:
    """Keep each path unless it shares an edge with an earlier kept path."""
    used: set[tuple[int, int]] = set()
    pairs, paths = [], []
    undirected = not system.graph.directed
    for pair, p in zip(system.pairs, system.paths):
        es = p.edge_pairs()
        if undirected:
            es = [(min(a, b), max(a, b)) for a, b in es]
        if any(e in used for e in es):
            continue
        used.update(es)
        pairs.append(pair)
        paths.append(p)
    return PathSystem(system.graph, tuple(pairs), tuple(paths), system.all_unique, True, dict(system.meta))


@dataclass
class ReductionReport:
    demands: int
    kept_unique: int
    kept_disjoint: int
    pivot_length: int = 0
    q_count: int = 0
    dag_edges: int = 0
    pivot_incident_edges: int = 0
    big_w: int = 0
    pivot_index: int | None = None
    dropped_nonunique: list = field(default_factory=list)
    dropped_overlap: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def reduce_directed_preserver(graph: Graph, demands) -> ReductionReport:
    """Run the directed -> DAG -> undirected pipeline and report its accounting.

    Returns (|pivot|, |Q|, |E(D)|) plus bookkeeping, where Q is the set of
    kept demands whose path meets the pivot at exactly one node.
    """
    demands = [tuple(d) for d in demands]
    if not demands:
        return ReductionReport(0, 0, 0)
    full = tiebroken_system(graph, demands, check_unique=False)
    keep = [i for i, p in enumerate(full.paths) if is_unique_shortest(graph, p)]
    dropped_nonunique = [full.pairs[i] for i in range(len(full.paths)) if i not in set(keep)]
    unique = PathSystem(
        graph, tuple(full.pairs[i] for i in keep), tuple(full.paths[i] for i in keep), True, False
    )
    disjoint = edge_disjointify(unique)
    kept_pairs = set(disjoint.pairs)
    report = ReductionReport(
        demands=len(demands),
        kept_unique=len(unique),
        kept_disjoint=len(disjoint),
        dropped_nonunique=[list(p) for p in dropped_nonunique],
        dropped_overlap=[list(p) for p in unique.pairs if p not in kept_pairs],
    )
    if not disjoint.paths:
        return report
    pivot_index = max(range(len(disjoint.paths)), key=lambda i: (disjoint.paths[i].hops, -i))
    pivot = disjoint.paths[pivot_index]
    res = induced_dag(disjoint, pivot)
    on_pivot = set(pivot.nodes)
    q = sum(
        1
        for i, p in enumerate(disjoint.paths)
        if i != pivot_index and len(on_pivot.intersection(p.nodes)) == 1
    )
    incident = sum(1 for u, v, _ in graph.edges if u in on_pivot or v in on_pivot)
    red = dag_to_undirected(res.dag, list(res.topo_order))
    report.pivot_length = pivot.hops
    report.q_count = q
    report.dag_edges = res.dag.num_edges()
    report.pivot_incident_edges = incident
    report.big_w = red.big_w
    report.pivot_index = pivot_index
    return report
