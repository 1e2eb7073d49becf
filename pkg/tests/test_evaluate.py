import math
import random
from fractions import Fraction

import pytest

from preservers.claims import CLAIMS, verify_claim
from preservers.evaluate import (
    AugmentationKind,
    AugmentationSet,
    e_delta,
    empty_augmentation,
    folklore_hopset,
    greedy_by_drop,
    instance_e_delta,
    max_drop_audit,
    measure_hopbound,
    path_hopdists,
    potential,
)
from preservers.graph import Graph, GraphError, bfs_hops, dijkstra
from preservers.instances import random_digraph
from preservers.lbgen import gen_approx_hopset, gen_pointline, gen_shortcut, gen_unweighted_hopset


def path_graph(n):
    return Graph(n, [(i, i + 1, 1) for i in range(n - 1)])


def test_folklore_basics():
    g = path_graph(8)
    assert folklore_hopset(g, 0, 1).edges == []
    full = folklore_hopset(g, 8, 1)
    assert len(full) == 28
    full.validate(g)
    assert measure_hopbound(g, full, 1)[0] <= 2
    with pytest.raises(GraphError):
        folklore_hopset(g, 9, 1)


def test_folklore_deterministic_and_exact():
    g = random_digraph(random.Random(3), 60, 0.05, 100)
    a, b = folklore_hopset(g, 20, 7), folklore_hopset(g, 20, 7)
    assert a.edges == b.edges
    a.validate(g)
    bad = AugmentationSet([(u, v, w + 1) for u, v, w in a.edges[:1]], AugmentationKind.HOPSET)
    with pytest.raises(GraphError):
        bad.validate(g)


def test_measure_hopbound_path():
    g = path_graph(6)
    assert measure_hopbound(g, empty_augmentation(), 1)[0] == 5
    full = AugmentationSet([(i, j, j - i) for i in range(6) for j in range(i + 1, 6)], AugmentationKind.HOPSET)
    assert measure_hopbound(g, full, 1)[0] == 1
    assert measure_hopbound(g, empty_augmentation(), None, pairs=[(0, 3)])[1] == {(0, 3): 3}


def test_measure_hopbound_critical_paths():
    inst = gen_approx_hopset(8, 2)
    worst, table = measure_hopbound(inst.graph, empty_augmentation(), 2, pairs=inst.demands())
    assert worst == 3 and set(table.values()) == {3}


def test_e_delta_cases():
    inst = gen_shortcut(2, 1)
    assert e_delta(inst.graph, 0, True, inst.layer_of).edges == []
    with pytest.raises(GraphError):
        e_delta(inst.graph, 2, True)
    dag = gen_approx_hopset(8, 1)
    closure = e_delta(dag.graph, 10, True, dag.layer_of)
    expected = sum(len(dijkstra(dag.graph, u)) - 1 for u in range(dag.graph.node_count))
    assert len(closure) == expected
    unlayered = e_delta(path_graph(5), 2, False)
    assert sorted((u, v) for u, v, _ in unlayered.edges) == [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4)]


def test_shortcut_potential_with_delta_two():
    inst = gen_shortcut(2, 1)
    base = instance_e_delta(inst, 2).applied(inst.graph)
    hops = [bfs_hops(base, p.source)[p.target] for p in inst.critical_paths]
    assert set(hops) == {math.ceil(2 * 1 * 2 / 2)}
    rep = potential(inst, 2)
    assert rep.phi == 2 * len(inst.critical_paths)
    assert potential(inst, 10).phi == len(inst.critical_paths)


def test_potential_single_edge_drop_bound():
    inst = gen_shortcut(2, 1)
    delta = 1
    p = inst.critical_paths[0]
    u, v = p.nodes[0], p.nodes[3]
    g = 3
    through = sum(1 for q in inst.critical_paths if u in q.nodes and v in q.nodes)
    before = potential(inst, delta).phi
    after = potential(inst, delta, AugmentationSet([(u, v, 3)], AugmentationKind.SHORTCUT)).phi
    assert 0 <= before - after <= through * math.ceil(g / delta)


def test_audit_endpoint_edge_and_zero_within_delta():
    inst = gen_shortcut(2, 1)
    audit = max_drop_audit(inst, 2)
    assert audit.exhaustive and audit.zero_drop_within_delta and audit.never_increases
    rows = {(r.u, r.v): r for r in audit.rows}
    assert all(r.drop == 0 for r in audit.rows if r.gap <= 2)
    one = max_drop_audit(inst, 1, cross_check=5)
    p = inst.critical_paths[0]
    row = {(r.u, r.v): r for r in one.rows}[(p.source, p.target)]
    assert row.drop == p.hops - 1 and row.paths_through == 1
    assert rows


def test_audit_small_approx_instance():
    inst = gen_approx_hopset(4, 2)
    audit = max_drop_audit(inst, 1)
    assert audit.exhaustive and audit.zero_drop_within_delta
    assert audit.max_ratio <= 1
    bigger = max_drop_audit(gen_approx_hopset(8, 2), 1)
    assert bigger.max_ratio <= 1 and bigger.never_increases


def test_greedy_by_drop_trace():
    inst = gen_shortcut(2, 1)
    aug, trace = greedy_by_drop(inst, 1, 4)
    assert len(aug) <= 4
    assert all(a >= b for a, b in zip(trace, trace[1:]))
    assert trace[-1] == potential(inst, 1, aug).phi


def test_potential_unweighted_family():
    inst = gen_unweighted_hopset(4, 1)
    rep = potential(inst, 0)
    assert rep.phi == sum(p.hops for p in inst.critical_paths)
    assert rep.worst_residual * len(rep.per_path) >= rep.phi


def test_potential_requires_paths():
    with pytest.raises(GraphError):
        potential(gen_unweighted_hopset(2, 1), 1)


def test_claims_registry_and_family_check():
    assert "shortcut-unique-paths" in CLAIMS
    inst = gen_shortcut(2, 1)
    assert verify_claim("shortcut-unique-paths", inst).passed
    with pytest.raises(GraphError):
        verify_claim("hopset-sizes", inst)
    with pytest.raises(GraphError):
        verify_claim("no-such-claim", inst)


@pytest.mark.parametrize("alpha", [1, 2, Fraction(3, 2)])
def test_pointline_claims(alpha):
    inst = gen_pointline(3, 2, alpha)
    assert verify_claim("pointline-unique-approx-paths", inst).passed
    assert verify_claim("pointline-every-edge-needed", inst).passed


def test_path_hopdists_match_lengths_without_augmentation():
    inst = gen_approx_hopset(8, 2)
    assert path_hopdists(inst, inst.graph, 2) == [p.hops for p in inst.critical_paths]
