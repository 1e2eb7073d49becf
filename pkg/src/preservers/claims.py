"""Named structural checks on generated lower-bound instances.

Each check returns a :class:`ClaimResult` carrying a pass flag, measured
numbers and, on failure, a small witness (a path index, subset or edge).
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Callable

from .graph import (
    Graph,
    GraphError,
    count_paths_from,
    count_shortest_paths,
    count_unit_shortest_paths,
    is_unique_alpha_approx,
    shortest_distance,
)
from .lbgen import Family, LowerBoundInstance
from .preserver import check_preserved, minimal_preserver


@dataclass
class ClaimResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    witness: object = None

    def as_dict(self) -> dict:
        return {"claim": self.name, "passed": self.passed, "details": self.details, "witness": self.witness}


@dataclass(frozen=True)
class Claim:
    name: str
    families: tuple[Family, ...]
    summary: str
    check: Callable[..., ClaimResult]


# ---------------------------------------------------------------- point/line preserver family


def _alpha(instance: LowerBoundInstance, alpha):
    return alpha if alpha is not None else instance.params.get("alpha", 1)


def unique_approx_paths(instance: LowerBoundInstance, alpha=None, **_) -> ClaimResult:
    """Every critical path is the only path within the stretch budget between its endpoints."""
    a = _alpha(instance, alpha)
    for i, p in enumerate(instance.critical_paths):
        if not is_unique_alpha_approx(instance.graph, p, a):
            return ClaimResult("unique-approx-paths", False, {"alpha": a}, {"path": i, "nodes": list(p.nodes)})
    return ClaimResult("unique-approx-paths", True, {"alpha": a, "paths": len(instance.critical_paths)})


def every_edge_needed(instance: LowerBoundInstance, alpha=None, **_) -> ClaimResult:
    """The minimal stretch-alpha preserver keeps every edge, and dropping any edge breaks a demand."""
    a = _alpha(instance, alpha)
    g = instance.graph
    demands = [d for d in instance.demands() if d[0] != d[1]]
    k, l = instance.params["k"], instance.params["l"]
    expected = k * k * l * l - k * l * l
    h = minimal_preserver(g, demands, alpha=a)
    details = {"alpha": a, "edges": g.num_edges(), "preserver_edges": h.num_edges(), "expected": expected}
    if h.num_edges() != expected or g.num_edges() != expected:
        return ClaimResult("every-edge-needed", False, details)
    for u, v, _ in g.edges:
        smaller = Graph(g.node_count, [e for e in g.edges if (e[0], e[1]) != (u, v)])
        if check_preserved(g, smaller, demands, a) is None:
            return ClaimResult("every-edge-needed", False, details, {"edge": [u, v]})
    return ClaimResult("every-edge-needed", True, details)


# ---------------------------------------------------------------- layered approximate hopset family


def layered_sizes(instance: LowerBoundInstance, **_) -> ClaimResult:
    """Node, edge and path counts of the layered approximate-hopset family."""
    n = instance.params["n"]
    c = instance.params.get("c", 1)
    sqrt_n = instance.params["sqrt_n"]
    kept = instance.params.get("kept_layers") or list(range(1, sqrt_n // 2 + 1))
    v = instance.graph.node_count
    m = instance.graph.num_edges()
    p = len(instance.critical_paths)
    hops = sorted({q.hops for q in instance.critical_paths})
    details = {"nodes": v, "edges": m, "paths": p, "path_hops": hops, "n": n, "c": c, "kept_layers": len(kept)}
    ok = v == len(kept) * 2 * sqrt_n and v * c <= n and m <= 2 * v and 4 * c * p >= n and p <= n
    ok = ok and hops == [len(kept) - 1]
    return ClaimResult("layered-sizes", ok, details)


def one_node_per_layer(instance: LowerBoundInstance, **_) -> ClaimResult:
    layer_of = instance.layer_of
    layers = sorted({x for x in layer_of if x is not None})
    for i, p in enumerate(instance.critical_paths):
        if sorted(layer_of[v] for v in p.nodes) != layers:
            return ClaimResult("one-node-per-layer", False, {"layers": len(layers)}, {"path": i})
    return ClaimResult("one-node-per-layer", True, {"layers": len(layers), "paths": len(instance.critical_paths)})


def intersection_bound(instance: LowerBoundInstance, exhaustive_k: int = 3, sampled_k: int = 8, samples: int = 1000, seed: int = 0, **_) -> ClaimResult:
    """Any k distinct critical paths share at most 2 sqrt(n) / (c k) nodes."""
    n = instance.params["n"]
    c = instance.params.get("c", 1)
    paths = instance.critical_paths
    node_sets = [frozenset(p.nodes) for p in paths]
    worst = 0.0
    checked = 0

    def check(subset) -> bool:
        nonlocal worst, checked
        k = len(subset)
        common = frozenset.intersection(*(node_sets[i] for i in subset))
        checked += 1
        # |common| <= 2 sqrt(n) / (c k)  <=>  (|common| c k)^2 <= 4 n
        worst = max(worst, len(common) * c * k / (2 * math.sqrt(n)))
        return (len(common) * c * k) ** 2 <= 4 * n

    for k in range(1, min(exhaustive_k, len(paths)) + 1):
        for subset in itertools.combinations(range(len(paths)), k):
            if not check(subset):
                return ClaimResult("intersection-bound", False, {"checked": checked}, {"paths": list(subset)})
    rng = random.Random(seed)
    for k in range(exhaustive_k + 1, min(sampled_k, len(paths)) + 1):
        for _ in range(samples):
            subset = tuple(sorted(rng.sample(range(len(paths)), k)))
            if not check(subset):
                return ClaimResult("intersection-bound", False, {"checked": checked}, {"paths": list(subset)})
    return ClaimResult("intersection-bound", True, {"checked": checked, "max_ratio_to_bound": worst})


# ---------------------------------------------------------------- shortcut and unweighted hopset families


def shortcut_sizes(instance: LowerBoundInstance, **_) -> ClaimResult:
    r, c = instance.params["r"], instance.params["c"]
    nodes = (2 * c * r + 1) * (4 * c * r) ** 2 * (4 * c * r * r)
    paths = (2 * c * r) ** 2 * (2 * c * r * r) * r * r
    g = instance.graph
    details = {"nodes": g.node_count, "expected_nodes": nodes, "edges": g.num_edges(), "paths": len(instance.critical_paths), "expected_paths": paths}
    ok = g.node_count == nodes and len(instance.critical_paths) == paths and g.num_edges() <= 2 * nodes
    return ClaimResult("shortcut-sizes", ok, details)


def unique_reachability_paths(instance: LowerBoundInstance, **_) -> ClaimResult:
    """Each critical path is the only path of any kind between its endpoints (path-count DP)."""
    by_source: dict[int, list[int]] = {}
    for i, p in enumerate(instance.critical_paths):
        by_source.setdefault(p.source, []).append(i)
    for s, ids in by_source.items():
        counts = count_paths_from(instance.graph, s, cap=2)
        for i in ids:
            t = instance.critical_paths[i].target
            if counts.get(t) != 1:
                return ClaimResult("unique-paths", False, {}, {"path": i, "count": counts.get(t, 0)})
    return ClaimResult("unique-paths", True, {"paths": len(instance.critical_paths), "sources": len(by_source)})


def unique_shortest_paths(instance: LowerBoundInstance, **_) -> ClaimResult:
    """Each critical path is the unique shortest path between its endpoints."""
    g = instance.graph
    counter = count_unit_shortest_paths if g.is_unit_weighted() else count_shortest_paths
    for i, p in enumerate(instance.critical_paths):
        count = counter(g, p.source, p.target, cap=2)
        if count != 1:
            return ClaimResult("unique-shortest-paths", False, {}, {"path": i, "count": count})
        if shortest_distance(g, p.source, p.target) != p.weight:
            return ClaimResult("unique-shortest-paths", False, {}, {"path": i, "reason": "not shortest"})
    return ClaimResult("unique-shortest-paths", True, {"paths": len(instance.critical_paths)})


def hopset_sizes(instance: LowerBoundInstance, **_) -> ClaimResult:
    r, c = instance.params["r"], instance.params["c"]
    important = (2 * c * r + 1) * (4 * c * r) * (3 * c * r * r)
    pairs = sum(1 for d1 in range(1, r + 1) for d2 in range(1, r + 1) if r / 2 < d2 < d1)
    paths = (c * r) * (c * r * r) * pairs
    g = instance.graph
    details = {
        "important_nodes": instance.params["important_nodes"],
        "expected_important": important,
        "nodes": g.node_count,
        "edges": g.num_edges(),
        "paths": len(instance.critical_paths),
        "expected_paths": paths,
    }
    ok = instance.params["important_nodes"] == important and len(instance.critical_paths) == paths
    ok = ok and g.node_count <= 3 * important and g.num_edges() <= 5 * important
    return ClaimResult("hopset-sizes", ok, details)


def subpath_counts(instance: LowerBoundInstance, samples: int = 1000, seed: int = 0) -> dict[int, list[int]]:
    """For each length g in 1..2r, how many critical paths contain each sampled critical subpath."""
    r = instance.params["r"]
    paths = instance.critical_paths
    through: dict[int, set[int]] = {}
    for i, p in enumerate(paths):
        for v in p.nodes:
            through.setdefault(v, set()).add(i)
    position = [{v: j for j, v in enumerate(p.nodes)} for p in paths]
    undirected = not instance.graph.directed
    rng = random.Random(seed)
    out: dict[int, list[int]] = {}
    for g in range(1, 2 * r + 1):
        slots = [(i, a) for i, p in enumerate(paths) for a in range(len(p.nodes) - g)]
        if not slots:
            continue
        if len(slots) > samples:
            slots = rng.sample(slots, samples)
        counts = []
        for i, a in slots:
            sigma = paths[i].nodes[a : a + g + 1]
            cand = set.intersection(*(through[v] for v in sigma))
            total = 0
            for j in cand:
                pos = position[j]
                idx = [pos[v] for v in sigma]
                forward = all(idx[t + 1] == idx[t] + 1 for t in range(g))
                backward = undirected and all(idx[t + 1] == idx[t] - 1 for t in range(g))
                if forward or backward:
                    total += 1
            counts.append(total)
        out[g] = counts
    return out


def subpath_sharing(instance: LowerBoundInstance, constant: float | None = None, samples: int = 1000, seed: int = 0, **_) -> ClaimResult:
    """A critical subpath of length g lies on at most C (1 + (r/g)^2) critical paths.

    With ``constant=None`` the check fits C as the largest observed ratio;
    otherwise it verifies the frozen C.
    """
    r = instance.params["r"]
    counts = subpath_counts(instance, samples, seed)
    per_length = {}
    worst = 0.0
    witness = None
    window_ok = True
    for g, cs in counts.items():
        shape = 1 + (r / g) ** 2
        top = max(cs)
        ratio = top / shape
        # explicit count from the parameter-window argument: |d - d'| <= 16 r / g in both coordinates
        window = min(r, 2 * (16 * r // g) + 1) ** 2
        window_ok = window_ok and top <= window
        per_length[g] = {"samples": len(cs), "max_paths": top, "ratio": ratio, "window_count": window}
        if ratio > worst:
            worst, witness = ratio, {"length": g, "paths": top}
    details = {
        "per_length": per_length,
        "max_ratio": worst,
        "constant": constant if constant is not None else worst,
        "within_parameter_window": window_ok,
    }
    passed = constant is None or worst <= constant
    return ClaimResult("subpath-sharing", passed, details, None if passed else witness)


CLAIMS: dict[str, Claim] = {}


def _register(name: str, families, summary: str, check) -> None:
    CLAIMS[name] = Claim(name, tuple(families), summary, check)


_register("pointline-unique-approx-paths", [Family.POINTLINE_PRESERVER], "each line path is the unique alpha-approximate path", unique_approx_paths)
_register("pointline-every-edge-needed", [Family.POINTLINE_PRESERVER], "every alpha-approximate preserver keeps all edges", every_edge_needed)
_register("approx-hopset-sizes", [Family.APPROX_HOPSET], "node, edge, path counts and path lengths", layered_sizes)
_register("approx-hopset-one-node-per-layer", [Family.APPROX_HOPSET], "each critical path meets every layer once", one_node_per_layer)
_register("approx-hopset-unique-approx-paths", [Family.APPROX_HOPSET], "each critical path is the unique alpha-approximate path", unique_approx_paths)
_register("approx-hopset-intersection-bound", [Family.APPROX_HOPSET], "k critical paths share at most 2 sqrt(n)/(c k) nodes", intersection_bound)
_register("shortcut-sizes", [Family.SHORTCUT_LAYERED], "node and critical path counts", shortcut_sizes)
_register("shortcut-unique-paths", [Family.SHORTCUT_LAYERED], "each critical path is the only path between its endpoints", unique_reachability_paths)
_register("shortcut-subpath-sharing", [Family.SHORTCUT_LAYERED], "a subpath of length g lies on O(1 + (r/g)^2) critical paths", subpath_sharing)
_register("hopset-sizes", [Family.UNWEIGHTED_HOPSET], "important node and critical path counts", hopset_sizes)
_register("hopset-unique-shortest-paths", [Family.UNWEIGHTED_HOPSET], "each critical path is the unique shortest path", unique_shortest_paths)
_register("hopset-subpath-sharing", [Family.UNWEIGHTED_HOPSET], "a shortest subpath of length g lies on O(1 + (r/g)^2) critical paths", subpath_sharing)


def verify_claim(name: str, instance: LowerBoundInstance, **options) -> ClaimResult:
    if name not in CLAIMS:
        raise GraphError(f"unknown claim {name!r}; known: {', '.join(sorted(CLAIMS))}")
    claim = CLAIMS[name]
    if instance.family not in claim.families:
        raise GraphError(f"claim {name} applies to {[f.value for f in claim.families]}, not {instance.family.value}")
    result = claim.check(instance, **options)
    result.name = name
    return result
