"""Measurement harness for hopsets and shortcut sets.

Covers sampled hopsets, the Delta-augmentation E_Delta, hopbound measurement,
the potential Phi (sum of critical-path hop distances) and an audit of how
much a single added edge can lower Phi.
"""
from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .graph import (
    UNREACHABLE,
    Graph,
    GraphError,
    alpha_hopdist,
    as_fraction,
    bfs_hops,
    dijkstra,
    hop_profile,
    min_hops_shortest_from,
)
from .lbgen import Family, LowerBoundInstance


class AugmentationKind(enum.Enum):
    HOPSET = "hopset"
    SHORTCUT = "shortcut"


@dataclass
class AugmentationSet:
    edges: list[tuple[int, int, int]]
    kind: AugmentationKind
    budget: int | None = None

    def __len__(self) -> int:
        return len(self.edges)

    def validate(self, graph: Graph) -> None:
        """Hopset edges must carry exact distances; shortcut edges must lie in the closure."""
        if self.budget is not None and len(self.edges) > self.budget:
            raise GraphError(f"{len(self.edges)} edges exceed the budget {self.budget}")
        cache: dict[int, dict[int, int]] = {}
        for u, v, w in self.edges:
            if u not in cache:
                cache[u] = dijkstra(graph, u)
            d = cache[u].get(v)
            if d is None:
                raise GraphError(f"augmentation edge ({u}, {v}) leaves the transitive closure")
            if self.kind is AugmentationKind.HOPSET and d != w:
                raise GraphError(f"hopset edge ({u}, {v}) has weight {w}, distance is {d}")

    def applied(self, graph: Graph) -> Graph:
        return Graph.merged(graph.node_count, list(graph.edges) + list(self.edges), graph.directed)


def empty_augmentation(kind: AugmentationKind = AugmentationKind.HOPSET) -> AugmentationSet:
    return AugmentationSet([], kind)


def folklore_hopset(graph: Graph, sample_size: int, seed: int) -> AugmentationSet:
    """Sample nodes uniformly and connect every reachable ordered sampled pair by its distance."""
    n = graph.node_count
    if sample_size < 0 or sample_size > n:
        raise GraphError(f"sample size {sample_size} outside [0, {n}]")
    rng = random.Random(seed)
    sample = sorted(rng.sample(range(n), sample_size))
    edges = []
    for u in sample:
        dist = dijkstra(graph, u)
        for v in sample:
            if v != u and v in dist:
                edges.append((u, v, dist[v]))
    return AugmentationSet(edges, AugmentationKind.HOPSET)


def folklore_sample_size(n: int) -> int:
    return math.ceil(math.sqrt(n * math.log(n))) if n > 1 else n


def e_delta(graph: Graph, delta: int, layered: bool, layer_of=None) -> AugmentationSet:
    """Connect every reachable pair at most ``delta`` layers apart (or ``delta`` hops when unlayered)."""
    if delta < 0:
        raise GraphError("delta must be nonnegative")
    if layered and layer_of is None:
        raise GraphError("layered mode needs a layer map")
    edges = []
    if delta == 0:
        return AugmentationSet(edges, AugmentationKind.HOPSET)
    for u in range(graph.node_count):
        if layered:
            lu = layer_of[u]
            if lu is None:
                continue
            dist = dijkstra(graph, u)
            for v, d in sorted(dist.items()):
                lv = layer_of[v]
                if v != u and lv is not None and abs(lv - lu) <= delta:
                    edges.append((u, v, d))
        else:
            near = bfs_hops(graph, u, cutoff=delta)
            dist = dijkstra(graph, u)
            for v in sorted(near):
                if v != u:
                    edges.append((u, v, dist[v]))
    return AugmentationSet(edges, AugmentationKind.HOPSET)


def instance_e_delta(instance: LowerBoundInstance, delta: int) -> AugmentationSet:
    if instance.family is Family.UNWEIGHTED_HOPSET:
        return e_delta(instance.graph, delta, layered=False)
    return e_delta(instance.graph, delta, layered=True, layer_of=instance.layer_of)


def hop_measure(graph: Graph, source: int, alpha, reference: dict[int, int] | None = None) -> dict[int, int]:
    """Hop distances from ``source`` to every reachable node under the given stretch mode.

    ``alpha=None`` counts plain reachability hops; alpha = 1 counts the fewest
    edges among exact shortest paths; other values use the stretch budget
    against ``reference`` distances (defaults to distances in ``graph``).
    """
    if alpha is None:
        return bfs_hops(graph, source)
    alpha = as_fraction(alpha)
    if alpha == 1 and reference is None:
        return {v: h for v, (_, h) in min_hops_shortest_from(graph, source).items()}
    ref = reference if reference is not None else dijkstra(graph, source)
    out = {}
    for t, d in ref.items():
        h = alpha_hopdist(graph, source, t, alpha, dist=d)
        if h is not UNREACHABLE:
            out[t] = h
    return out


def measure_hopbound(graph: Graph, augmentation: AugmentationSet, alpha, pairs: Iterable[tuple[int, int]] | None = None):
    """Largest hop distance over the given pairs (default: the transitive closure) in G plus H."""
    combined = augmentation.applied(graph)
    table: dict[tuple[int, int], object] = {}
    alpha = None if alpha is None else as_fraction(alpha)
    if pairs is None:
        by_source = {s: None for s in range(graph.node_count)}
    else:
        by_source = {}
        for s, t in pairs:
            by_source.setdefault(s, []).append(t)
    for s, targets in by_source.items():
        ref = dijkstra(graph, s)
        if alpha is None or alpha == 1:
            hops = hop_measure(combined, s, alpha) if alpha is None else {
                v: h for v, (d, h) in min_hops_shortest_from(combined, s).items() if ref.get(v) == d
            }
            wanted = [t for t in ref if t != s] if targets is None else targets
            for t in wanted:
                table[(s, t)] = hops.get(t, UNREACHABLE)
        else:
            wanted = [t for t in ref if t != s] if targets is None else targets
            for t in wanted:
                table[(s, t)] = alpha_hopdist(combined, s, t, alpha, dist=ref[t]) if t in ref else UNREACHABLE
    finite = [h for h in table.values() if h is not UNREACHABLE]
    return (max(finite) if finite else 0), table


# ---------------------------------------------------------------- potential accounting


def instance_alpha(instance: LowerBoundInstance, alpha=None):
    """Stretch mode used by the potential for each family."""
    if instance.family is Family.SHORTCUT_LAYERED:
        return None
    if instance.family is Family.UNWEIGHTED_HOPSET:
        return Fraction(1)
    return as_fraction(alpha if alpha is not None else instance.params.get("alpha", 1))


@dataclass
class PotentialReport:
    phi: int
    phi_empty: int
    per_path: list[int]
    delta: int
    budget_used: int
    worst_path: int
    worst_residual: int
    max_drop: int | None = None

    def as_dict(self) -> dict:
        return {
            "phi": self.phi,
            "phi_empty": self.phi_empty,
            "delta": self.delta,
            "budget_used": self.budget_used,
            "worst_path": self.worst_path,
            "worst_residual": self.worst_residual,
            "max_drop": self.max_drop,
            "paths": len(self.per_path),
        }


def _path_hops(graph: Graph, s: int, t: int, alpha, dist: int) -> int:
    if alpha is None:
        h = bfs_hops(graph, s).get(t, UNREACHABLE)
    else:
        h = alpha_hopdist(graph, s, t, alpha, dist=dist)
    if h is UNREACHABLE:
        raise GraphError(f"critical path endpoint {t} unreachable from {s}")
    return h


def path_hopdists(instance: LowerBoundInstance, base: Graph, alpha) -> list[int]:
    g = instance.graph
    out = []
    for p in instance.critical_paths:
        d = dijkstra(g, p.source).get(p.target) if alpha is not None else 0
        out.append(_path_hops(base, p.source, p.target, alpha, d))
    return out


def potential(instance: LowerBoundInstance, delta: int, augmentation: AugmentationSet | None = None, alpha=None) -> PotentialReport:
    """Sum of critical-path hop distances in G with E_Delta and the augmentation added."""
    if not instance.critical_paths:
        raise GraphError("instance has no critical paths")
    alpha = instance_alpha(instance, alpha)
    augmentation = augmentation or empty_augmentation()
    ed = instance_e_delta(instance, delta)
    base = ed.applied(instance.graph)
    empty = path_hopdists(instance, base, alpha)
    full = path_hopdists(instance, augmentation.applied(base), alpha) if augmentation.edges else list(empty)
    phi = sum(full)
    worst = max(range(len(full)), key=lambda i: (full[i], -i))
    report = PotentialReport(phi, sum(empty), full, delta, len(augmentation), worst, full[worst])
    if report.worst_residual * len(full) < phi:
        raise AssertionError("averaging bound violated")
    return report


# ---------------------------------------------------------------- single-edge drop audit


@dataclass
class AuditRow:
    u: int
    v: int
    gap: int
    drop: int
    paths_through: int
    bound: float
    ratio: float


@dataclass
class AuditReport:
    delta: int
    candidates: int
    exhaustive: bool
    rows: list[AuditRow]
    max_ratio: float
    zero_drop_within_delta: bool
    never_increases: bool
    cross_checked: int
    phi_empty: int
    bound_form: str
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "candidates": self.candidates,
            "exhaustive": self.exhaustive,
            "max_ratio": self.max_ratio,
            "zero_drop_within_delta": self.zero_drop_within_delta,
            "never_increases": self.never_increases,
            "cross_checked": self.cross_checked,
            "phi_empty": self.phi_empty,
            "bound_form": self.bound_form,
            "positive_drop_edges": sum(1 for r in self.rows if r.drop > 0),
            "notes": self.notes,
        }


class _DropTable:
    """Per-path (hops, weight) profiles used to price a single added edge exactly."""

    def __init__(self, instance: LowerBoundInstance, base: Graph, alpha):
        self.instance = instance
        self.alpha = alpha
        g = instance.graph
        self.paths = instance.critical_paths
        self.old = path_hopdists(instance, base, alpha)
        self.limits = []
        self.fwd = []
        self.bwd = []
        for p, old in zip(self.paths, self.old):
            if alpha is None:
                self.limits.append(None)
                f = bfs_hops(base, p.source, cutoff=old - 2)
                b = bfs_hops(base, p.target, reverse=True, cutoff=old - 2)
                self.fwd.append({v: [(h, 0)] for v, h in f.items()})
                self.bwd.append({v: [(h, 0)] for v, h in b.items()})
            else:
                d = dijkstra(g, p.source)[p.target]
                self.limits.append(alpha * d)
                self.fwd.append(hop_profile(base, p.source, max(old - 2, 0)))
                self.bwd.append(hop_profile(base, p.target, max(old - 2, 0), reverse=True))

    def drops(self, edge_weight) -> dict[tuple[int, int], tuple[int, int]]:
        """Map (u, v) to (total drop, number of paths dropping) for every edge with a positive drop."""
        out: dict[tuple[int, int], list[int]] = {}
        for i, old in enumerate(self.old):
            fwd, bwd, limit = self.fwd[i], self.bwd[i], self.limits[i]
            for u, labs_u in fwd.items():
                for v, labs_v in bwd.items():
                    if u == v or labs_u[0][0] + labs_v[0][0] + 1 >= old:
                        continue
                    w_uv = edge_weight(u, v)
                    if w_uv is None:
                        continue
                    best = old
                    for h1, w1 in labs_u:
                        if h1 + 1 >= best:
                            break
                        for h2, w2 in labs_v:
                            if h1 + h2 + 1 >= best:
                                break
                            if limit is not None and w1 + w_uv + w2 > limit:
                                continue
                            best = h1 + h2 + 1
                            break
                    if best < old:
                        slot = out.setdefault((u, v), [0, 0])
                        slot[0] += old - best
                        slot[1] += 1
        return {k: (a, b) for k, (a, b) in out.items()}


def _closure_weight(graph: Graph):
    cache: dict[int, dict[int, int]] = {}

    def weight(u: int, v: int):
        if u not in cache:
            cache[u] = dijkstra(graph, u)
        return cache[u].get(v)

    return weight


def _gap(instance: LowerBoundInstance, u: int, v: int, hop_cache: dict) -> int:
    lo = instance.layer_of
    if lo is not None and lo[u] is not None and lo[v] is not None and instance.family is not Family.UNWEIGHTED_HOPSET:
        return abs(lo[v] - lo[u])
    if u not in hop_cache:
        hop_cache[u] = bfs_hops(instance.graph, u)
    return hop_cache[u].get(v, 0)


def drop_bound(instance: LowerBoundInstance, delta: int, gap: int) -> tuple[float, str]:
    """Shape of the per-edge drop bound (without its constant)."""
    fam = instance.family
    if fam in (Family.APPROX_HOPSET, Family.POINTLINE_PRESERVER):
        n = instance.params.get("n", instance.graph.node_count)
        c = instance.params.get("c", 1)
        return 2 * math.sqrt(n) / c, "2*sqrt(n)/c"
    r = instance.params["r"]
    d = max(delta, 1)
    g = max(gap, 1)
    return g / d + r * r / (g * d), "g/delta + r^2/(g*delta)"


def candidate_pairs(instance: LowerBoundInstance) -> list[tuple[int, int]]:
    """All ordered pairs (u, v), u != v, of layered nodes with v reachable from u."""
    g = instance.graph
    lo = instance.layer_of
    nodes = [v for v in range(g.node_count) if lo is None or lo[v] is not None]
    keep = set(nodes)
    out = []
    for u in nodes:
        for v in sorted(bfs_hops(g, u)):
            if v != u and v in keep:
                out.append((u, v))
    return out


def max_drop_audit(
    instance: LowerBoundInstance,
    delta: int,
    cap: int = 200_000,
    per_gap_sample: int = 200,
    seed: int = 0,
    cross_check: int = 30,
    alpha=None,
    constant: float | None = None,
) -> AuditReport:
    """Exact drop Phi(E_Delta) - Phi(E_Delta + e) for candidate edges e.

    Positive drops are found exactly from per-path hop/weight profiles; a
    sample of candidates is re-priced by full recomputation of Phi.  When the
    candidate count exceeds ``cap`` the audit reports a stratified sample by
    gap (positive-drop edges are always included).
    """
    alpha = instance_alpha(instance, alpha)
    g = instance.graph
    base = instance_e_delta(instance, delta).applied(g)
    table = _DropTable(instance, base, alpha)
    weight = _closure_weight(g)
    positive = table.drops(weight)
    candidates = candidate_pairs(instance)
    exhaustive = len(candidates) <= cap
    rng = random.Random(seed)
    hop_cache: dict = {}
    notes = []
    if exhaustive:
        chosen = candidates
    else:
        by_gap: dict[int, list[tuple[int, int]]] = {}
        for u, v in candidates:
            by_gap.setdefault(_gap(instance, u, v, hop_cache), []).append((u, v))
        chosen = sorted(set(positive))
        for gp in sorted(by_gap):
            pool = by_gap[gp]
            chosen.extend(rng.sample(pool, min(per_gap_sample, len(pool))))
        chosen = sorted(set(chosen))
        notes.append(f"{len(candidates)} candidates exceed cap {cap}; stratified sample of {len(chosen)}")
    cand_set = set(candidates)
    stray = [e for e in positive if e not in cand_set]
    if stray:
        notes.append(f"{len(stray)} positive-drop pairs lie outside the candidate set")
    rows = []
    zero_ok = True
    for u, v in chosen:
        drop, k = positive.get((u, v), (0, 0))
        gp = _gap(instance, u, v, hop_cache)
        shape, form = drop_bound(instance, delta, gp)
        rows.append(AuditRow(u, v, gp, drop, k, shape, drop / shape if shape else 0.0))
        if gp <= delta and drop != 0:
            zero_ok = False
    _, form = drop_bound(instance, delta, 1)
    max_ratio = max((r.ratio for r in rows), default=0.0)

    # brute-force re-pricing of a sample, biased toward the largest drops
    phi_empty = sum(table.old)
    checks = sorted(rows, key=lambda r: (-r.drop, r.u, r.v))[: cross_check // 2]
    rest = [r for r in rows if r not in checks]
    checks += rng.sample(rest, min(len(rest), cross_check - len(checks)))
    never_increases = True
    for r in checks:
        w = weight(r.u, r.v)
        aug = AugmentationSet([(r.u, r.v, w)], AugmentationKind.HOPSET)
        after = sum(path_hopdists(instance, aug.applied(base), alpha))
        if after > phi_empty:
            never_increases = False
        if phi_empty - after != r.drop:
            raise AssertionError(f"drop mismatch on ({r.u}, {r.v}): profile {r.drop}, recomputed {phi_empty - after}")
    if constant is not None and max_ratio > constant:
        notes.append(f"max ratio {max_ratio:.4g} exceeds frozen constant {constant:.4g}")
    return AuditReport(delta, len(candidates), exhaustive, rows, max_ratio, zero_ok, never_increases, len(checks), phi_empty, form, notes)


def greedy_by_drop(instance: LowerBoundInstance, delta: int, budget: int, alpha=None) -> tuple[AugmentationSet, list[int]]:
    """Repeatedly add the edge with the largest current drop; returns the set and the Phi trace."""
    alpha = instance_alpha(instance, alpha)
    g = instance.graph
    weight = _closure_weight(g)
    base = instance_e_delta(instance, delta).applied(g)
    chosen: list[tuple[int, int, int]] = []
    trace = []
    for _ in range(budget):
        current = Graph.merged(g.node_count, list(base.edges) + chosen, g.directed)
        table = _DropTable(instance, current, alpha)
        trace.append(sum(table.old))
        drops = table.drops(weight)
        if not drops:
            break
        (u, v), _ = min(drops.items(), key=lambda kv: (-kv[1][0], kv[0]))
        chosen.append((u, v, weight(u, v)))
    current = Graph.merged(g.node_count, list(base.edges) + chosen, g.directed)
    trace.append(sum(path_hopdists(instance, current, alpha)))
    kind = AugmentationKind.SHORTCUT if alpha is None else AugmentationKind.HOPSET
    return AugmentationSet(chosen, kind, budget), trace


def random_augmentation(instance: LowerBoundInstance, size: int, seed: int) -> AugmentationSet:
    rng = random.Random(seed)
    pairs = candidate_pairs(instance)
    weight = _closure_weight(instance.graph)
    pick = sorted(rng.sample(pairs, min(size, len(pairs))))
    return AugmentationSet([(u, v, weight(u, v)) for u, v in pick], AugmentationKind.HOPSET)
