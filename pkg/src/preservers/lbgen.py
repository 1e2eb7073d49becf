"""Deterministic generators for the four lower-bound graph families.

Coordinates follow the usual conventions: ``[x]`` is ``1..x`` and ``[[x]]``
is ``0..x-1``.  Node ids are dense row-major encodings of the coordinates.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import Graph, GraphError, Path, as_fraction, dijkstra

GENERATOR_VERSION = "1"


class Family(enum.Enum):
    POINTLINE_PRESERVER = "pointline"
    APPROX_HOPSET = "approx-hopset"
    SHORTCUT_LAYERED = "shortcut"
    UNWEIGHTED_HOPSET = "unweighted-hopset"


class InstanceTooLarge(GraphError):
    pass


@dataclass
class LowerBoundInstance:
    graph: Graph
    critical_paths: list[Path]
    family: Family
    params: dict
    layer_of: list[int | None] | None = None
    # one label per critical path: the generation parameters that produced it
    path_labels: list[tuple] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def layer_count(self) -> int:
        if self.layer_of is None:
            return 0
        vals = [x for x in self.layer_of if x is not None]
        return max(vals) - min(vals) + 1 if vals else 0

    def demands(self) -> list[tuple[int, int]]:
        return [(p.source, p.target) for p in self.critical_paths]


def _check_pow2(value: int, name: str, minimum: int = 1) -> int:
    if not isinstance(value, int) or value < minimum or value & (value - 1):
        raise GraphError(f"{name} must be a power of two >= {minimum}, got {value!r}")
    return value.bit_length() - 1


def _check_size(nodes: int, limit: int | None) -> None:
    if limit is not None and nodes > limit:
        raise InstanceTooLarge(f"instance would have {nodes} nodes, limit is {limit}")


def bit_reversal_perm(r: int) -> list[int]:
    bits = _check_pow2(r, "r")
    return [int(format(i, f"0{bits}b")[::-1], 2) if bits else 0 for i in range(r)]


def weight_base(alpha: Fraction, n: int) -> int:
    """Smallest integer >= 2*alpha*n."""
    return math.ceil(2 * alpha * n)


# ---------------------------------------------------------------- point-line


def gen_pointline(k: int, l: int, alpha=1, max_weight_bits: int | None = 1 << 20) -> LowerBoundInstance:
    """Points [k] x [2kl], lines y = m x + b for m in [l], b in [kl]."""
    if k < 1 or l < 1:
        raise GraphError("k and l must be >= 1")
    alpha = as_fraction(alpha)
    height = 2 * k * l
    n = k * height
    lines = [(m, b) for m in range(1, l + 1) for b in range(1, k * l + 1)]  # slope-then-intercept order
    base = weight_base(alpha, n)
    if max_weight_bits is not None and len(lines) * base.bit_length() > max_weight_bits:
        raise InstanceTooLarge(f"top weight needs about {len(lines) * base.bit_length()} bits")
    if k == 1:
        warnings.warn("k = 1: every line holds a single point, the instance has no edges", stacklevel=2)

    def node(x: int, y: int) -> int:
        return (x - 1) * height + (y - 1)

    edges = []
    paths_nodes = []
    for rank, (m, b) in enumerate(lines, start=1):
        pts = [node(x, m * x + b) for x in range(1, k + 1)]
        w = base**rank
        edges.extend((u, v, w) for u, v in zip(pts, pts[1:]))
        paths_nodes.append(pts)
    g = Graph(n, edges, directed=True)
    paths = [Path.in_graph(g, pts) for pts in paths_nodes]
    return LowerBoundInstance(
        graph=g,
        critical_paths=paths,
        family=Family.POINTLINE_PRESERVER,
        params={"k": k, "l": l, "alpha": alpha, "n": n, "p": len(lines), "weight_base": base},
        layer_of=[v // height + 1 for v in range(n)],
        path_labels=lines,
        meta={"generator_version": GENERATOR_VERSION, "incidences": k * len(lines)},
    )


# ---------------------------------------------------------------- approximate hopset grid


def gen_approx_hopset(sqrt_n: int, alpha=1, c: int = 1, max_weight_bits: int | None = 1 << 20) -> LowerBoundInstance:
    """Grid [sqrt_n/2] x [2 sqrt_n] with bit-reversal exponent weights.

    With ``c > 1`` only every c-th layer is kept and each critical path is
    contracted onto the kept layers with distance-weighted edges.
    Critical paths whose parameter d is at least sqrt_n/2 coincide with the
    d = sqrt_n/2 path and are emitted once.
    """
    _check_pow2(sqrt_n, "sqrt_n", 2)
    if c < 1:
        raise GraphError("c must be >= 1")
    alpha = as_fraction(alpha)
    n = sqrt_n * sqrt_n
    width = sqrt_n // 2  # number of layers
    height = 2 * sqrt_n
    q = bit_reversal_perm(width)
    base = weight_base(alpha, n)
    if max_weight_bits is not None and max(q) * base.bit_length() > max_weight_bits:
        raise InstanceTooLarge(f"top weight needs about {max(q) * base.bit_length()} bits")

    def node(x: int, y: int) -> int:
        return (x - 1) * height + (y - 1)

    edges = []
    for x in range(1, width):  # layer x -> x + 1, weight exponent indexed by the layer
        diag = base ** q[x]
        for y in range(1, height + 1):
            edges.append((node(x, y), node(x + 1, y), 1))
            if y < height:
                edges.append((node(x, y), node(x + 1, y + 1), diag))
    g = Graph(n, edges, directed=True)

    raw_paths = []
    labels = []
    for y0 in range(1, sqrt_n + 1):
        for d in range(1, width + 1):
            y = y0
            pts = [node(1, y)]
            for x in range(1, width):
                if d > q[x]:
                    y += 1
                if not 1 <= y <= height:
                    raise AssertionError(f"critical path ({y0}, {d}) left the grid")
                pts.append(node(x + 1, y))
            raw_paths.append(pts)
            labels.append((y0, d))
    params = {"sqrt_n": sqrt_n, "n": n, "alpha": alpha, "c": c, "weight_base": base, "layers": width}
    meta = {
        "generator_version": GENERATOR_VERSION,
        "weight_layer_index": "diagonal edge out of layer x (x in 1..sqrt_n/2-1) uses exponent q[x]",
        "duplicate_parameters": f"d >= {width} all give the d = {width} path; emitted once",
        "paths_before_dedup": sqrt_n * sqrt_n,
    }
    layer_of = [v // height + 1 for v in range(n)]
    if c == 1:
        paths = [Path.in_graph(g, pts) for pts in raw_paths]
        return LowerBoundInstance(g, paths, Family.APPROX_HOPSET, params, layer_of, labels, meta)

    kept = [c * i for i in range(1, width // c + 1)]
    if not kept:
        raise GraphError(f"c = {c} keeps no layer of a {width}-layer grid")
    kept_nodes = [node(x, y) for x in kept for y in range(1, height + 1)]
    new_id = {v: i for i, v in enumerate(kept_nodes)}
    dist_cache: dict[int, dict[int, int]] = {}
    new_edges: dict[tuple[int, int], int] = {}
    contracted = []
    new_labels = []
    seen = set()
    for pts, label in zip(raw_paths, labels):
        sub = [pts[x - 1] for x in kept]
        for u, v in zip(sub, sub[1:]):
            if u not in dist_cache:
                dist_cache[u] = dijkstra(g, u)
            new_edges[(new_id[u], new_id[v])] = dist_cache[u][v]
        key = tuple(new_id[v] for v in sub)
        if key in seen:
            continue
        seen.add(key)
        contracted.append(key)
        new_labels.append(label)
    g2 = Graph(len(kept_nodes), [(u, v, w) for (u, v), w in sorted(new_edges.items())], directed=True)
    paths = [Path.in_graph(g2, pts) for pts in contracted]
    params["kept_layers"] = kept
    meta["paths_before_contraction_dedup"] = len(raw_paths)
    layer_of2 = [i // height + 1 for i in range(len(kept_nodes))]
    return LowerBoundInstance(g2, paths, Family.APPROX_HOPSET, params, layer_of2, new_labels, meta)


# ---------------------------------------------------------------- layered shortcut construction


def _shortcut_vectors(r: int, c: int) -> list[tuple[int, int, int]]:
    q = bit_reversal_perm(r)
    out = []
    for i in range(2 * c * r):
        if i % 2 == 0:
            out.append((1, 0, q[(i // 2) % r]))
        else:
            out.append((0, 1, q[((i - 1) // 2) % r]))
    return out


def gen_shortcut(r: int, c: int = 1, max_nodes: int | None = 2_000_000) -> LowerBoundInstance:
    """Layered DAG over (2cr+1) copies of the grid [4cr] x [4cr] x [4cr^2]."""
    _check_pow2(r, "r", 2)
    if c < 1:
        raise GraphError("c must be >= 1")
    a, b = 4 * c * r, 4 * c * r * r
    layers = 2 * c * r + 1
    per_layer = a * a * b
    _check_size(layers * per_layer, max_nodes)
    ws = _shortcut_vectors(r, c)

    def node(i: int, x1: int, x2: int, x3: int) -> int:
        return ((i * a + (x1 - 1)) * a + (x2 - 1)) * b + (x3 - 1)

    edges = []
    for i in range(layers - 1):
        w1, w2, w3 = ws[i]
        for x1 in range(1, a + 1):
            for x2 in range(1, a + 1):
                base_src = node(i, x1, x2, 1)
                base_dst = node(i + 1, x1, x2, 1)
                for x3 in range(b):
                    edges.append((base_src + x3, base_dst + x3, 1))
                if x1 + w1 <= a and x2 + w2 <= a:
                    shifted = node(i + 1, x1 + w1, x2 + w2, 1 + w3)
                    for x3 in range(b - w3):
                        edges.append((base_src + x3, shifted + x3, 1))
    g = Graph(layers * per_layer, edges, directed=True)

    paths = []
    labels = []
    for x1 in range(1, 2 * c * r + 1):
        for x2 in range(1, 2 * c * r + 1):
            for x3 in range(1, 2 * c * r * r + 1):
                for d1 in range(1, r + 1):
                    for d2 in range(1, r + 1):
                        pos = [x1, x2, x3]
                        pts = [node(0, *pos)]
                        for i, (w1, w2, w3) in enumerate(ws):
                            take = (w1 == 1 and w3 < d1) or (w2 == 1 and w3 < d2)
                            if take:
                                pos = [pos[0] + w1, pos[1] + w2, pos[2] + w3]
                                if pos[0] > a or pos[1] > a or pos[2] > b:
                                    raise AssertionError(f"critical path {(x1, x2, x3, d1, d2)} left the grid")
                            pts.append(node(i + 1, *pos))
                        paths.append(Path(tuple(pts), len(pts) - 1, len(pts) - 1))
                        labels.append((x1, x2, x3, d1, d2))
    return LowerBoundInstance(
        graph=g,
        critical_paths=paths,
        family=Family.SHORTCUT_LAYERED,
        params={"r": r, "c": c, "layers": layers, "grid": [a, a, b]},
        layer_of=[v // per_layer for v in range(layers * per_layer)],
        path_labels=labels,
        meta={"generator_version": GENERATOR_VERSION},
    )


def shortcut_coords(instance: LowerBoundInstance, v: int) -> tuple[int, int, int, int]:
    a, _, b = instance.params["grid"]
    x3 = v % b
    rest = v // b
    x2 = rest % a
    rest //= a
    return rest // a, rest % a + 1, x2 + 1, x3 + 1


# ---------------------------------------------------------------- unweighted hopset construction


def valid_hopset_pairs(r: int) -> list[tuple[int, int]]:
    """All (d1, d2) in [r] x [r] with r/2 < d2 < d1."""
    return [(d1, d2) for d1 in range(1, r + 1) for d2 in range(1, r + 1) if 2 * d2 > r and d2 < d1]


def gen_unweighted_hopset(r: int, c: int = 1, max_nodes: int | None = 2_000_000) -> LowerBoundInstance:
    """Undirected unit graph on [[2cr+1]] x [4cr] x [3cr^2] plus two-edge chain midpoints.

    Midpoint ids follow the important ids; ``meta["midpoints"]`` maps each
    midpoint back to the two important nodes it joins.
    """
    _check_pow2(r, "r", 2)
    if c < 1:
        raise GraphError("c must be >= 1")
    a, b = 4 * c * r, 3 * c * r * r
    layers = 2 * c * r + 1
    per_layer = a * b
    important = layers * per_layer
    _check_size(2 * important, max_nodes)
    q = bit_reversal_perm(r)

    def node(i: int, j: int, k: int) -> int:
        return (i * a + (j - 1)) * b + (k - 1)

    def chain_step(i: int) -> tuple[int, int]:
        if i % 2 == 0:
            return 0, q[(i // 2) % r]
        return 1, q[((i - 1) // 2) % r]

    edges = []
    midpoints: list[tuple[int, int]] = []
    mid_of: dict[tuple[int, int], int] = {}
    for i in range(layers - 1):
        dj, dk = chain_step(i)
        for j in range(1, a + 1):
            for k in range(1, b + 1):
                u = node(i, j, k)
                edges.append((u, node(i + 1, j, k), 1))
                if j + dj <= a and k + dk <= b:
                    v = node(i + 1, j + dj, k + dk)
                    m = important + len(midpoints)
                    midpoints.append((u, v))
                    mid_of[(u, v)] = m
                    edges.append((u, m, 1))
                    edges.append((m, v, 1))
    total = important + len(midpoints)
    _check_size(total, max_nodes)
    g = Graph(total, edges, directed=False)

    paths = []
    labels = []
    for d1, d2 in valid_hopset_pairs(r):
        for j0 in range(1, c * r + 1):
            for k0 in range(1, c * r * r + 1):
                j, k = j0, k0
                pts = [node(0, j, k)]
                for i in range(layers - 1):
                    dj, dk = chain_step(i)
                    u = node(i, j, k)
                    if dk >= (d1 if i % 2 == 0 else d2):
                        j, k = j + dj, k + dk
                        v = node(i + 1, j, k)
                        if (u, v) not in mid_of:
                            raise AssertionError(f"critical path {(j0, k0, d1, d2)} left the grid")
                        pts.extend((mid_of[(u, v)], v))
                    else:
                        pts.append(node(i + 1, j, k))
                paths.append(Path(tuple(pts), len(pts) - 1, len(pts) - 1))
                labels.append((j0, k0, d1, d2))
    layer_of: list[int | None] = [v // per_layer for v in range(important)] + [None] * len(midpoints)
    return LowerBoundInstance(
        graph=g,
        critical_paths=paths,
        family=Family.UNWEIGHTED_HOPSET,
        params={"r": r, "c": c, "layers": layers, "grid": [a, b], "important_nodes": important},
        layer_of=layer_of,
        path_labels=labels,
        meta={"generator_version": GENERATOR_VERSION, "midpoints": midpoints},
    )


def generate(family: str | Family, **params) -> LowerBoundInstance:
    fam = Family(family) if not isinstance(family, Family) else family
    if fam is Family.POINTLINE_PRESERVER:
        return gen_pointline(params["k"], params["l"], params.get("alpha", 1))
    if fam is Family.APPROX_HOPSET:
        return gen_approx_hopset(params["sqrt_n"], params.get("alpha", 1), params.get("c", 1))
    if fam is Family.SHORTCUT_LAYERED:
        return gen_shortcut(params["r"], params.get("c", 1))
    return gen_unweighted_hopset(params["r"], params.get("c", 1))


def to_document(instance: LowerBoundInstance):
    """Instance as a graph document; family data travels in ``meta``."""
    from .io import GraphDocument, jsonable

    meta = {
        "family": instance.family.value,
        "params": jsonable(instance.params),
        "layer_of": instance.layer_of,
        "path_labels": jsonable(instance.path_labels),
        "instance_meta": jsonable(instance.meta),
    }
    return GraphDocument(
        instance.graph,
        demands=instance.demands(),
        critical_paths=[list(p.nodes) for p in instance.critical_paths],
        meta=meta,
    )


def from_document(doc) -> LowerBoundInstance:
    meta = doc.meta
    if "family" not in meta:
        raise GraphError("document carries no generator family")
    params = dict(meta.get("params", {}))
    if isinstance(params.get("alpha"), str):
        params["alpha"] = Fraction(params["alpha"])
    paths = [Path.in_graph(doc.graph, nodes) for nodes in doc.critical_paths]
    return LowerBoundInstance(
        graph=doc.graph,
        critical_paths=paths,
        family=Family(meta["family"]),
        params=params,
        layer_of=meta.get("layer_of"),
        path_labels=[tuple(x) for x in meta.get("path_labels", [])],
        meta=dict(meta.get("instance_meta", {})),
    )
