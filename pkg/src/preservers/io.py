"""Graph JSON and unit-weight DIMACS serialization."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path as FsPath

from .graph import Graph, GraphError, UNREACHABLE


class FormatError(ValueError):
    """Malformed instance file; ``position`` is a human-readable location."""

    def __init__(self, message: str, position: str = ""):
        super().__init__(f"{message} at {position}" if position else message)
        self.position = position


@dataclass
class GraphDocument:
    graph: Graph
    demands: list[tuple[int, int]] = field(default_factory=list)
    critical_paths: list[list[int]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def graph_to_dict(doc: GraphDocument) -> dict:
    g = doc.graph
    out = {
        "directed": g.directed,
        "n": g.node_count,
        "edges": [[u, v, str(w)] for u, v, w in g.edges],
    }
    if doc.demands:
        out["demands"] = [[s, t] for s, t in doc.demands]
    if doc.critical_paths:
        out["critical_paths"] = [list(p) for p in doc.critical_paths]
    if doc.meta:
        out["meta"] = doc.meta
    return out


def _parse_weight(raw, where: str) -> int:
    if isinstance(raw, bool):
        raise FormatError("weight must be a decimal string", where)
    if isinstance(raw, int):
        return raw
    if isinstance(raw, str) and raw.isdigit() and raw.isascii():
        return int(raw)
    raise FormatError(f"bad weight {raw!r}", where)


def dict_to_graph(data: dict) -> GraphDocument:
    if not isinstance(data, dict):
        raise FormatError("top level must be an object")
    try:
        directed = data["directed"]
        n = data["n"]
        raw_edges = data["edges"]
    except KeyError as exc:
        raise FormatError(f"missing key {exc.args[0]!r}") from None
    if not isinstance(directed, bool) or not isinstance(n, int) or not isinstance(raw_edges, list):
        raise FormatError("wrong type for directed/n/edges")
    edges = []
    for i, e in enumerate(raw_edges):
        where = f"edges[{i}]"
        if not (isinstance(e, list) and len(e) == 3 and isinstance(e[0], int) and isinstance(e[1], int)):
            raise FormatError("edge must be [tail, head, weight]", where)
        edges.append((e[0], e[1], _parse_weight(e[2], where)))
    try:
        graph = Graph(n, edges, directed)
    except GraphError as exc:
        raise FormatError(str(exc), "edges") from None
    demands = []
    for i, d in enumerate(data.get("demands", [])):
        if not (isinstance(d, list) and len(d) == 2 and all(isinstance(x, int) and 0 <= x < n for x in d)):
            raise FormatError("demand must be [s, t] with valid ids", f"demands[{i}]")
        demands.append((d[0], d[1]))
    paths = []
    for i, p in enumerate(data.get("critical_paths", [])):
        if not (isinstance(p, list) and p and all(isinstance(x, int) and 0 <= x < n for x in p)):
            raise FormatError("critical path must be a nonempty node list", f"critical_paths[{i}]")
        paths.append(list(p))
    meta = data.get("meta", {})
    if not isinstance(meta, dict):
        raise FormatError("meta must be an object", "meta")
    return GraphDocument(graph, demands, paths, meta)


def dumps(doc: GraphDocument) -> str:
    return json.dumps(graph_to_dict(doc), sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> GraphDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return dict_to_graph(data)


def read_graph(path) -> GraphDocument:
    return loads(FsPath(path).read_text())


def write_graph(path, doc: GraphDocument) -> None:
    FsPath(path).write_text(dumps(doc))


def to_dimacs(graph: Graph) -> str:
    """Unit-weight DIMACS ``sp`` export (1-based ids); undirected edges emit both arcs."""
    if not graph.is_unit_weighted():
        raise GraphError("DIMACS export is only offered for unit-weight graphs")
    arcs = []
    for u, v, _ in graph.edges:
        arcs.append((u, v))
        if not graph.directed:
            arcs.append((v, u))
    lines = [f"p sp {graph.node_count} {len(arcs)}"]
    lines += [f"a {u + 1} {v + 1} 1" for u, v in arcs]
    return "\n".join(lines) + "\n"


def jsonable(value):
    """Recursively convert report values: big ints stay ints, UNREACHABLE becomes a literal."""
    if value is UNREACHABLE:
        return "UNREACHABLE"
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, (int, bool)):
        return f"{value.numerator}/{value.denominator}"
    if hasattr(value, "value") and hasattr(value, "name"):  # enum
        return value.value
    return value


def dump_report(report) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=1) + "\n"
