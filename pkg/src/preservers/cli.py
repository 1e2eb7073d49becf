"""Command-line front end.

Exit codes: 0 success, 1 a verified property failed (a witness is printed),
2 usage, input or IO error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from fractions import Fraction
from importlib import metadata
from pathlib import Path as FsPath

from . import evaluate, lbgen, preserver, reduction
from .claims import CLAIMS, verify_claim
from .graph import UNREACHABLE, GraphError, NotADag, tiebroken_system
from .io import FormatError, GraphDocument, dump_report, dumps, jsonable, loads

JOBS_ENV = "PRESERVERS_JOBS"


class VerificationFailed(Exception):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.1.0"


def _rational(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    return value


def _read_input(path: str) -> tuple[GraphDocument, str]:
    raw = sys.stdin.read() if path == "-" else FsPath(path).read_text()
    return loads(raw), hashlib.sha256(raw.encode()).hexdigest()


def _config(args) -> dict:
    skip = {"func", "out", "json_report", "csv", "report"}
    return {k: jsonable(v) for k, v in sorted(vars(args).items()) if k not in skip}


def _manifest(args, inputs: dict[str, str]) -> dict:
    return {"tool": "preservers", "version": tool_version(), "config": _config(args), "inputs": inputs}


def _write(path: str | None, text: str, manifest: dict | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    FsPath(path).write_text(text)
    if manifest is not None:
        body = dict(manifest)
        body["output_sha256"] = hashlib.sha256(text.encode()).hexdigest()
        FsPath(path + ".manifest.json").write_text(json.dumps(body, sort_keys=True, indent=1) + "\n")


def _emit_report(args, report: dict, manifest: dict) -> None:
    report = dict(report)
    report["manifest"] = manifest
    text = dump_report(report)
    target = getattr(args, "json_report", None) or getattr(args, "report", None)
    if target:
        _write(target, text, manifest)
    else:
        sys.stdout.write(text)


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([jsonable(x) for x in row])


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get(JOBS_ENV)
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise GraphError(f"{JOBS_ENV} must be an integer, got {env!r}") from None


# ---------------------------------------------------------------- subcommands


def cmd_gen(args) -> int:
    params: dict = {}
    fam = lbgen.Family(args.family)
    if fam is lbgen.Family.POINTLINE_PRESERVER:
        params = {"k": args.k, "l": args.l, "alpha": args.alpha}
    elif fam is lbgen.Family.APPROX_HOPSET:
        params = {"sqrt_n": args.sqrt_n, "alpha": args.alpha, "c": args.c}
    else:
        params = {"r": args.r, "c": args.c}
    missing = [k for k, v in params.items() if v is None]
    if missing:
        raise GraphError(f"family {fam.value} needs --{', --'.join(m.replace('_', '-') for m in missing)}")
    inst = lbgen.generate(fam, **params)
    text = dumps(lbgen.to_document(inst))
    _write(args.out, text, _manifest(args, {}))
    summary = {
        "family": fam.value,
        "nodes": inst.graph.node_count,
        "edges": inst.graph.num_edges(),
        "critical_paths": len(inst.critical_paths),
    }
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return 0


def cmd_reduce(args) -> int:
    doc, digest = _read_input(args.input)
    manifest = _manifest(args, {args.input: digest})
    if args.kind == "dag-to-undirected":
        red = reduction.dag_to_undirected(doc.graph)
        meta = {"big_w": str(red.big_w), "topo_order": list(red.topo_order)}
        _write(args.out, dumps(GraphDocument(red.graph, doc.demands, [], meta)), manifest)
        return 0
    if not doc.demands:
        raise GraphError("directed-preserver reduction needs demands in the input")
    report = reduction.reduce_directed_preserver(doc.graph, doc.demands)
    _emit_report(args, report.as_dict(), manifest)
    return 0


def cmd_apsp(args) -> int:
    doc, digest = _read_input(args.input)
    matrix = reduction.apsp_dag(doc.graph, jobs=_jobs(args))
    text = json.dumps(jsonable(matrix), separators=(",", ":")) + "\n"
    _write(args.out, text, _manifest(args, {args.input: digest}))
    return 0


def cmd_preserve(args) -> int:
    doc, digest = _read_input(args.input)
    manifest = _manifest(args, {args.input: digest})
    g, demands = doc.graph, doc.demands
    if not demands:
        raise GraphError("preserve needs demands in the input")
    config = preserver.ClusterConfig(c1=args.threshold_c1, c2=args.threshold_c2)
    report: dict = {"mode": args.mode}
    alpha = args.alpha
    if args.mode == "minimal":
        h = preserver.minimal_preserver(g, demands, alpha=alpha)
    elif args.mode == "sourcewise":
        sources = args.sources if args.sources else sorted({s for s, _ in demands})
        res = preserver.sourcewise_preserver(g, sources, demands)
        h = res.graph
        report.update({"sources": res.sources, "weak_diameter": res.diameter, "bound": res.bound})
    elif args.mode == "d-preserver":
        if args.D is None:
            raise GraphError("--D is required for d-preserver mode")
        h = preserver.d_preserver(g, args.D)
    else:
        res = preserver.build_unweighted_preserver(g, demands, phi=args.phi, config=config)
        h = res.graph
        report["buckets"] = [vars(b) for b in res.buckets]
        report["trend_bound"] = res.trend_bound
    checked = demands
    if args.mode == "d-preserver":
        dist = preserver.demand_distances(g, demands)
        checked = [d for d in demands if dist[d] is not UNREACHABLE and dist[d] >= args.D]
    bad = preserver.check_preserved(g, h, checked, alpha if args.mode == "minimal" else None)
    system = tiebroken_system(g, [d for d in demands if d[0] != d[1]], check_unique=False)
    stats = preserver.PreserverStats.measure(system.union_graph(), system.paths, g.node_count)
    n, p = g.node_count, len(demands)
    report.update(
        {
            "size": h.num_edges(),
            "stats": stats.as_dict(),
            "branching_events": preserver.count_branching_events(h) if h.directed else None,
            "bounds": {"n^(2/3) p + n": n ** (2 / 3) * p + n, "n p^(1/2)": n * p**0.5},
            "preserved": bad is None,
        }
    )
    if args.out:
        _write(args.out, dumps(GraphDocument(h, demands)), manifest)
    _emit_report(args, report, manifest)
    if bad is not None:
        raise VerificationFailed("demand distance not preserved", {"pair": bad[0], "expected": bad[1], "got": bad[2]})
    return 0


def cmd_verify(args) -> int:
    if args.list:
        for name in sorted(CLAIMS):
            c = CLAIMS[name]
            print(f"{name}\t{','.join(f.value for f in c.families)}\t{c.summary}")
        return 0
    if not args.input or not args.claim:
        raise GraphError("verify needs an input file and --claim (or --list)")
    doc, digest = _read_input(args.input)
    inst = lbgen.from_document(doc)
    options = {}
    if args.constant is not None:
        options["constant"] = args.constant
    if args.samples is not None:
        options["samples"] = args.samples
    if args.seed is not None:
        options["seed"] = args.seed
    result = verify_claim(args.claim, inst, **options)
    _emit_report(args, result.as_dict(), _manifest(args, {args.input: digest}))
    if not result.passed:
        raise VerificationFailed(f"claim {args.claim} failed", result.witness)
    return 0


def _augmentation(args, graph, inst=None):
    if args.hopset == "none":
        return evaluate.empty_augmentation()
    if args.hopset == "folklore":
        size = args.sample_size if args.sample_size is not None else evaluate.folklore_sample_size(graph.node_count)
        return evaluate.folklore_hopset(graph, size, args.seed or 0)
    if inst is None:
        return evaluate.e_delta(graph, args.delta, layered=False)
    return evaluate.instance_e_delta(inst, args.delta)


def cmd_measure(args) -> int:
    doc, digest = _read_input(args.input)
    inst = lbgen.from_document(doc) if "family" in doc.meta else None
    g = doc.graph
    aug = _augmentation(args, g, inst)
    aug.validate(g)
    pairs = None
    if args.pairs == "critical":
        pairs = [(p[0], p[-1]) for p in doc.critical_paths]
    elif args.pairs == "demands":
        pairs = doc.demands
    alpha = None if args.reachability else args.alpha
    worst, table = evaluate.measure_hopbound(g, aug, alpha, pairs)
    report = {"hopbound": worst, "pairs": len(table), "augmentation_edges": len(aug), "alpha": alpha}
    if inst is not None and inst.critical_paths and args.potential:
        report["potential"] = evaluate.potential(inst, args.delta, aug if args.hopset != "edelta" else None, args.alpha).as_dict()
    if args.csv:
        _write_csv(args.csv, ["source", "target", "hops"], ([s, t, h] for (s, t), h in sorted(table.items())))
    _emit_report(args, report, _manifest(args, {args.input: digest}))
    return 0


def cmd_audit(args) -> int:
    doc, digest = _read_input(args.input)
    inst = lbgen.from_document(doc)
    audit = evaluate.max_drop_audit(
        inst, args.delta, cap=args.cap, seed=args.seed or 0, cross_check=args.cross_check, constant=args.constant
    )
    report = audit.as_dict()
    if args.csv:
        _write_csv(
            args.csv,
            ["u", "v", "gap", "drop", "paths_through", "bound_shape", "ratio"],
            ([r.u, r.v, r.gap, r.drop, r.paths_through, r.bound, r.ratio] for r in audit.rows),
        )
    _emit_report(args, report, _manifest(args, {args.input: digest}))
    failed = not audit.zero_drop_within_delta or not audit.never_increases
    if args.constant is not None and audit.max_ratio > args.constant:
        failed = True
    if failed:
        worst = max(audit.rows, key=lambda r: r.ratio)
        raise VerificationFailed("drop audit failed", {"edge": [worst.u, worst.v], "drop": worst.drop, "ratio": worst.ratio})
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="preservers", description="Distance preserver and hopset lower-bound toolkit")
    ap.add_argument("--seed", type=int, default=None, help="seed for every randomized step")
    ap.add_argument("--jobs", type=int, default=None, help=f"worker processes (default ${JOBS_ENV} or 1)")
    ap.add_argument("--json-report", default=None, help="write the JSON report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a lower-bound instance")
    g.add_argument("--family", required=True, choices=[f.value for f in lbgen.Family])
    g.add_argument("--k", type=int)
    g.add_argument("--l", type=int)
    g.add_argument("--alpha", type=_rational, default=Fraction(1))
    g.add_argument("--sqrt-n", type=int)
    g.add_argument("--c", type=int, default=1)
    g.add_argument("--r", type=int)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reduce", help="directed-to-undirected reductions")
    r.add_argument("kind", choices=["dag-to-undirected", "directed-preserver"])
    r.add_argument("input")
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_reduce)

    a = sub.add_parser("apsp-dag", help="all-pairs distances of a DAG through the undirected reduction")
    a.add_argument("input")
    a.add_argument("--out", default=None)
    a.set_defaults(func=cmd_apsp)

    p = sub.add_parser("preserve", help="build a distance preserver")
    p.add_argument("input")
    p.add_argument("--mode", choices=["minimal", "sourcewise", "unweighted-pipeline", "d-preserver"], default="minimal")
    p.add_argument("--alpha", type=_rational, default=None)
    p.add_argument("--sources", type=int, nargs="*", default=None)
    p.add_argument("--D", type=int, default=None)
    p.add_argument("--phi", type=_rational, default=None)
    p.add_argument("--threshold-c1", type=_rational, default=Fraction(1))
    p.add_argument("--threshold-c2", type=_rational, default=Fraction(16))
    p.add_argument("--report", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_preserve)

    v = sub.add_parser("verify", help="check a named structural claim on an instance")
    v.add_argument("input", nargs="?")
    v.add_argument("--claim", choices=sorted(CLAIMS))
    v.add_argument("--list", action="store_true")
    v.add_argument("--constant", type=float, default=None)
    v.add_argument("--samples", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("measure", help="measure hopbounds and the potential")
    m.add_argument("input")
    m.add_argument("--hopset", choices=["none", "folklore", "edelta"], default="none")
    m.add_argument("--sample-size", type=int, default=None)
    m.add_argument("--delta", type=int, default=0)
    m.add_argument("--alpha", type=_rational, default=Fraction(1))
    m.add_argument("--reachability", action="store_true", help="count plain reachability hops")
    m.add_argument("--pairs", choices=["all", "critical", "demands"], default="all")
    m.add_argument("--potential", action="store_true")
    m.add_argument("--csv", default=None)
    m.set_defaults(func=cmd_measure)

    u = sub.add_parser("audit", help="single-edge potential drop audit")
    u.add_argument("input")
    u.add_argument("--delta", type=int, required=True)
    u.add_argument("--cap", type=int, default=200_000)
    u.add_argument("--cross-check", type=int, default=30)
    u.add_argument("--constant", type=float, default=None)
    u.add_argument("--csv", default=None)
    u.set_defaults(func=cmd_audit)
    return ap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        print(json.dumps({"witness": jsonable(exc.witness)}, sort_keys=True), file=sys.stderr)
        return 1
    except (reduction.InvariantError, preserver.PreservationFailure) as exc:
        print(f"invariant failed: {exc}", file=sys.stderr)
        return 1
    except FormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except NotADag as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (GraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
