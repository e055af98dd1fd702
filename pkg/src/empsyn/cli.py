"""Command-line front end: JSON verdicts for scripted analyses.

Exit codes: 0 for an affirmative verdict or success, 1 for a negative
verdict (invalid EMP, Inconclusive embedding, failed plan), 2 for usage or
input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import oracle
from .digraph import Digraph, GraphError, graph_from_dot, graph_from_json
from .emp import Emp, check_emp_nodes, emp_from_json
from .embedding import check_embedded, staged_plan
from .synthesis import (
    LoopTooSmallError,
    NotALoopError,
    NotATreeError,
    synthesize,
    validate_emp,
)
from .topology import NotPpnError, TopologyKind, classify

_INPUT_ERRORS = (
    GraphError,
    NotPpnError,
    NotATreeError,
    NotALoopError,
    LoopTooSmallError,
    ValueError,
    OSError,
)


def _load_graph(path: str) -> tuple[Digraph, frozenset]:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith((".dot", ".gv")):
        return graph_from_dot(text), frozenset()
    return graph_from_json(text)


def _load_emp(path: str, g: Digraph) -> Emp:
    emp = emp_from_json(Path(path).read_text(encoding="utf-8"))
    check_emp_nodes(g, emp)
    return emp


def _load_known(path: str, g: Digraph) -> frozenset:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or set(obj) != {"edges"}:
        raise GraphError("known-edges JSON must be an object with the single key 'edges'")
    edges = set()
    for item in obj["edges"]:
        if not isinstance(item, list) or len(item) != 2:
            raise GraphError("'edges' entries must be [from, to] integer pairs")
        edge = (item[0], item[1])
        if edge not in g.edges:
            raise GraphError(f"known edge {edge[0]}->{edge[1]} is not an edge of the graph")
        edges.add(edge)
    return frozenset(edges)


def _parse_subset(text: str, g: Digraph) -> frozenset[int]:
    try:
        nodes = frozenset(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise GraphError(f"subset must be comma-separated integers: {text!r}") from exc
    bad = nodes - set(g.nodes)
    if bad:
        raise GraphError(f"subset references unknown node {sorted(bad)[0]}")
    if not nodes:
        raise GraphError("subset must be nonempty")
    return nodes


def _seeds(args) -> list[int] | None:
    if getattr(args, "seed_list", None):
        return [int(part) for part in args.seed_list.split(",") if part.strip()]
    return None


def _emit(doc: dict, pretty: bool) -> None:
    print(json.dumps(doc, indent=2 if pretty else None))


# -- subcommands ----------------------------------------------------------------


def _cmd_analyze(args) -> tuple[dict, int]:
    g, _ = _load_graph(args.input)
    sets = g.node_sets()
    doc = classify(g).to_dict()
    doc.update(
        sources=sorted(sets.sources),
        sinks=sorted(sets.sinks),
        dources=sorted(sets.dources),
        dinks=sorted(sets.dinks),
    )
    return doc, 0


def _cmd_check(args) -> tuple[dict, int]:
    g, _ = _load_graph(args.input)
    emp = _load_emp(args.emp, g)
    verdict = validate_emp(
        g, emp, kind=args.klass, trials=args.trials, tol=args.tol, seeds=_seeds(args)
    )
    return verdict.to_dict(), 0 if verdict.valid else 1


def _cmd_synthesize(args) -> tuple[dict, int]:
    g, _ = _load_graph(args.input)
    return synthesize(g, kind=args.klass).to_dict(), 0


def _cmd_embed_check(args) -> tuple[dict, int]:
    g, known = _load_graph(args.input)
    emp = _load_emp(args.emp, g)
    va = _parse_subset(args.subset, g)
    if args.known:
        known = known | _load_known(args.known, g)
    sub = g.induced_subgraph(va)
    emp_child = emp.restrict(va).relabel(sub.from_parent)
    isolated = validate_emp(
        sub.graph, emp_child, trials=args.trials, tol=args.tol, seeds=_seeds(args)
    )
    verdict = check_embedded(g, va, emp, known, isolated)
    doc = {
        "subset": sorted(va),
        "known_edges": [list(e) for e in sorted(known)],
        "isolated": isolated.to_dict(),
        "embedded": verdict.to_dict(),
    }
    code = 0 if verdict.conclusive else 1
    if not verdict.conclusive and args.fallback_oracle:
        target = sub.parent_edges() - known
        ok = oracle.subset_identifiable(
            g, target, emp, known, trials=args.trials, tol=args.tol, seeds=_seeds(args)
        )
        doc["oracle"] = {
            "subset_identifiable": ok,
            "target_edges": [list(e) for e in sorted(target)],
        }
        code = 0 if ok else 1
    return doc, code


def _cmd_plan(args) -> tuple[dict, int]:
    g, _ = _load_graph(args.input)
    try:
        obj = json.loads(Path(args.stages).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or set(obj) != {"stages"}:
        raise GraphError("stages JSON must be an object with the single key 'stages'")
    stages = []
    for idx, stage in enumerate(obj["stages"]):
        if not isinstance(stage, dict) or set(stage) != {"nodes", "emp"}:
            raise GraphError(f"stage {idx} must have exactly the keys 'nodes' and 'emp'")
        nodes = stage["nodes"]
        if not isinstance(nodes, list) or not all(isinstance(x, int) for x in nodes):
            raise GraphError(f"stage {idx}: 'nodes' must be a list of integers")
        emp = emp_from_json(json.dumps(stage["emp"]))
        check_emp_nodes(g, emp)
        stages.append((nodes, emp))
    report = staged_plan(g, stages, trials=args.trials, tol=args.tol, seeds=_seeds(args))
    return report.to_dict(), 0 if report.success else 1


def _cmd_oracle(args) -> tuple[dict, int]:
    g, known = _load_graph(args.input)
    emp = _load_emp(args.emp, g)
    if args.known:
        known = known | _load_known(args.known, g)
    if args.subset:
        va = _parse_subset(args.subset, g)
        target = g.induced_subgraph(va).parent_edges() - known
        ok = oracle.subset_identifiable(
            g, target, emp, known, trials=args.seeds, tol=args.tol, seeds=_seeds(args)
        )
        doc = {
            "mode": "subset",
            "identifiable": ok,
            "subset": sorted(va),
            "target_edges": [list(e) for e in sorted(target)],
            "known_edges": [list(e) for e in sorted(known)],
        }
        return doc, 0 if ok else 1
    doc = oracle.rank_report(g, emp, trials=args.seeds, tol=args.tol, seeds=_seeds(args))
    return doc, 0 if doc["identifiable"] else 1


def _cmd_recover(args) -> tuple[dict, int]:
    g, _ = _load_graph(args.input)
    if args.subset:
        va = _parse_subset(args.subset, g)
        truth, recovered = oracle.embedded_round_trip(g, va, seed=args.seed)
        nodes = sorted(va)
        gains = {
            f"{j}->{i}": recovered[nodes.index(i), nodes.index(j)]
            for (j, i) in g.induced_subgraph(va).parent_edges()
        }
        error = float(np.max(np.abs(truth - recovered)))
        doc = {
            "mode": "embedded",
            "subset": nodes,
            "seed": args.seed,
            "gains": {k: gains[k] for k in sorted(gains)},
            "max_abs_error": error,
        }
        return doc, 0
    if args.emp is None:
        raise GraphError("recover needs --emp unless --subset is given")
    emp = _load_emp(args.emp, g)
    topo = classify(g)
    if topo.kind is not TopologyKind.PPN:
        raise NotPpnError("recover without --subset applies to parallel-paths networks")
    net, recovered = oracle.ppn_round_trip(g, emp, topo.detail, seed=args.seed)
    error = max(abs(recovered[e] - net.gains[e]) for e in net.param_order)
    doc = {
        "mode": "ppn",
        "seed": args.seed,
        "gains": {f"{j}->{i}": recovered[(j, i)] for (j, i) in sorted(recovered)},
        "max_abs_error": error,
    }
    return doc, 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="empsyn",
        description="Decide and synthesize excitation/measurement patterns for "
        "dynamic network identifiability.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, oracle_opts=True, trials_flag="--trials"):
        p.add_argument("--input", required=True, help="graph file (JSON or DOT)")
        p.add_argument("--pretty", action="store_true", help="indent the JSON output")
        if oracle_opts:
            p.add_argument(
                trials_flag, dest="trials" if trials_flag == "--trials" else "seeds",
                type=int, default=3, help="number of random trials (default 3)",
            )
            p.add_argument("--tol", type=float, default=1e-9, help="rank tolerance")
            p.add_argument("--seed-list", help="explicit comma-separated seeds")

    p = sub.add_parser("analyze", help="classify a graph and list its node sets")
    common(p, oracle_opts=False)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("check", help="check an EMP against the matching theorem")
    common(p)
    p.add_argument("--emp", required=True, help="EMP JSON file")
    p.add_argument(
        "--class", dest="klass", default="auto", choices=["auto", "tree", "loop", "ppn"]
    )
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("synthesize", help="construct a minimal EMP")
    common(p, oracle_opts=False)
    p.add_argument(
        "--class", dest="klass", default="auto", choices=["auto", "tree", "loop", "ppn"]
    )
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("embed-check", help="check an isolated-valid EMP after embedding")
    common(p)
    p.add_argument("--subset", required=True, help="comma-separated node ids")
    p.add_argument("--emp", required=True, help="EMP JSON file")
    p.add_argument("--known", help="known-edges JSON file")
    p.add_argument(
        "--fallback-oracle",
        action="store_true",
        help="resolve Inconclusive outcomes with the numeric subset test",
    )
    p.set_defaults(func=_cmd_embed_check)

    p = sub.add_parser("plan", help="run a staged identification plan")
    common(p)
    p.add_argument("--stages", required=True, help="stages JSON file")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("oracle", help="numeric rank / subset identifiability test")
    common(p, trials_flag="--seeds")
    p.add_argument("--emp", required=True, help="EMP JSON file")
    p.add_argument("--subset", help="comma-separated node ids (subset mode)")
    p.add_argument("--known", help="known-edges JSON file")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("recover", help="closed-form gain recovery round trip")
    common(p, oracle_opts=False)
    p.add_argument("--emp", help="EMP JSON file (PPN mode)")
    p.add_argument("--subset", help="comma-separated node ids (embedded mode)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_recover)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc, code = args.func(args)
    except _INPUT_ERRORS as exc:
        _emit({"error": str(exc)}, args.pretty)
        return 2
    except (np.linalg.LinAlgError, oracle.MissingEntryError) as exc:
        _emit({"error": f"{exc}"}, args.pretty)
        return 2
    except oracle.NonGenericEntryError as exc:
        _emit({"error": str(exc)}, args.pretty)
        return 1
    _emit(doc, args.pretty)
    return code


if __name__ == "__main__":
    sys.exit(main())
