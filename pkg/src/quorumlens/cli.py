"""Command-line front end.

Subcommands: ``check`` (validation), ``qi`` (quorum intersection, with an
honest-intersection variant), ``fork`` (fork and strong-fork search),
``safety`` (quota bound tables), ``influence`` (matrix, graph, limit),
and ``gen`` (reduction and random instance generators).

Exit codes: 0 when the checked property holds or the command succeeded,
1 when the property is violated (a witness is emitted), 2 on input
errors, 3 when a resource budget was exceeded. Reports have a machine
form (``--json``) and a human form rendered from the same document; with
a fixed command line and input files the JSON form is byte-identical
across runs except for the ``timing_ms`` field.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from . import bounds as bounds_mod
from . import influence as influence_mod
from .instances import (
    DimacsError,
    GenParams,
    cnf_to_network,
    parse_dimacs,
    random_quota_network,
    slice_addition_instance,
)
from .network import (
    BudgetExceededError,
    ForkWitness,
    NetworkValidationError,
    QuotaNetwork,
    TrustNetwork,
    find_fork,
    find_strong_fork,
    network_violations,
)
from .netio import NetworkFormatError, load_network, save_network
from .quorum import check_qi_honest, check_quorum_intersection, minimal_quora

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3

MINIMAL_QUORA_DISPLAY_LIMIT = 14


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the machine report")
    common.add_argument("--quiet", action="store_true", help="suppress the report body")
    common.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads for the subset scan (default: QUORUMLENS_THREADS or 1)",
    )

    parser = argparse.ArgumentParser(
        prog="quorumlens",
        description="Safety and influence analysis for quorum systems on trust networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="validate a network file")
    p.add_argument("file")

    p = sub.add_parser("qi", parents=[common], help="quorum-intersection check")
    p.add_argument("file")
    p.add_argument(
        "--honest",
        action="store_true",
        help="require an honest node in every pairwise intersection",
    )
    p.add_argument("--max-nodes", type=int, default=20)

    p = sub.add_parser("fork", parents=[common], help="fork search")
    p.add_argument("file")
    p.add_argument("--strong", action="store_true", help="strong-fork search (vetoed networks)")
    p.add_argument("--max-nodes", type=int, default=None)

    p = sub.add_parser("safety", parents=[common], help="quota safety bound tables")
    p.add_argument("file")

    p = sub.add_parser("influence", parents=[common], help="influence matrix and limits")
    p.add_argument("file")
    p.add_argument("--limit", action="store_true", help="compute the limit of the matrix powers")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=40)
    p.add_argument("--exact", action="store_true", help="print entries as exact rationals")

    gen = sub.add_parser("gen", help="instance generators")
    gen_sub = gen.add_subparsers(dest="generator", required=True)

    p = gen_sub.add_parser("sat", parents=[common], help="reduction from a 3CNF formula")
    p.add_argument("--dimacs", required=True, help="input DIMACS CNF file")
    p.add_argument(
        "--slice-addition",
        action="store_true",
        help="emit the incremental base network plus the slice to add",
    )
    p.add_argument("-o", "--output", required=True)

    p = gen_sub.add_parser("random", parents=[common], help="seeded random quota network")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--trust", type=int, required=True)
    p.add_argument("--quota", type=str, required=True)
    p.add_argument("--byz", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--topology",
        choices=["clique", "overlapping-groups", "centralised"],
        default="clique",
    )
    p.add_argument("-o", "--output", required=True)
    return parser


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("QUORUMLENS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise NetworkFormatError(f"QUORUMLENS_THREADS={env!r} is not an integer") from None
    return 1


def _node_sort_key(net):
    order = {n: k for k, n in enumerate(net.nodes)}
    return lambda label: order[label]


def _set_list(net, members) -> list[str]:
    return sorted(members, key=_node_sort_key(net))


def _fork_witness_json(net, witness: ForkWitness) -> dict:
    return {
        "kind": witness.kind,
        "node_a": witness.node_a,
        "value_a": witness.value_a,
        "node_b": witness.node_b,
        "value_b": witness.value_b,
        "supporting_a": _set_list(net, witness.supporting_a),
        "supporting_b": _set_list(net, witness.supporting_b),
        "profile": {
            "honest_opinions": dict(sorted(witness.profile.honest_opinions.items())),
            "byzantine_reveals": {
                b: dict(sorted(m.items()))
                for b, m in sorted(witness.profile.byzantine_reveals.items())
            },
        },
    }


# ---------------------------------------------------------------------------
# Subcommand handlers: each returns (verdict, witness, tables, exit_code)


def _run_check(args):
    try:
        net = load_network(args.file)
    except NetworkValidationError as exc:
        return "invalid", None, {"violations": exc.violations}, EXIT_INPUT
    kind = "quota" if isinstance(net, QuotaNetwork) else "slices"
    tables = {
        "kind": kind,
        "nodes": len(net.nodes),
        "byzantine": _set_list(net, net.byzantine),
        "violations": network_violations(net),
    }
    return "valid", None, tables, EXIT_OK


def _run_qi(args):
    net = load_network(args.file)
    checker = check_qi_honest if args.honest else check_quorum_intersection
    report = checker(net, max_nodes=args.max_nodes, threads=_threads(args))
    minimal = None
    if len(net.nodes) <= MINIMAL_QUORA_DISPLAY_LIMIT:
        try:
            minimal = [
                _set_list(net, q)
                for q in minimal_quora(net, max_nodes=MINIMAL_QUORA_DISPLAY_LIMIT)
            ]
        except BudgetExceededError:
            minimal = None
    tables = {
        "variant": "honest-intersection" if args.honest else "plain",
        "quora_examined": report.quora_examined,
        "minimal_quora": minimal,
    }
    if report.holds:
        return "holds", None, tables, EXIT_OK
    q_a, q_b = report.witness
    witness = {"quorum_a": _set_list(net, q_a), "quorum_b": _set_list(net, q_b)}
    return "violated", witness, tables, EXIT_VIOLATED


def _run_fork(args):
    net = load_network(args.file)
    if args.strong:
        if not isinstance(net, TrustNetwork):
            raise NetworkFormatError("strong-fork search requires a slices network")
        max_nodes = args.max_nodes if args.max_nodes is not None else 16
        witness = find_strong_fork(net, max_nodes=max_nodes)
        safe_verdict, found_verdict = "weakly-safe", "strongly-forked"
    else:
        max_nodes = args.max_nodes if args.max_nodes is not None else 20
        witness = find_fork(net, max_nodes=max_nodes)
        safe_verdict, found_verdict = "safe", "forked"
    tables = {"strong": bool(args.strong), "max_nodes": max_nodes}
    if witness is None:
        return safe_verdict, None, tables, EXIT_OK
    return found_verdict, _fork_witness_json(net, witness), tables, EXIT_VIOLATED


def _run_safety(args):
    net = load_network(args.file)
    if not isinstance(net, QuotaNetwork):
        raise NetworkFormatError("the safety tables require a quota network")
    honest = list(net.honest)
    beta_table = []
    for a in range(len(honest)):
        for b in range(a + 1, len(honest)):
            i, j = honest[a], honest[b]
            beta_table.append(
                {
                    "pair": [i, j],
                    "intersection": len(net.trust[i] & net.trust[j]),
                    "shared_byzantine_cap": str(bounds_mod.shared_byzantine_bound(net, i, j)),
                }
            )
    overlap_table = None
    overlap_all_pass = None
    try:
        reports = bounds_mod.check_overlap_bounds(net)
        overlap_table = [
            {
                "pair": list(r.pair),
                "intersection": r.intersection_size,
                "bound": str(r.bound),
                "satisfies": r.satisfies,
            }
            for r in reports
        ]
        overlap_all_pass = all(r.satisfies for r in reports)
    except ValueError:
        pass  # non-uniform network: the overlap bound does not apply
    common = bounds_mod.common_trust_set(net)
    quotas = {net.quota[i] for i in honest}
    summary = {
        "quota_uniform": len(quotas) == 1,
        "quota_in_recommended_range": all(
            Fraction(3, 4) <= q <= 1 for q in quotas
        ),
        "overlap_all_pass": overlap_all_pass,
        "common_trust_nonempty": bool(common),
    }
    tables = {
        "shared_byzantine_caps": beta_table,
        "overlap_bounds": overlap_table,
        "common_trust": _set_list(net, common),
        "summary": summary,
    }
    ok = (overlap_all_pass is not False) and bool(common)
    witness = None
    if not ok:
        witness = {
            "failing_pairs": [
                row["pair"] for row in (overlap_table or []) if not row["satisfies"]
            ],
            "common_trust_empty": not common,
        }
    return ("passes" if ok else "violated"), witness, tables, (EXIT_OK if ok else EXIT_VIOLATED)


def _run_influence(args):
    net = load_network(args.file)
    matrix = influence_mod.influence_matrix(net)
    if args.exact:
        rows = [[str(x) for x in row] for row in matrix.entries]
    else:
        rows = [[float(x) for x in row] for row in matrix.entries]
    graph = influence_mod.analyze_graph(matrix)
    tables: dict = {
        "order": list(matrix.order),
        "matrix": rows,
        "graph": {
            "edges": len(graph.edges),
            "components": [
                {
                    "members": _set_list(net, scc),
                    "closed": closed,
                    "period": period,
                }
                for scc, closed, period in zip(graph.sccs, graph.closed, graph.periods)
            ],
        },
    }
    if args.limit:
        report = influence_mod.limit_matrix(matrix, tol=args.tol, max_iter=args.max_iter)
        tables["limit"] = {
            "classification": report.classification,
            "iterations": report.iterations,
            "error_bound": report.error_bound,
            "matrix": None if report.limit is None else [list(map(float, row)) for row in report.limit],
        }
    common = bounds_mod.common_trust_set(net)
    if common:
        central = influence_mod.centralization_limit_report(
            net, tol=args.tol, max_iter=args.max_iter
        )
        tables["centralization"] = {
            "common_trust": _set_list(net, central.common_trust),
            "classification": central.classification,
            "regular": central.regular_ok,
            "fully_regular": central.fully_regular_ok,
            "byzantine_reaches_core": central.byzantine_reaches_core,
            "honest_influence_vanishes": central.honest_influence_vanishes,
        }
    return "computed", None, tables, EXIT_OK


def _run_gen_sat(args):
    from pathlib import Path

    try:
        cnf = parse_dimacs(Path(args.dimacs).read_text())
    except OSError as exc:
        raise NetworkFormatError(f"cannot read {args.dimacs}: {exc}") from exc
    if args.slice_addition:
        try:
            base, node, members = slice_addition_instance(cnf)
        except ValueError as exc:
            raise NetworkFormatError(str(exc)) from exc
        save_network(base, args.output, slice_addition=(node, members))
        net = base
        extra = {"slice_addition": {"node": node, "slice": _set_list(base, members)}}
    else:
        net = cnf_to_network(cnf)
        save_network(net, args.output)
        extra = {}
    tables = {
        "variables": cnf.num_vars,
        "clauses": len(cnf.clauses),
        "nodes": len(net.nodes),
        "slices": sum(len(f) for f in net.slices.values()),
        "output": args.output,
        **extra,
    }
    return "generated", None, tables, EXIT_OK


def _run_gen_random(args):
    try:
        params = GenParams(
            node_count=args.nodes,
            trust_size=args.trust,
            quota=Fraction(args.quota) if "/" in args.quota else args.quota,
            byzantine_count=args.byz,
            seed=args.seed,
            topology=args.topology,
        )
        net = random_quota_network(params)
    except (ValueError, TypeError) as exc:
        raise NetworkFormatError(str(exc)) from exc
    save_network(net, args.output)
    tables = {
        "nodes": len(net.nodes),
        "byzantine": _set_list(net, net.byzantine),
        "topology": args.topology,
        "output": args.output,
    }
    return "generated", None, tables, EXIT_OK


# ---------------------------------------------------------------------------
# Rendering


def _render_rows(rows: list[list[str]]) -> list[str]:
    if not rows:
        return []
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    return ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]


def render_human(report: dict) -> str:
    """Plain-text rendering, derived from the machine report only."""
    lines = [f"verdict: {report['verdict']}"]
    witness = report.get("witness")
    if witness:
        if "quorum_a" in witness:
            lines.append(f"quorum A: {{{', '.join(witness['quorum_a'])}}}")
            lines.append(f"quorum B: {{{', '.join(witness['quorum_b'])}}}")
        elif "kind" in witness:
            lines.append(
                f"{witness['kind']}: {witness['node_a']} settles on {witness['value_a']}, "
                f"{witness['node_b']} settles on {witness['value_b']}"
            )
            lines.append(f"side A coalition: {{{', '.join(witness['supporting_a'])}}}")
            lines.append(f"side B coalition: {{{', '.join(witness['supporting_b'])}}}")
        elif "failing_pairs" in witness:
            for pair in witness["failing_pairs"]:
                lines.append(f"overlap bound violated for pair {'-'.join(pair)}")
            if witness.get("common_trust_empty"):
                lines.append("no node is trusted by every honest node")
    tables = report.get("tables", {})
    for key in ("violations",):
        if tables.get(key):
            lines.append("violations:")
            lines.extend(f"  - {v}" for v in tables[key])
    if tables.get("minimal_quora"):
        quora = ", ".join("{" + ", ".join(q) + "}" for q in tables["minimal_quora"])
        lines.append(f"minimal quora: {quora}")
    if "matrix" in tables:
        lines.append("influence matrix (rows influence columns' holders):")
        rows = [[str(x) for x in row] for row in tables["matrix"]]
        rows = [[name] + row for name, row in zip(tables["order"], rows)]
        lines.extend("  " + r for r in _render_rows(rows))
    if tables.get("limit"):
        limit = tables["limit"]
        lines.append(
            f"limit: {limit['classification']} after {limit['iterations']} squarings"
        )
        if limit.get("matrix") is not None:
            rows = [[f"{x:.6g}" for x in row] for row in limit["matrix"]]
            lines.extend("  " + r for r in _render_rows(rows))
    if tables.get("overlap_bounds") is not None:
        rows = [["pair", "intersection", "bound", "ok"]]
        for entry in tables["overlap_bounds"]:
            rows.append(
                [
                    "-".join(entry["pair"]),
                    str(entry["intersection"]),
                    entry["bound"],
                    "yes" if entry["satisfies"] else "NO",
                ]
            )
        lines.append("trust-overlap bounds:")
        lines.extend("  " + r for r in _render_rows(rows))
    if tables.get("common_trust") is not None and "summary" in tables:
        lines.append(f"common trust: {{{', '.join(tables['common_trust'])}}}")
        lines.append(f"summary: {json.dumps(tables['summary'], sort_keys=True)}")
    if tables.get("centralization"):
        lines.append(f"centralization: {json.dumps(tables['centralization'], sort_keys=True)}")
    if report["verdict"] == "generated":
        lines.append(f"wrote: {tables['output']}")
    return "\n".join(lines)


_HANDLERS = {
    ("check", None): _run_check,
    ("qi", None): _run_qi,
    ("fork", None): _run_fork,
    ("safety", None): _run_safety,
    ("influence", None): _run_influence,
    ("gen", "sat"): _run_gen_sat,
    ("gen", "random"): _run_gen_random,
}


def run(argv: list[str]) -> int:
    """Execute one command line; print its report; return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else 0

    handler = _HANDLERS[(args.command, getattr(args, "generator", None))]
    seed = getattr(args, "seed", None)
    started = time.perf_counter()
    try:
        verdict, witness, tables, code = handler(args)
    except (NetworkFormatError, NetworkValidationError, DimacsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceededError as exc:
        verdict, witness, tables, code = (
            "budget-exceeded",
            None,
            {"reason": str(exc)},
            EXIT_BUDGET,
        )
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    report = {
        "command": list(argv),
        "verdict": verdict,
        "witness": witness,
        "tables": tables,
        "timing_ms": elapsed_ms,
        "seed": seed,
    }
    if not args.quiet:
        if args.json:
            print(json.dumps(report, indent=2, sort_keys=True))
        else:
            print(render_human(report))
    return code


def entry() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    entry()
