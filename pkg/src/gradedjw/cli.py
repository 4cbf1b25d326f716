"""Command-line interface: ``gradedjw map | table | verify``.

Exit status is 0 on success, 1 when a verification check fails and 2 for
usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext
from typing import Sequence

from .algebra import FermionMonomial
from .encoder import (
    NetworkError,
    assemble,
    charge_sector,
    export_table,
    map_expression,
    preset_bcs,
    sector_table,
)
from .graph_model import GraphError, MappingGraph, cycle_graph, load_graph, torus_graph
from .oracle import BUDGET_ENV, BudgetExceeded, verification_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad command-line input; reported with exit status 2."""


def _graph(args) -> MappingGraph:
    chosen = [args.graph is not None, args.n is not None, args.lx is not None or args.ly is not None]
    if sum(chosen) > 1:
        raise UsageError("choose one of --graph, --n or --lx/--ly")
    if args.graph is not None:
        return load_graph(args.graph)
    if args.lx is not None or args.ly is not None:
        if args.lx is None or args.ly is None:
            raise UsageError("--lx and --ly must be given together")
        return torus_graph(args.lx, args.ly)
    return cycle_graph(args.n if args.n is not None else 4)


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="JSON graph file (vertices, edges, vertex_order)")
    p.add_argument("--n", type=int, help="cycle length (default 4)")
    p.add_argument("--lx", type=int, help="torus width")
    p.add_argument("--ly", type=int, help="torus height")
    p.add_argument("--loops", choices=("intersect", "avoid"), default="intersect",
                   help="non-contractible loop representatives on tori")
    p.add_argument("--budget", type=int, help=f"largest spin count realized explicitly (env {BUDGET_ENV})")


def _read_operators(path: str) -> list[str]:
    """One monomial per line; ``#`` starts a comment."""
    stream = nullcontext(sys.stdin) if path == "-" else open(path, encoding="utf-8")
    with stream as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    return [ln for ln in lines if ln]


def cmd_map(args) -> int:
    g = _graph(args)
    net = assemble(g, args.bc, args.defect)
    texts = list(args.operators)
    if args.ops:
        texts += _read_operators(args.ops)
    if not texts:
        raise UsageError("no operators given (positional or --ops FILE)")
    order = g.vertex_order
    results = []
    for text in texts:
        try:
            m = FermionMonomial.parse(text, order)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        terms = map_expression(net, m)
        results.append((text, terms))
    header = {"graph": g.kind, "bc": net.bc.ascii(), "defect": net.has_defect, "spins": [str(s) for s in net.spins]}
    if g.kind in ("cycle", "torus") and not net.has_defect:
        rec = charge_sector(net, args.loops, twists=False)
        header["fermion_parity"] = rec.fermion_parity
        header["loops"] = rec.spin_eigenvalues
    if args.format == "json":
        payload = {
            "header": header,
            "images": [
                {"operator": t, "terms": [{"coefficient": [c.real, c.imag], "pauli": str(p)} for c, p in terms]}
                for t, terms in results
            ],
        }
        print(json.dumps(payload, ensure_ascii=False, indent=2))
        return EXIT_OK
    print("# " + " ".join(f"{k}={_plain(v)}" for k, v in header.items()))
    for _, terms in results:
        print(_expression(terms))
    return EXIT_OK


def _plain(v) -> str:
    if isinstance(v, dict):
        return ",".join(f"{k}:{x:+d}" for k, x in v.items())
    if isinstance(v, list):
        return ",".join(v)
    return str(v)


_UNIT = {1: 0, 1j: 1, -1: 2, -1j: 3}


def _expression(terms) -> str:
    """A single unit-coefficient term prints as a signed Pauli string."""
    if len(terms) == 1 and complex(terms[0][0]) in _UNIT:
        c, p = terms[0]
        return str(p.with_phase((p.phase + _UNIT[complex(c)]) % 4))
    parts = []
    for c, p in terms:
        c = complex(c)
        coef = f"{c.real:g}" if c.imag == 0 else (f"{c.imag:g}j" if c.real == 0 else f"({c.real:g}{c.imag:+g}j)")
        parts.append(f"{coef}*{p.letters}")
    return " + ".join(parts).replace("+ -", "- ")


def cmd_table(args) -> int:
    g = _graph(args)
    print(export_table(sector_table(g, args.loops), args.format), end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _graph(args)
    if args.bc is not None:
        cases = [(args.bc, args.defect)]
    else:
        cases = [(bc, False) for bc in preset_bcs(g)]
        cases += [(bc, True) for bc in preset_bcs(g) if "X" not in bc]
    records, failed = [], 0
    for bc, defect in cases:
        net = assemble(g, bc, defect)
        for check in verification_report(net, args.loops):
            rec = check.as_dict()
            rec["network"] = net.describe()
            records.append(rec)
            failed += not check.passed
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(records, fh, ensure_ascii=False, indent=2)
    if args.format == "json":
        print(json.dumps({"passed": failed == 0, "checks": records}, ensure_ascii=False, indent=2))
    else:
        for rec in records:
            if not rec["passed"] or args.verbose:
                status = "PASS" if rec["passed"] else "FAIL"
                print(f"{status} [{rec['network']}] {rec['check']}: expected {rec['expected']}, got {rec['actual']}")
        print(f"{len(records) - failed}/{len(records)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradedjw", description="Fermion-to-qubit mapping networks on graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="map fermionic operators to Pauli strings")
    _add_graph_flags(p)
    p.add_argument("operators", nargs="*", help='monomials such as "X[0] X[1]" or "a†[0] a[1]"')
    p.add_argument("--ops", help="file with one monomial per line ('-' for stdin)")
    p.add_argument("--bc", default="I", help="boundary condition, e.g. Z, ZX, ZHZV, ZVX")
    p.add_argument("--defect", action="store_true", help="add the controlled-X defect spin")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("table", help="print the sector table of a cycle or torus")
    _add_graph_flags(p)
    p.add_argument("--format", choices=("text", "csv", "tsv", "json"), default="text")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="check every symbolic rule against the explicit oracle")
    _add_graph_flags(p)
    p.add_argument("--bc", help="only this boundary condition (default: all presets)")
    p.add_argument("--defect", action="store_true", help="with --bc, add the defect spin")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--report", help="write the structured report to this JSON file")
    p.add_argument("-v", "--verbose", action="store_true", help="print passing checks too")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    # the override lasts for this command only, so embedding callers keep their environment
    previous = os.environ.get(BUDGET_ENV)
    if args.budget is not None:
        os.environ[BUDGET_ENV] = str(args.budget)
    try:
        return args.func(args)
    except (UsageError, GraphError, NetworkError, BudgetExceeded, OSError) as exc:
        print(f"gradedjw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        if args.budget is not None:
            if previous is None:
                os.environ.pop(BUDGET_ENV, None)
            else:
                os.environ[BUDGET_ENV] = previous


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
