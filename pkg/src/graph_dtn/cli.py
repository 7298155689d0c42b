"""Command-line front end.

Exit codes: 0 success, 1 a checked property failed, 2 malformed input,
3 inapplicable request (empty boundary basis or failed theorem hypothesis).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as gio
from .dtn import DegreeOutOfRange, dtn_operator
from .forms import betti_numbers
from .graph import GraphError, WeightedGraph, enumerate_cliques
from .lattice import Inapplicable, build_lattice
from .spectral import SpectralError
from .verify import THEOREMS, run_selftest, verify_theorem

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_INAPPLICABLE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_graph(args):
    if args.adjacency:
        dom = build_lattice(_load_omega(args))
        return gio.GraphInput(dom.graph, dom.gb.wg.spec, sorted(dom.gb.bs.interior))
    if args.input and args.adjacency_matrix:
        raise CliError(EXIT_INPUT, "give either --input or --adjacency-matrix, not both")
    if args.adjacency_matrix:
        try:
            text = Path(args.adjacency_matrix).read_text()
        except OSError as exc:
            raise CliError(EXIT_INPUT, f"cannot read {args.adjacency_matrix}: {exc.strerror}") from None
        g, spec = gio.parse_adjacency_matrix(text)
        interior = None
        if args.interior:
            interior = [int(x) for x in args.interior.split(",") if x.strip()]
        return gio.GraphInput(g, spec, interior)
    if not args.input:
        raise CliError(EXIT_INPUT, "missing --input")
    gi = gio.parse_graph(gio.load_json(args.input))
    if args.interior:
        gi.interior = [int(x) for x in args.interior.split(",") if x.strip()]
    return gi


def _emit(args, payload: dict, csv_text: str | None = None) -> None:
    if args.format == "csv" and csv_text is not None:
        gio.write_text(args.output, csv_text)
    else:
        gio.write_text(args.output, gio.dumps(payload))


def cmd_spectrum(args) -> int:
    gi = _load_graph(args)
    try:
        gb = gi.with_boundary()
    except GraphError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    kind = args.operator.replace("-", "_")
    try:
        op = dtn_operator(gb, kind, args.k, rng=np.random.default_rng(args.seed))
    except DegreeOutOfRange as exc:
        raise CliError(EXIT_INAPPLICABLE, str(exc)) from None
    if not op.dim:
        raise CliError(EXIT_INAPPLICABLE, f"no boundary {args.k + 1}-cliques: the degree-{args.k} boundary basis is empty")
    try:
        report = op.spectrum(rtol=args.tol)
    except SpectralError as exc:
        raise CliError(EXIT_FAILED, str(exc)) from None
    payload = report.to_json() | {"operator": kind, "k": args.k, "dimension": op.dim}
    _emit(args, payload, gio.spectral_csv(report))
    if op.well_defined_residual > 1e-10:
        print(f"well-definedness residual {op.well_defined_residual:.3e} exceeds 1e-10", file=sys.stderr)
        return EXIT_FAILED
    if len(report.eigenvalues) and report.eigenvalues[0] < -1e-10:
        print(f"operator is not positive semidefinite: {report.eigenvalues[0]:.3e}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _load_omega(args):
    if args.input:
        data = gio.load_json(args.input)
    else:
        raise CliError(EXIT_INPUT, "missing --input (omega JSON)")
    return gio.parse_omega(data, args.n, args.adjacency)


def cmd_verify(args) -> int:
    spec = _load_omega(args)
    theorem = args.theorem or ("rs0" if spec.adjacency == "lattice" else "zero")
    needed = "lattice" if theorem == "rs0" else "tessellation"
    if spec.adjacency != needed:
        raise CliError(EXIT_INPUT, f"theorem {theorem} needs adjacency '{needed}', got '{spec.adjacency}'")
    dom = build_lattice(spec)
    try:
        verdicts = verify_theorem(dom, theorem, args.k if theorem == "gen" else None, tol=args.slack_tol)
    except Inapplicable as exc:
        raise CliError(EXIT_INAPPLICABLE, f"hypothesis fails: {exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    payload = {"instances": [v.to_json() for v in verdicts]}
    if args.format == "csv":
        rows = ["theorem,operator,k,lhs,refined,coarse,satisfied,slack,flagged"]
        for v in verdicts:
            rows.append(
                f"{v.theorem},{v.operator},{v.k},{v.lhs!r},{v.refined!r},{v.coarse!r},"
                f"{str(v.satisfied).lower()},{v.slack!r},{str(v.flagged).lower()}"
            )
        gio.write_text(args.output, "\n".join(rows) + "\n")
    else:
        gio.write_text(args.output, gio.dumps(payload))
    for v in verdicts:
        if v.flagged:
            print(
                f"{v.theorem} k={v.k} {v.operator}: only {v.eigen_count} positive eigenvalues, partial sum reported",
                file=sys.stderr,
            )
    return EXIT_OK if all(v.satisfied for v in verdicts) else EXIT_FAILED


def cmd_selftest(args) -> int:
    results = run_selftest(args.seed, args.cases, mutate_d=args.mutate_d)
    failed = False
    for r in results:
        status = "ok" if r.passed else "FAIL"
        print(f"{r.name:20s} {status:4s} max residual {r.max_residual:.3e} (tol {r.tolerance:.1e})")
        if not r.passed:
            failed = True
            print(f"  {r.failure or f'residual above tolerance, seed {args.seed}'}")
    return EXIT_FAILED if failed else EXIT_OK


def cmd_cliques(args) -> int:
    gi = _load_graph(args)
    cliques = enumerate_cliques(gi.graph, args.k)
    payload = {"k": args.k, "count": len(cliques), "cliques": [list(c) for c in cliques]}
    csv_text = "clique\n" + "".join(" ".join(map(str, c)) + "\n" for c in cliques)
    _emit(args, payload, csv_text)
    return EXIT_OK


def cmd_betti(args) -> int:
    gi = _load_graph(args)
    wg = WeightedGraph(gi.graph, gi.spec)
    top = wg.clique_number() - 1 if args.max_degree is None else args.max_degree
    betti = betti_numbers(wg, max(top, 0))
    payload = {"betti": betti}
    csv_text = "degree,betti\n" + "".join(f"{r},{b}\n" for r, b in enumerate(betti))
    _emit(args, payload, csv_text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graph-dtn", description="Forms, DtN maps and eigenvalue bounds on graphs with boundary.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, graph_input=True):
        sp.add_argument("--input", help="input JSON file")
        if graph_input:
            sp.add_argument("--adjacency-matrix", help="text file with a symmetric weighted adjacency matrix")
            sp.add_argument("--interior", help="comma separated interior vertex ids (overrides the input)")
        sp.add_argument(
            "--adjacency",
            choices=("lattice", "tessellation"),
            help="read --input as a set of points in Z^n and build the subgraph",
        )
        sp.add_argument("--n", type=int, help="lattice dimension when the input does not state it")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", "-o", help="output file (default stdout)")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("spectrum", help="spectrum of a DtN operator")
    common(sp)
    sp.add_argument("--operator", choices=("delta-d", "d-delta", "full"), default="full")
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-9, help="relative kernel threshold")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("verify", help="check an eigenvalue-sum bound on a subset of Z^n")
    common(sp, graph_input=False)
    sp.add_argument("--theorem", choices=THEOREMS)
    sp.add_argument("--k", type=int)
    sp.add_argument("--tol", dest="slack_tol", type=float, default=1e-9, help="allowed negative slack")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("selftest", help="randomized property suites")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=int, default=20)
    sp.add_argument("--mutate-d", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_selftest)

    sp = sub.add_parser("cliques", help="list the k-cliques of a graph")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(func=cmd_cliques)

    sp = sub.add_parser("betti", help="Betti numbers of the clique complex")
    common(sp)
    sp.add_argument("--max-degree", type=int)
    sp.set_defaults(func=cmd_betti)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "k", None) is not None and args.k < 0:
        print("error: --k must be nonnegative", file=sys.stderr)
        return EXIT_INPUT
    tol = getattr(args, "tol", None)
    if tol is not None and tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (gio.InputError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
