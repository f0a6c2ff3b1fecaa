"""Command line front-end (``pfgame``)."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .decide import (CertificateError, certify_disjoint_dominions, decide_existence,
                     decide_tensor_pattern, decide_uniqueness, second_eigenvector)
from .dsl import ParseError, load_operator, load_tensor
from .expr import ExprError, format_operator, recession, signature
from .games import AT_INFINITY, LocalAt, build_digraph, build_hypergraph
from .hypergraph import final_classes, to_dot
from .numerics import NonConvergence, SolveConfig, mean_payoff, solve_ergodic, tensor_eigenpair
from .tensor import tensor_to_operator

SCHEMA = "pfgame/1"
EXIT_OK, EXIT_INPUT, EXIT_UNDETERMINED = 0, 1, 2


class InputError(Exception):
    pass


def _vector(text: str, n: int) -> np.ndarray:
    try:
        vals = [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise InputError(f"cannot read vector {text!r}")
    if len(vals) != n:
        raise InputError(f"vector {text!r} has {len(vals)} entries, expected {n}")
    return np.array(vals)


def _one_based(s) -> list[int]:
    return sorted(i + 1 for i in s)


def _fmt_set(s) -> str:
    return "{" + ",".join(str(i) for i in _one_based(s)) + "}"


def _cfg(args) -> SolveConfig:
    return SolveConfig(tol=args.tol, max_iters=args.max_iters)


def _x0(args, n: int):
    if args.seed is None:
        return None
    return np.random.default_rng(args.seed).normal(size=n)


def _say_report(report) -> None:
    if report.disjoint:
        print(f"verdict: DisjointDominions I={_fmt_set(report.I)} J={_fmt_set(report.J)}")
    else:
        print("verdict: NoDisjointDominions")
    print(f"path: {report.path}, oracle calls: {report.oracle_calls}")


def cmd_decide_existence(args, out: dict) -> int:
    op = load_operator(args.file)
    report = decide_existence(op, threads=args.threads)
    out["report"] = report.to_dict()
    _say_report(report)
    if report.disjoint:
        cert = certify_disjoint_dominions(op, report)
        out["certificate"] = cert.to_dict()
        print(f"certificate: alpha={cert.alpha:g} beta={cert.beta:g} s={cert.s:g} "
              f"verified={cert.verified}")
    else:
        print("every slice space is bounded: g + T has an eigenvector for every g")
    return EXIT_OK


def cmd_decide_uniqueness(args, out: dict) -> int:
    op = load_operator(args.file)
    if args.solve:
        try:
            w = solve_ergodic(op, _x0(args, op.n), _cfg(args))
        except NonConvergence as exc:
            out["error"] = str(exc)
            print(f"undetermined: {exc}")
            return EXIT_UNDETERMINED
        u = w.u
        out["eigenvector"] = w.to_dict()
    else:
        u = _vector(args.at, op.n)
    report = decide_uniqueness(op, u, threads=args.threads)
    out["report"] = report.to_dict()
    _say_report(report)
    if not report.disjoint:
        print("u is the unique eigenvector up to an additive constant")
        return EXIT_OK
    try:
        v = second_eigenvector(op, u, report.I, report.J)
    except NonConvergence as exc:
        out["second_eigenvector"] = {"error": str(exc)}
        print(f"second eigenvector: not constructed ({exc})")
        return EXIT_UNDETERMINED
    out["second_eigenvector"] = [float(t) for t in v]
    print("second eigenvector: (" + ", ".join(f"{t:.12g}" for t in v) + ")")
    return EXIT_OK


def cmd_solve(args, out: dict) -> int:
    op = load_operator(args.file)
    try:
        w = solve_ergodic(op, _x0(args, op.n), _cfg(args))
    except NonConvergence as exc:
        out["error"] = str(exc)
        print(f"undetermined: {exc}")
        return EXIT_UNDETERMINED
    out["eigenvector"] = w.to_dict()
    print(f"eigenvalue: {w.eigenvalue:.12g}")
    print("u: (" + ", ".join(f"{t:.12g}" for t in w.u) + ")")
    print(f"residual: {w.residual:.3g} after {w.iterations} iterations")
    return EXIT_OK


def cmd_mean_payoff(args, out: dict) -> int:
    op = load_operator(args.file)
    if args.k < 1:
        raise InputError("--k must be at least 1")
    mp = mean_payoff(op, args.k)
    out["k"] = args.k
    out["mean_payoff"] = [float(t) for t in mp]
    print("T^k(0)/k: (" + ", ".join(f"{t:.12g}" for t in mp) + ")")
    return EXIT_OK


def cmd_signature(args, out: dict) -> int:
    text = format_operator(signature(load_operator(args.file)))
    out["operator"] = text
    sys.stdout.write(text)
    return EXIT_OK


def cmd_recession(args, out: dict) -> int:
    text = format_operator(recession(load_operator(args.file)))
    out["operator"] = text
    sys.stdout.write(text)
    return EXIT_OK


_GRAPHS = {"hplus": (False, 1), "hminus": (False, -1), "ginf": (False, 0),
           "hu-plus": (True, 1), "hu-minus": (True, -1), "gu": (True, 0)}


def cmd_export(args, out: dict) -> int:
    op = load_operator(args.file)
    local, sign = _GRAPHS[args.graph]
    if local and args.at is None:
        raise InputError(f"--graph {args.graph} needs --at")
    game = LocalAt(tuple(_vector(args.at, op.n).tolist())) if local else AT_INFINITY
    if sign == 0:
        graph = build_digraph(op, game)
        out["graph"] = {"n": graph.n, "arcs": [[i + 1, j + 1] for i, j in graph.arcs]}
    else:
        graph = build_hypergraph(op, game, sign, materialize=True)
        if args.minimal:
            graph = graph.minimal()
        out["graph"] = graph.to_json()
    dot = to_dot(graph, minimal=args.minimal, name=args.graph)
    Path(args.dot).write_text(dot, encoding="utf-8")
    print(f"wrote {args.dot}")
    return EXIT_OK


def cmd_tensor_decide(args, out: dict) -> int:
    F = load_tensor(args.file)
    report = decide_tensor_pattern(F.pattern)
    from .games import tensor_digraph

    finals = final_classes(tensor_digraph(F.pattern))
    out["report"] = report.to_dict()
    out["final_classes"] = [_one_based(c) for c in finals]
    print("final classes: " + ", ".join(_fmt_set(c) for c in finals))
    answer = "NO" if report.disjoint else "YES"
    print(f"positive eigenvector for every positive instance: {answer}")
    if report.disjoint:
        print(f"witness: I={_fmt_set(report.I)} J={_fmt_set(report.J)}")
    out["every_instance"] = not report.disjoint
    return EXIT_OK


def cmd_tensor_solve(args, out: dict) -> int:
    F = load_tensor(args.file)
    try:
        pair = tensor_eigenpair(F, _cfg(args))
    except NonConvergence as exc:
        out["error"] = str(exc)
        print(f"undetermined: {exc}")
        return EXIT_UNDETERMINED
    out["eigenpair"] = pair.to_dict()
    print(f"eigenvalue: {pair.eigenvalue:.12g}")
    print("u: (" + ", ".join(f"{t:.12g}" for t in pair.u) + ")")
    print(f"relative residual: {pair.residual:.3g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="OUT", help="write a JSON report to OUT")
    common.add_argument("--tol", type=float, default=1e-10, help="solver stopping tolerance")
    common.add_argument("--max-iters", type=int, default=100_000)
    common.add_argument("--seed", type=int, default=None, help="seed for random initial points")
    common.add_argument("--threads", type=int, default=1, help="workers for subset enumeration")

    p = argparse.ArgumentParser(prog="pfgame", parents=[common],
                                description="Eigenvector existence and uniqueness for "
                                            "monotone additively homogeneous maps.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("file")
        sp.set_defaults(func=fn)
        return sp

    add("decide-existence", cmd_decide_existence, "bounded slice spaces / disjoint dominions")
    sp = add("decide-uniqueness", cmd_decide_uniqueness, "uniqueness of an eigenvector")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--at", metavar="VEC", help="comma-separated eigenvector")
    g.add_argument("--solve", action="store_true", help="compute an eigenvector first")
    add("solve", cmd_solve, "solve the ergodic equation")
    sp = add("mean-payoff", cmd_mean_payoff, "T^k(0)/k")
    sp.add_argument("--k", type=int, required=True)
    add("signature", cmd_signature, "signature of a generalized-means operator")
    add("recession", cmd_recession, "recession operator")
    sp = add("export", cmd_export, "write a hypergraph or digraph as DOT")
    sp.add_argument("--graph", choices=sorted(_GRAPHS), required=True)
    sp.add_argument("--at", metavar="VEC")
    sp.add_argument("--minimal", action="store_true", help="keep minimal tails only")
    sp.add_argument("--dot", metavar="OUT", required=True)
    add("tensor-decide", cmd_tensor_decide, "pattern test for positive tensor eigenvectors")
    add("tensor-solve", cmd_tensor_solve, "positive tensor eigenpair")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = {"schema": SCHEMA, "command": args.command, "input": args.file}
    try:
        code = args.func(args, out)
    except (ParseError, ExprError, InputError, CertificateError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonConvergence as exc:
        print(f"undetermined: {exc}", file=sys.stderr)
        out["error"] = str(exc)
        code = EXIT_UNDETERMINED
    if args.json:
        out["exit_code"] = code
        out["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        Path(args.json).write_text(json.dumps(out, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
