"""Command line entry point.

Exit codes: 0 success, 1 embedding or verification failure, 2 usage or
input error, 3 internal assertion failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from .errors import ContractViolation, EmbeddingFailure, FormatError, GraphInvariantError, PreconditionError
from .formats import read_graph, write_graph
from .graph import EXTREMAL_KINDS, generate_extremal
from .report import Config, default_seed, dumps
from .trees import RootedTree, enumerate_trees

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class _Usage(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("expected a positive value")
    return value


def _config(args) -> Config:
    kw = {"seed": args.seed, "budget": args.budget, "strict": getattr(args, "strict", False)}
    for name in ("eps", "eta", "delta", "nu", "rho"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return Config(**kw)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None


def _emit(report: dict, args, started: float) -> None:
    if args.timing:
        report["runtime"] = round(time.perf_counter() - started, 3)
    text = dumps(report)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------

def cmd_embed(args) -> int:
    from .dense import embed_dispatch

    started = time.perf_counter()
    G = read_graph(_read(args.graph), args.format)
    cfg = _config(args)
    if args.tree:
        trees = [RootedTree.from_text(line) for line in _read(args.tree).splitlines() if line.strip()]
        k = args.k if args.k is not None else trees[0].k
        if any(T.k != k for T in trees):
            raise _Usage(f"every tree must have k = {k} edges")
        Delta = args.Delta if args.Delta is not None else max(T.max_degree() for T in trees)
    else:
        if args.k is None or args.Delta is None:
            raise _Usage("without --tree both --k and --Delta are required")
        k, Delta = args.k, args.Delta
        trees = list(enumerate_trees(k, Delta))
    report = embed_dispatch(G, k, Delta, cfg, trees=trees, workers=args.workers)
    if not args.emit_certificate:
        for r in report["results"]:
            r.pop("mapping", None)
    report.update({"command": "embed", "config": cfg.to_dict()})
    _emit(report, args, started)
    return EXIT_OK if report["all_ok"] else EXIT_FAIL


def cmd_verify(args) -> int:
    from .oracle import pipeline_consistency, verify_erdos_sos

    started = time.perf_counter()
    if args.corpus:
        report = verify_erdos_sos(source="graph6-corpus", corpus=_read(args.corpus).splitlines(),
                                  workers=args.workers)
    else:
        report = verify_erdos_sos(args.nmax, workers=args.workers)
    report.pop("runtime", None)
    if args.consistency:
        report["consistency"] = pipeline_consistency(args.nmax, _config(args), workers=args.workers)
    report["command"] = "verify"
    _emit(report, args, started)
    bad = report["counterexamples"] or report.get("consistency", {}).get("discrepancies")
    return EXIT_FAIL if bad else EXIT_OK


def _parts(text: str | None):
    out = []
    for item in (text or "").split(","):
        if not item.strip():
            continue
        try:
            kind, k = item.split(":")
            out.append((kind.strip(), int(k)))
        except ValueError:
            raise _Usage(f"bad part {item!r}; expected kind:k") from None
    return out


def cmd_gen(args) -> int:
    G = generate_extremal(args.kind, args.k, _parts(args.parts))
    sys.stdout.write(write_graph(G, args.format))
    return EXIT_OK


def cmd_partition(args) -> int:
    from .regularity import build_reduced, refine_partition

    started = time.perf_counter()
    G = read_graph(_read(args.graph), args.format)
    cfg = _config(args)
    G1, P = refine_partition(G, cfg.eps, cfg.eta, max_clusters=cfg.max_clusters, seed=cfg.seed,
                             trials=cfg.trials, bound=cfg.exhaustive_bound, enforce=cfg.strict)
    R = build_reduced(P)
    report = {"command": "partition", "config": cfg.to_dict(), "n": G.n, "partition": P.report,
              "reduced": {"clusters": R.graph.n, "edges": R.graph.edge_count,
                          "components": len(R.graph.components()),
                          "bipartite": R.graph.two_colouring() is not None}}
    if args.emit_certificate:
        report["certificate"] = {"clusters": [[G1.labels[v] for v in c] for c in P.clusters],
                                 "exceptional": [G1.labels[v] for v in P.exceptional]}
    _emit(report, args, started)
    return EXIT_OK


def cmd_ramsey(args) -> int:
    from .oracle import ramsey_sample_check

    started = time.perf_counter()
    report = ramsey_sample_check(args.ell, args.k, args.Delta, args.samples, args.seed)
    if not args.emit_certificate:
        report.pop("rows")
    report["command"] = "ramsey"
    _emit(report, args, started)
    return EXIT_FAIL if report["failures"] else EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    started = time.perf_counter()
    report = run_selftest(args.instances, args.seed)
    report["command"] = "selftest"
    _emit(report, args, started)
    return EXIT_OK if report["all_ok"] else EXIT_FAIL


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=default_seed(),
                        help="random seed (default: $TREESOS_SEED or 0)")
    common.add_argument("--budget", type=int, default=2_000_000, help="node budget of the exact search")
    common.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--timing", action="store_true", help="add wall-clock runtime to the report")
    common.add_argument("--emit-certificate", action="store_true", help="include mappings and partitions")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")

    consts = argparse.ArgumentParser(add_help=False)
    consts.add_argument("--eps", type=_fraction, help="regularity parameter (default 1/20)")
    consts.add_argument("--eta", type=_fraction, help="reduced graph density threshold (default 1/10)")
    consts.add_argument("--delta", type=_fraction, help="degree surplus (default 1/4)")
    consts.add_argument("--nu", type=_fraction, help="near-extremal window (default 1/20)")
    consts.add_argument("--rho", type=_fraction, help="tree degree ratio (default eps^2/(16 ceil(1/eps)^2))")
    consts.add_argument("--strict", action="store_true", help="abort on the first failed hypothesis")

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=["graph6", "edgelist", "auto"], default="auto")

    p = argparse.ArgumentParser(prog="treesos", description="Tree embeddings in dense graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("embed", parents=[common, consts, fmt], help="run the dispatch pipeline")
    e.add_argument("--graph", required=True, help="host graph file ('-' for stdin)")
    e.add_argument("--tree", help="file with one tree per line ('k root p0 ... pk')")
    e.add_argument("--k", type=int)
    e.add_argument("--Delta", type=int)
    e.set_defaults(func=cmd_embed)

    v = sub.add_parser("verify", parents=[common, consts], help="exhaustive small-n sweep")
    v.add_argument("--nmax", type=int, default=8)
    v.add_argument("--corpus", help="graph6 file to sweep instead of the internal enumeration")
    v.add_argument("--consistency", action="store_true", help="also compare the pipeline with the oracle")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen", help="extremal graphs")
    g.add_argument("--kind", choices=EXTREMAL_KINDS, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--parts", help="for disjoint-union-list: comma separated kind:k")
    g.add_argument("--format", choices=["graph6", "edgelist"], default="graph6")
    g.set_defaults(func=cmd_gen)

    pa = sub.add_parser("partition", parents=[common, consts, fmt], help="regular partition report")
    pa.add_argument("--graph", required=True)
    pa.set_defaults(func=cmd_partition)

    r = sub.add_parser("ramsey", parents=[common], help="sampled Ramsey check")
    r.add_argument("--ell", type=int, required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--Delta", type=int, required=True)
    r.add_argument("--samples", type=int, default=100)
    r.set_defaults(func=cmd_ramsey)

    s = sub.add_parser("selftest", parents=[common], help="run the property suites")
    s.add_argument("--instances", type=int, default=200, help="random instances per suite")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (_Usage, FormatError, GraphInvariantError, PreconditionError, ValueError) as exc:
        print(f"treesos: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EmbeddingFailure as exc:
        print(f"treesos: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ContractViolation, AssertionError) as exc:
        print(f"treesos: internal check failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
