"""Command-line entry point: ``stablereg <subcommand> ...``.

Exit codes: 0 success or passing verdict, 1 failing verdict, 2 bad input or
parameters, 3 search budget exhausted.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction
from typing import Sequence

from .excellence import ExcellenceOracle, FamilyScanner, WitnessFamily, is_good
from .generators import FAMILIES, FamilySpec, oracle_corpus, random_clique_sizes, union_of_cliques
from .graph import EdgeListError, Graph, VertexSet, dump_edge_list, read_graph, write_graph
from .params import ParameterError
from .partition import DepthCapExceeded, PipelineError, admissible_cap, descend, stable_partition
from .regularity import ImplementationError, verify_partition
from .witness import DEFAULT_BUDGET, empirical_tree_bound, find_half_graph, max_half_graph_length

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
BENCH_SUITES = ("cliques-30k", "oracle-corpus")
BENCH_FIELDS = ("scenario", "n", "eps", "t", "pieces", "pairs_failed", "wall_ms")


class UsageError(Exception):
    pass


def parse_epsilon(text: str) -> Fraction:
    """Exact rational from ``"1/5"`` or a finite decimal such as ``"0.2"``."""
    try:
        eps = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from None
    if not 0 < eps < Fraction(1, 2):
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 1/2), got {eps}")
    return eps


def parse_tree_bound(text: str):
    if text == "auto":
        return "auto"
    if text.startswith("from-k:"):
        return ("from-k", _positive(text.split(":", 1)[1]))
    return _positive(text)


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def read_partition(text: str) -> list[VertexSet]:
    """One piece per non-empty line, vertex ids separated by whitespace."""
    pieces = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            pieces.append(VertexSet.of(int(x) for x in line.split()))
        except ValueError:
            raise UsageError(f"partition line {lineno}: non-integer vertex id") from None
    return pieces


def dump_partition(pieces: Sequence[VertexSet]) -> str:
    return "".join(" ".join(map(str, p.to_list())) + "\n" for p in pieces)


def _emit(payload, out: str | None, compact: bool = False) -> None:
    text = (json.dumps(payload, separators=(",", ":")) if compact else json.dumps(payload, indent=1)) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _set_arg(G: Graph, text: str | None) -> VertexSet:
    if text is None:
        return G.vertices()
    A = VertexSet.of(_int_list(text))
    G.check_set(A)
    return A


# -- subcommands -----------------------------------------------------------


def cmd_gen(args) -> int:
    base = None
    if args.family == "planted":
        base = FamilySpec("cliques", sizes=args.sizes) if args.sizes else None
    spec = FamilySpec(args.family, k=args.k, sizes=args.sizes or (), n=args.n, p=args.p,
                      seed=args.seed, base=base)
    G = spec.build()
    if args.out:
        write_graph(G, args.out)
    else:
        sys.stdout.write(dump_edge_list(G))
    return EXIT_OK


def cmd_stability(args) -> int:
    G = read_graph(args.input)
    if args.k is not None:
        out = find_half_graph(G, args.k, args.budget)
        _emit({**out.to_json(), "k": args.k}, args.out)
        return EXIT_BUDGET if out.inconclusive else EXIT_OK
    prof = max_half_graph_length(G, args.max_length, args.budget)
    levels = {str(k): o.to_json() for k, o in prof.outcomes.items()}
    _emit({"max_length": prof.length, "levels": levels}, args.out)
    return EXIT_BUDGET if any(o.inconclusive for o in prof.outcomes.values()) else EXIT_OK


def cmd_treebound(args) -> int:
    G = read_graph(args.input)
    tb = empirical_tree_bound(G, args.max_height, args.budget)
    _emit({**tb.to_json(), "max_height": args.max_height}, args.out)
    if tb.t is not None:
        return EXIT_OK
    return EXIT_BUDGET if tb.outcome.inconclusive else EXIT_FAIL


def cmd_partition(args) -> int:
    G = read_graph(args.input)
    family = WitnessFamily(samples_per_size=args.samples)
    try:
        partition, report = stable_partition(G, args.epsilon, args.tree_bound, args.seed,
                                             args.max_retries, args.budget, family)
    except PipelineError as exc:
        _emit({"verdict": {"pass": False, "error": {"stage": exc.stage, "message": str(exc),
                                                     **exc.payload}}}, args.out)
        print(str(exc), file=sys.stderr)
        return exc.exit_code
    _emit(report.to_json(), args.out, compact=True)
    if args.pieces_out:
        with open(args.pieces_out, "w", encoding="utf-8") as fh:
            fh.write(dump_partition(report.pieces))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    G = read_graph(args.input)
    with open(args.partition, encoding="utf-8") as fh:
        pieces = read_partition(fh.read())
    try:
        report = verify_partition(G, pieces, args.epsilon)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(report.to_json(), args.out, compact=True)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_oracle(args) -> int:
    G = read_graph(args.input)
    A = _set_arg(G, args.set)
    if not A:
        raise UsageError("set must be nonempty")
    good, bad = is_good(G, A, args.epsilon)
    payload = {"set": A.to_list(), "eps": str(args.epsilon), "good": good, "unbalanced_vertex": bad}
    ok = good
    if args.mode == "excellent":
        try:
            verdict = ExcellenceOracle(G, args.epsilon).verdict(A)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        payload["excellence"] = verdict.to_json()
        ok = verdict.excellent
    _emit(payload, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def _peel_excellent(G: Graph, eps: Fraction, t: int) -> list[VertexSet]:
    """Cover a small graph by sets with no family split witness (no size targets)."""
    scanner = FamilyScanner(G)
    pool = G.vertices()
    pieces: list[VertexSet] = []
    while pool:
        try:
            ex = descend(G, pool, eps, t, scanner, WitnessFamily().with_explicit(pieces))
            piece = ex.piece
        except DepthCapExceeded:
            piece = VertexSet(1 << pool.min())
        pieces.append(piece)
        pool = pool - piece
    return pieces


def bench_rows(suite: str, seed: int = 1) -> list[dict]:
    rows = []
    if suite == "cliques-30k":
        G = union_of_cliques(random_clique_sizes(30000, seed))
        eps = Fraction(1, 5)
        start = time.perf_counter()
        _, report = stable_partition(G, eps, "auto", seed)
        rows.append({"scenario": "cliques-30k", "n": G.n, "eps": str(eps), "t": report.params["t"],
                     "pieces": len(report.pieces), "pairs_failed": len(report.failing_pairs),
                     "wall_ms": round((time.perf_counter() - start) * 1000)})
    elif suite == "oracle-corpus":
        eps = Fraction(1, 5)
        cap = admissible_cap(eps)
        for name, G in oracle_corpus():
            start = time.perf_counter()
            tb = empirical_tree_bound(G, cap)
            t = tb.t or cap
            pieces = _peel_excellent(G, eps, t)
            report = verify_partition(G, pieces, eps)
            rows.append({"scenario": name, "n": G.n, "eps": str(eps), "t": tb.t if tb.t else "",
                         "pieces": len(pieces), "pairs_failed": len(report.failing_pairs),
                         "wall_ms": round((time.perf_counter() - start) * 1000)})
    else:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(BENCH_SUITES)}")
    return rows


def cmd_bench(args) -> int:
    rows = bench_rows(args.suite, args.seed)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stablereg", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=_positive, default=1,
                        help="worker cap (the current kernels are single-threaded)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_input=True):
        if need_input:
            p.add_argument("--input", required=True, help="edge-list file")
        p.add_argument("--out", help="write output here instead of stdout")

    g = sub.add_parser("gen", help="write a generated graph as an edge list")
    g.add_argument("--family", required=True, choices=FAMILIES)
    g.add_argument("--k", type=_positive)
    g.add_argument("--sizes", type=_int_list)
    g.add_argument("--n", type=_positive)
    g.add_argument("--p", type=Fraction, default=Fraction(1, 2))
    g.add_argument("--seed", type=_u64, default=0)
    common(g, need_input=False)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("stability", help="half-graph search")
    common(s)
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--k", type=_positive, help="search for a half-graph of this length")
    grp.add_argument("--max-length", type=_positive, help="largest length up to this cap")
    s.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    s.set_defaults(func=cmd_stability)

    tb = sub.add_parser("treebound", help="certify a special-tree height bound")
    common(tb)
    tb.add_argument("--max-height", type=_positive, required=True)
    tb.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    tb.set_defaults(func=cmd_treebound)

    p = sub.add_parser("partition", help="run the excellent-partition pipeline")
    common(p)
    p.add_argument("--epsilon", type=parse_epsilon, required=True)
    p.add_argument("--tree-bound", type=parse_tree_bound, default="auto")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--max-retries", type=int, default=20)
    p.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    p.add_argument("--samples", type=int, default=64, help="sampled witnesses per size")
    p.add_argument("--pieces-out", help="also write the pieces, one per line")
    p.set_defaults(func=cmd_partition)

    v = sub.add_parser("verify", help="certify a given partition")
    common(v)
    v.add_argument("--partition", required=True)
    v.add_argument("--epsilon", type=parse_epsilon, required=True)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exact goodness / excellence of a set (n <= 16)")
    common(o)
    o.add_argument("--epsilon", type=parse_epsilon, required=True)
    o.add_argument("--set", help="comma-separated vertex ids (default: all)")
    o.add_argument("--mode", choices=("good", "excellent"), default="excellent")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="benchmark suites as CSV")
    b.add_argument("--suite", required=True, choices=BENCH_SUITES)
    b.add_argument("--seed", type=_u64, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, EdgeListError, ParameterError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ImplementationError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
