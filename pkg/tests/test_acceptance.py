"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or as a script.
"""
from __future__ import annotations

import json
import resource
import time
from fractions import Fraction

import networkx as nx
import pytest

from stablereg.cli import main as cli_main
from stablereg.excellence import ExcellenceOracle, FamilyScanner, WitnessFamily, excellent_wrt, is_good
from stablereg.generators import (TREE_EXAMPLE_IDS, complete_multipartite, erdos_renyi, half_graph, oracle_corpus,
                                  random_clique_sizes, rng_for, special_tree_example, union_of_cliques)
from stablereg.graph import Graph, VertexSet
from stablereg.params import make_params, theorem_bound
from stablereg.partition import (DepthCapExceeded, PipelineError, admissible_cap, extract_excellent_unsized,
                                 stable_partition)
from stablereg.regularity import brute_force_regular, pair_uniformity, verify_partition, zeta_exact
from stablereg.witness import (empirical_tree_bound, find_half_graph, find_special_tree, max_half_graph_length,
                               sauer_check, vc_dimension, verify_special_tree)

from oracles import adjacency, regular

F = Fraction
RESULTS: dict[str, str] = {}
CLIQUES_SEED = 2024


def report(criterion: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    RESULTS[criterion] = line
    print(line)


def _dump(payload) -> str:
    return json.dumps(payload, separators=(",", ":"))


@pytest.fixture(scope="module")
def cliques_graph():
    return union_of_cliques(random_clique_sizes(30000, CLIQUES_SEED))


@pytest.fixture(scope="module")
def cliques_run(cliques_graph):
    start = time.perf_counter()
    partition, rep = stable_partition(cliques_graph, F(1, 5), "auto", seed=1)
    wall = time.perf_counter() - start
    return partition, rep, wall


def test_c1_worked_example():
    start = time.perf_counter()
    G = special_tree_example()
    ids = TREE_EXAMPLE_IDS
    edges = [("b", "a11"), ("b", "a10"), ("b1", "a11"), ("b0", "a01")]
    non_edges = [("b", "a00"), ("b", "a01"), ("b1", "a10"), ("b0", "a00")]
    constraints = all(G.adjacent(ids[u], ids[v]) for u, v in edges) and not any(
        G.adjacent(ids[u], ids[v]) for u, v in non_edges)
    exact = G.edge_count == len(edges)
    found = find_special_tree(G, 2)
    witness_ok = found.found and verify_special_tree(G, found.witness)
    cut = {ids["b1"], ids["a11"]}
    H = Graph.from_edges(G.n, [e for e in G.edges() if set(e) != cut])
    after = find_special_tree(H, 2)
    elapsed = time.perf_counter() - start
    # golden: the enumeration oracle in tests/oracles.py finds no height-2 tree once this edge is gone
    ok = constraints and exact and witness_ok and after.absent and elapsed < 1
    report("C1 worked example", ok,
           f"8 constraints={constraints and exact}, h=2 {found.status} (verified={witness_ok}), "
           f"after removing (b_1,a_11): {after.status} (golden CertifiedAbsent), {elapsed * 1000:.1f} ms")
    assert ok


def test_c2_half_graph_exactness():
    start = time.perf_counter()
    rows = []
    ok = True
    for k in range(1, 7):
        prof = max_half_graph_length(half_graph(k), k + 1)
        nxt = prof.outcomes.get(k + 1)
        good = prof.length == k and nxt is not None and nxt.absent
        ok &= good
        rows.append(f"k={k}:{prof.length}/{nxt.status if nxt else None}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10
    report("C2 half-graph exactness", ok, f"{', '.join(rows)}; {elapsed:.2f} s")
    assert ok


def test_c3_tree_half_graph_consistency():
    start = time.perf_counter()
    violations = checked = tree_free = 0
    for g in nx.graph_atlas_g():
        n = g.number_of_nodes()
        if n == 0:
            continue
        G = Graph.from_edges(n, g.edges())
        for h in (1, 2):
            for distinct in (True, False):
                checked += 1
                if find_special_tree(G, h, distinct=distinct).absent:
                    tree_free += 1
                    if not find_half_graph(G, 2 ** (h + 1)).absent:
                        violations += 1
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 300
    report("C3 tree/half-graph consistency", ok,
           f"{checked} (graph, h, convention) checks over the n<=7 atlas, {tree_free} tree-free, "
           f"{violations} violations, {elapsed:.1f} s")
    assert ok


def _all_sets(n: int) -> list[VertexSet]:
    return [VertexSet(m) for m in range(1, 1 << n)]


def test_c4_excellence_oracle_suite():
    start = time.perf_counter()
    corpus = oracle_corpus()
    v_good = v_agree = v_size = 0
    n_excellent = n_agree = n_size = 0
    for gi, (name, G) in enumerate(corpus):
        for eps in (F(1, 5), F(3, 10), F(2, 5)):
            oracle = ExcellenceOracle(G, eps)
            # (i) exact excellence implies goodness, over every nonempty A
            for A in _all_sets(G.n):
                if oracle.verdict(A).excellent:
                    n_excellent += 1
                    if not is_good(G, A, eps)[0]:
                        v_good += 1
            # (ii) per-witness agreement on sampled A against every good B
            rng = rng_for(gi, 40, eps.numerator, eps.denominator)
            masks = rng.integers(1, 1 << G.n, size=6)
            for m in masks.tolist():
                A = VertexSet(int(m))
                for bmask, ok in oracle.per_witness(A).items():
                    n_agree += 1
                    if excellent_wrt(G, A, VertexSet(bmask), eps).excellent != ok:
                        v_agree += 1
            # (iii) size law with the loose tree bound and an exhaustive witness family
            cap = admissible_cap(eps)
            tb = empirical_tree_bound(G, cap, distinct=False)
            if tb.t is None:
                continue
            t = tb.t
            scanner = FamilyScanner(G)
            family = WitnessFamily(explicit=tuple(VertexSet(int(b)) for b in oracle.good_masks),
                                   singletons=False, samples_per_size=0)
            for A in _all_sets(G.n):
                if len(A) * eps**t < 1:
                    continue
                n_size += 1
                try:
                    ex = extract_excellent_unsized(G, A, eps, t, family, scanner=scanner)
                except DepthCapExceeded:
                    v_size += 1
                    continue
                if len(ex.piece) < eps ** (t - 1) * len(A) or not oracle.verdict(ex.piece).excellent:
                    v_size += 1
    elapsed = time.perf_counter() - start
    ok = v_good == v_agree == v_size == 0
    report("C4 excellence oracle suite", ok,
           f"{len(corpus)} graphs x 3 eps: (i) {v_good}/{n_excellent} excellent sets not good, "
           f"(ii) {v_agree}/{n_agree} per-witness disagreements, "
           f"(iii) {v_size}/{n_size} size-law violations; {elapsed:.1f} s")
    assert ok


def test_c5_sauer_and_vc():
    start = time.perf_counter()
    graphs = [
        ("cliques", union_of_cliques(random_clique_sizes(60, 5, low=3, high=12))),
        ("multipartite", complete_multipartite(random_clique_sizes(60, 6, low=3, high=12))),
    ]
    stable = all(find_half_graph(G, 3).absent for _, G in graphs)
    sauer_bad = vc_bad = samples = 0
    worst_vc = 0
    for gi, (_, G) in enumerate(graphs):
        rng = rng_for(77, gi)
        for _ in range(500):
            size = int(rng.integers(1, 15))
            A = VertexSet.of(rng.choice(G.n, size=size, replace=False).tolist())
            samples += 1
            if not sauer_check(G, A, 3):
                sauer_bad += 1
            d = vc_dimension(G, A, cap=5)
            worst_vc = max(worst_vc, d)
            if d > 4:
                vc_bad += 1
    elapsed = time.perf_counter() - start
    ok = stable and sauer_bad == vc_bad == 0 and elapsed < 120
    report("C5 Sauer-Shelah / VC", ok,
           f"3-edge-stable={stable}, {samples} sampled A: {sauer_bad} Sauer violations, "
           f"{vc_bad} with VC > 4 (max VC {worst_vc}); {elapsed:.1f} s")
    assert ok


def _partition_checks(G: Graph, rep, eps: Fraction) -> tuple[bool, str]:
    sizes = [len(P) for P in rep.pieces]
    exact, _ = theorem_bound(eps, 2)
    extreme = rep.extreme_failures == 0
    ok = (rep.params["t"] == 2 and rep.params["c"] == 37 and rep.sizes == [740, 37]
          and max(sizes) - min(sizes) <= 1 and not rep.failing_pairs and extreme
          and len(rep.pieces) <= exact and rep.passed)
    detail = (f"t={rep.params['t']}, c={rep.params['c']}, sizes={tuple(rep.sizes)}, "
              f"{len(rep.pieces)} pieces (bound {exact}), spread {max(sizes) - min(sizes)}, "
              f"{len(rep.failing_pairs)}/{len(rep.pairs)} failing pairs, extreme densities={extreme}")
    return ok, detail


def test_c6_cliques_end_to_end(cliques_graph, cliques_run):
    _, rep, wall = cliques_run
    ok, detail = _partition_checks(cliques_graph, rep, F(1, 5))
    peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    params, sizes = make_params(cliques_graph.n, F(1, 5), 2)
    ok = ok and (params.c, sizes.sizes) == (37, (740, 37)) and wall < 300 and peak_mb < 1024
    report("C6 30k cliques end-to-end", ok,
           f"{detail}; {wall:.1f} s, peak RSS of the test process {peak_mb:.0f} MB")
    assert ok


def test_c7_uniform_pairs_are_regular():
    start = time.perf_counter()
    per_eps = {}
    ok = True
    for eps in (F(1, 50), F(1, 8)):
        zeta = zeta_exact(eps)
        pairs, failures, seen, oracle_checked = 0, 0, set(), 0
        for gi, (name, G) in enumerate(oracle_corpus()):
            rng = rng_for(gi, 70)
            for trial in range(12):
                k = int(rng.integers(2, 4))
                order = rng.permutation(G.n)
                pieces = [VertexSet.of(order[i::k].tolist()) for i in range(k) if order[i::k].size]
                if len(pieces) < 2:
                    continue
                rep = verify_partition(G, pieces, eps)
                for rec in rep.pairs:
                    A, B = rep.pieces[rec.i], rep.pieces[rec.j]
                    key = (gi, A.mask, B.mask)
                    if not rec.uniform or key in seen or pairs >= 500:
                        continue
                    seen.add(key)
                    pairs += 1
                    assert pair_uniformity(G, A, B, eps).passed
                    good = brute_force_regular(G, A, B, zeta)[0]
                    if oracle_checked < 100:
                        oracle_checked += 1
                        assert good == regular(adjacency(G), A.to_list(), B.to_list(), zeta)
                    failures += not good
        per_eps[eps] = (pairs, failures)
        ok &= pairs == 500 and failures == 0
    elapsed = time.perf_counter() - start
    detail = "; ".join(f"eps={e}: {p} certified pairs, {f} not regular at zeta={zeta_exact(e)}"
                       for e, (p, f) in per_eps.items())
    report("C7 uniformity => regularity", ok, f"{detail}; {elapsed:.1f} s")
    assert ok


def test_c8_negative_control():
    start = time.perf_counter()
    G = erdos_renyi(2000, F(1, 2), 3)
    hg = find_half_graph(G, 5)
    try:
        stable_partition(G, F(1, 5), "auto")
        code, message = 0, "pipeline accepted an unstable graph"
    except PipelineError as exc:
        code, message = exc.exit_code, str(exc)
    elapsed = time.perf_counter() - start
    ok = hg.found and code in (2, 3) and "witness" in message
    report("C8 negative control", ok,
           f"half-graph k=5 {hg.status}; auto partition exit {code}: {message[:110]}...; {elapsed:.1f} s")
    assert ok


def test_c9_determinism(cliques_graph, cliques_run, tmp_path):
    _, rep, _ = cliques_run
    first = _dump(rep.verdict_json())
    _, rerun = stable_partition(cliques_graph, F(1, 5), "auto", seed=1)
    same = _dump(rerun.verdict_json()) == first
    _, other = stable_partition(cliques_graph, F(1, 5), "auto", seed=2)
    other_ok, detail = _partition_checks(cliques_graph, other, F(1, 5))
    differs = [P.mask for P in other.pieces] != [P.mask for P in rep.pieces]
    ok = same and other_ok
    report("C9 determinism", ok,
           f"seed 1 rerun byte-identical verdict={same} ({len(first) / 1e6:.1f} MB); "
           f"seed 2 partition differs={differs}, passes={other_ok} ({detail})")
    assert ok


def test_cli_bench_cliques_row(capsys):
    # the cliques-30k bench scenario is the same workload driven through the CLI
    code = cli_main(["bench", "--suite", "cliques-30k"])
    out = capsys.readouterr().out.strip().splitlines()
    assert code == 0 and len(out) == 2
    row = dict(zip(out[0].split(","), out[1].split(",")))
    assert row["pairs_failed"] == "0" and row["t"] == "2" and row["n"] == "30000"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
