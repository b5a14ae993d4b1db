"""Equitable partitions into excellent pieces for graphs with a certified tree bound.

Pipeline: derive constants, cover the graph greedily with excellent sets of
the allowed sizes, split each set at random into pieces of the base size,
spread the leftover vertices round-robin, then certify every pair.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import median
from typing import Any

import numpy as np

from .excellence import FamilyScanner, WitnessFamily
from .generators import rng_for
from .graph import Graph, VertexSet
from .params import ParameterError, PipelineParams, SizeSequence, make_params, stable_regularity_bound, theorem_bound
from .regularity import PartitionReport, verify_partition, zeta_exact
from .witness import (DEFAULT_BUDGET, SpecialTreeWitness, empirical_tree_bound, tree_bound_from_k,
                      verify_special_tree)


class PipelineError(Exception):
    """A stage failed; ``exit_code`` follows the CLI convention (1 property, 2 input, 3 budget)."""

    def __init__(self, stage: str, message: str, exit_code: int = 1, payload: dict | None = None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.exit_code = exit_code
        self.payload = payload or {}


class DepthCapExceeded(PipelineError):
    """Every set at the last allowed level split, which assembles a special tree."""

    def __init__(self, tree: SpecialTreeWitness, valid_distinct: bool, valid_loose: bool):
        kind = ("a verified special tree, contradicting the tree-bound certificate" if valid_distinct
                else "a tree whose leaves coincide with ancestor nodes")
        super().__init__("extract", f"descent reached depth {tree.height}: built {kind}", 1,
                         {"tree": tree.to_json(), "valid_distinct": valid_distinct, "valid_loose": valid_loose})
        self.tree = tree


class RefinementError(PipelineError):
    def __init__(self, piece: VertexSet, witness: VertexSet, attempts: int):
        super().__init__("refine", f"no certified random split after {attempts} attempts "
                         f"(sub-piece of {len(piece)} split by a set of {len(witness)})", 1,
                         {"sub_piece": piece.to_list(), "witness": witness.to_list(), "attempts": attempts})
        self.piece = piece
        self.witness = witness


@dataclass
class Extraction:
    piece: VertexSet
    depth: int
    splits: list[dict] = field(default_factory=list)


def _take(G: Graph, S: VertexSet, k: int) -> VertexSet:
    """First ``k`` members of ``S`` in pool order.

    Pool order ranks twin classes by their size inside ``S`` (largest first,
    ties by smallest member), then vertices by id, so trimmed sets stay as
    homogeneous as ``S`` allows.
    """
    ids = S.indices
    if k > ids.size:
        raise ValueError(f"cannot take {k} from a set of {ids.size}")
    rank = G.twin_rank[ids]
    _, inverse, counts = np.unique(rank, return_inverse=True, return_counts=True)
    order = np.lexsort((ids, rank, -counts[inverse]))
    return VertexSet.of(ids[order[:k]].tolist())


def _start(G: Graph, A: VertexSet, k: int) -> VertexSet:
    """Starting set of size ``k`` for an extraction from ``A``.

    A twin class that fills ``k`` alone gives a homogeneous start.  Otherwise
    the classes are dealt round-robin (largest first), so the start either
    splits into homogeneous children or spreads every class thinly; a start
    that is one class plus a few strays would pass as excellent yet be too
    impure to refine into pieces of size ``c``.
    """
    ids = A.indices
    if k > ids.size:
        raise ValueError(f"cannot take {k} from a set of {ids.size}")
    rank = G.twin_rank[ids]
    _, inverse, counts = np.unique(rank, return_inverse=True, return_counts=True)
    if counts.max() >= k:
        return _take(G, A, k)
    order = np.lexsort((ids, rank))
    sorted_class = inverse[order]
    first = np.zeros(counts.size, dtype=np.int64)
    seen = np.ones(order.size, dtype=bool)
    seen[1:] = sorted_class[1:] != sorted_class[:-1]
    starts = np.flatnonzero(seen)
    first[sorted_class[starts]] = starts
    position = np.empty(ids.size, dtype=np.int64)
    position[order] = np.arange(order.size) - first[sorted_class]
    deal = np.lexsort((ids, rank, -counts[inverse], position))
    return VertexSet.of(ids[deal[:k]].tolist())


def _tree_from_descent(G: Graph, leaves_sets: dict[str, VertexSet],
                       splits: dict[str, Any], t: int) -> SpecialTreeWitness:
    """Assemble the special tree implied by a descent that never stopped.

    Leaf ``a_eta`` is any member of its set (preferring vertices outside the
    witnesses on its path); node ``b_rho`` is a member of the witness
    ``B_rho`` agreeing with the majority opinion of every leaf below it.
    """
    leaves: dict[str, int] = {}
    for eta, S in leaves_sets.items():
        path = 0
        for d in range(t):
            path |= splits[eta[:d]].mask
        pick = S.mask & ~path or S.mask
        leaves[eta] = (pick & -pick).bit_length() - 1
    nodes: dict[str, int] = {}
    for rho, B in splits.items():
        below_leaves = [(eta, a) for eta, a in leaves.items() if eta.startswith(rho)]
        dissent = 0
        for eta, a in below_leaves:
            nbr = G.rows[a] & B.mask
            dissent |= (B.mask & ~nbr) if eta[len(rho)] == "1" else nbr
        ok = B.mask & ~dissent
        leaf_mask = sum(1 << a for _, a in below_leaves)
        pick = ok & ~leaf_mask or ok or B.mask
        nodes[rho] = (pick & -pick).bit_length() - 1
    return SpecialTreeWitness(t, nodes, leaves)


def descend(G: Graph, start: VertexSet, thr: Fraction, t: int, scanner: FamilyScanner,
            family: WitnessFamily, seed: int = 0, stream: tuple[int, ...] = (),
            sizes: SizeSequence | None = None) -> Extraction:
    """Split ``start`` level by level until some set has no split witness.

    Level ``m`` holds ``2^m`` sets; each is tested in branch order and the
    first one without a witness is returned.  With ``sizes``, children are
    cut down to ``sizes[m+1]``.  If all ``2^(t-1)`` sets at the last level
    split, the witnesses and children form a special tree of height ``t``
    and :class:`DepthCapExceeded` is raised.
    """
    level = [("", start)]
    witnesses: dict[str, VertexSet] = {}
    log: list[dict] = []
    for m in range(t):
        nxt = []
        for eta, S in level:
            code = int(eta, 2) if eta else 0
            hit = scanner.find_split(S, thr, family, seed, stream=(*stream, m, code))
            if hit is None:
                return Extraction(S, m, log)
            B, verdict = hit
            witnesses[eta] = B
            zeros, ones = verdict.zeros, verdict.ones
            log.append({"level": m, "branch": eta, "witness_size": len(B), "witness_min": B.min(),
                        "class_sizes": [len(zeros), len(ones)]})
            if sizes is not None and m + 1 < t:
                zeros = _take(G, zeros, sizes[m + 1])
                ones = _take(G, ones, sizes[m + 1])
            nxt += [(eta + "0", zeros), (eta + "1", ones)]
        level = nxt
    tree = _tree_from_descent(G, dict(level), witnesses, t)
    raise DepthCapExceeded(tree, verify_special_tree(G, tree, distinct=True),
                           verify_special_tree(G, tree, distinct=False))


def extract_excellent_unsized(G: Graph, A: VertexSet, eps, t: int, family: WitnessFamily | None = None,
                              seed: int = 0, scanner: FamilyScanner | None = None) -> Extraction:
    """Excellent subset of ``A`` of size at least ``eps^(t-1) |A|`` (no size targets)."""
    eps = Fraction(eps)
    if not eps < Fraction(1, 2**t):
        raise ParameterError(f"epsilon too large for tree bound: need eps < 1/2^{t}")
    if len(A) * eps**t < 1:
        raise ParameterError(f"|A| = {len(A)} < 1/eps^t = {float(1 / eps**t):.4g}")
    return descend(G, A, eps, t, scanner or FamilyScanner(G), family or WitnessFamily(), seed)


def extract_excellent(G: Graph, A: VertexSet, params: PipelineParams, sizes: SizeSequence,
                      scanner: FamilyScanner | None = None, family: WitnessFamily | None = None,
                      stream: tuple[int, ...] = ()) -> Extraction:
    """Subset of ``A`` of size exactly ``sizes[l]`` for some ``l``, excellent at alpha."""
    alpha, t = params.alpha, params.t
    need = max(sizes[0], 1 / alpha**t)
    if len(A) < need:
        raise ParameterError(f"|A| = {len(A)} below max(s_0, 1/alpha^t) = {float(need):.4g}")
    start = _start(G, A, sizes[0])
    return descend(G, start, alpha, t, scanner or FamilyScanner(G), family or params.family,
                   params.seed, stream, sizes)


def greedy_cover(G: Graph, params: PipelineParams, sizes: SizeSequence,
                 scanner: FamilyScanner | None = None) -> tuple[list[Extraction], VertexSet]:
    """Peel off excellent sets until fewer than ``s_0`` vertices remain.

    Each extraction's family contains every set produced before it.
    """
    scanner = scanner or FamilyScanner(G)
    pool = G.vertices()
    out: list[Extraction] = []
    while len(pool) >= sizes[0]:
        fam = params.family.with_explicit([e.piece for e in out])
        ex = extract_excellent(G, pool, params, sizes, scanner, fam, stream=(1, len(out)))
        out.append(ex)
        pool = pool - ex.piece
    return out, pool


def random_refine(G: Graph, piece: VertexSet, c: int, zeta, seed: int, max_retries: int,
                  scanner: FamilyScanner | None = None, family: WitnessFamily | None = None,
                  stream: tuple[int, ...] = ()) -> tuple[list[VertexSet], list[dict]]:
    """Random split of ``piece`` into ``|piece|/c`` parts of size ``c``, each certified at ``zeta``.

    A shuffled copy of the piece is grouped by twin class (classes in random
    order) and dealt round-robin, so every part receives a near-equal share
    of each class.  Failed certification reshuffles, up to ``max_retries``
    times.
    """
    zeta = Fraction(zeta)
    if len(piece) % c:
        raise ValueError(f"piece size {len(piece)} is not a multiple of c={c}")
    r = len(piece) // c
    if r == 1:
        return [piece], []
    scanner = scanner or FamilyScanner(G)
    family = family or WitnessFamily()
    ids = piece.indices
    rank = G.twin_rank[ids]
    log: list[dict] = []
    last = None
    for attempt in range(max_retries + 1):
        rng = rng_for(seed, 2, *stream, attempt)
        perm = rng.permutation(ids.size)
        classes = np.unique(rank)
        priority = dict(zip(classes.tolist(), rng.permutation(classes.size).tolist()))
        key = np.array([priority[x] for x in rank[perm].tolist()])
        dealt = ids[perm][np.argsort(key, kind="stable")]
        subs = [VertexSet.of(dealt[j::r].tolist()) for j in range(r)]
        failure = None
        for j, S in enumerate(subs):
            hit = scanner.find_split(S, zeta, family, seed, stream=(3, *stream, attempt, j))
            if hit is not None:
                failure = (j, hit[0])
                break
        log.append({"attempt": attempt, "failed_sub_piece": None if failure is None else failure[0],
                    "witness_size": None if failure is None else len(failure[1])})
        if failure is None:
            return subs, log
        last = (subs[failure[0]], failure[1])
    raise RefinementError(last[0], last[1], max_retries + 1)


def distribute_remainder(G: Graph, pieces: list[VertexSet], remainder: VertexSet, eps,
                         s0: int | None = None, scanner: FamilyScanner | None = None,
                         family: WitnessFamily | None = None,
                         seed: int = 0) -> tuple[list[VertexSet], list[dict]]:
    """Round-robin the remainder over ``pieces`` (index order) and re-certify.

    Returns the new pieces and one record per augmented piece that failed
    certification at ``eps``.
    """
    if s0 is not None and len(remainder) >= s0:
        raise ValueError(f"remainder of {len(remainder)} is not below s_0={s0}")
    if not remainder:
        return list(pieces), []
    if not pieces:
        raise ValueError("no pieces to receive the remainder")
    masks = [p.mask for p in pieces]
    touched = set()
    for i, v in enumerate(remainder):
        masks[i % len(masks)] |= 1 << v
        touched.add(i % len(masks))
    out = [VertexSet(m) for m in masks]
    scanner = scanner or FamilyScanner(G)
    fam = (family or WitnessFamily()).with_explicit(out)
    failures = []
    for i in sorted(touched):
        hit = scanner.find_split(out[i], Fraction(eps), fam, seed, stream=(4, i))
        if hit is not None:
            failures.append({"piece": i, "witness_size": len(hit[0]), "class_sizes": list(hit[1].class_sizes)})
    return out, failures


@dataclass
class Partition:
    pieces: list[VertexSet]
    remainder: VertexSet
    seed: int
    step1: list[Extraction]
    provenance: list[dict]


def admissible_cap(eps: Fraction) -> int:
    """Largest ``t`` with ``eps < 1/2^t`` (0 if none)."""
    t = 0
    while eps < Fraction(1, 2 ** (t + 1)):
        t += 1
    return t


def resolve_tree_bound(G: Graph, eps: Fraction, mode, budget: int) -> tuple[int, dict]:
    """Turn ``auto`` / an int / ``("from-k", k)`` into a tree bound plus a log record."""
    if mode == "auto":
        cap = admissible_cap(eps)
        if cap < 1:
            raise PipelineError("tree-bound", f"no tree bound is admissible for eps={eps}", 2)
        tb = empirical_tree_bound(G, cap, budget)
        record = {"mode": "auto", "cap": cap, **tb.to_json()}
        if tb.t is None:
            if tb.outcome.inconclusive or any(o.inconclusive for o in tb.levels.values()):
                raise PipelineError("tree-bound", f"tree search inconclusive within budget {budget}", 3, record)
            raise PipelineError(
                "tree-bound",
                f"special tree of height {cap} found, so no certified t <= {cap} admits eps={eps}; "
                f"witness {tb.outcome.witness.to_json()}", 2, record)
        return tb.t, record
    if isinstance(mode, tuple) and mode[0] == "from-k":
        t = tree_bound_from_k(int(mode[1]))
        return t, {"mode": "from-k", "k": int(mode[1]), "t": t}
    return int(mode), {"mode": "fixed", "t": int(mode)}


def stable_partition(G: Graph, eps, tree_bound="auto", seed: int = 0, max_retries: int = 20,
                     budget: int = DEFAULT_BUDGET,
                     family: WitnessFamily | None = None) -> tuple[Partition, PartitionReport]:
    """Equitable partition whose pieces are pairwise ``eps``-uniform, with a report.

    Raises :class:`PipelineError` (tagged with the failing stage) when a
    stage cannot run.  A completed run whose certification fails is not an
    error: the report's verdict says so.
    """
    eps = Fraction(eps)
    if G.n == 0:
        raise PipelineError("input", "graph is empty", 2)
    clock = {"start": time.perf_counter()}
    t, tree_record = resolve_tree_bound(G, eps, tree_bound, budget)
    clock["tree_bound"] = time.perf_counter()
    try:
        params, sizes = make_params(G.n, eps, t, seed, max_retries, budget, family)
    except ParameterError as exc:
        raise PipelineError("params", str(exc), 2, {"tree_bound": tree_record}) from exc
    scanner = FamilyScanner(G)

    step1, remainder = greedy_cover(G, params, sizes, scanner)
    clock["step1"] = time.perf_counter()

    refined: list[VertexSet] = []
    provenance: list[dict] = []
    retries: list[int] = []
    step1_pieces = [e.piece for e in step1]
    for i, ex in enumerate(step1):
        fam = params.family.with_explicit(step1_pieces + refined)
        subs, log = random_refine(G, ex.piece, params.c, params.beta, seed, max_retries,
                                  scanner, fam, stream=(i,))
        if log:
            retries.append(len(log) - 1)
        refined.extend(subs)
        provenance.extend({"step1_piece": i, "depth": ex.depth, "step1_size": len(ex.piece)} for _ in subs)
    clock["step2"] = time.perf_counter()

    final, step3_failures = distribute_remainder(G, refined, remainder, eps, sizes[0], scanner,
                                                 params.family, seed)
    for i in range(len(remainder)):
        provenance[i % len(provenance)]["augmented"] = True
    clock["step3"] = time.perf_counter()

    exact, nominal = theorem_bound(eps, t)
    report = verify_partition(G, final, eps, exact, nominal)
    clock["verify"] = time.perf_counter()

    depths = [e.depth for e in step1]
    report.params = {**params.to_json(), "tree_bound": tree_record}
    report.sizes = list(sizes.sizes)
    report.retry_stats = {
        "pieces_refined": len(retries),
        "total_retries": sum(retries),
        "median_retries": median(retries) if retries else 0,
        "max_retries_used": max(retries) if retries else 0,
    }
    report.events = [
        {"stage": "step1", "pieces": len(step1), "remainder": len(remainder),
         "depth_histogram": {str(d): depths.count(d) for d in sorted(set(depths))},
         "piece_sizes": {str(s): sum(1 for e in step1 if len(e.piece) == s) for s in sizes.sizes}},
        {"stage": "step2", "pieces": len(refined)},
        {"stage": "step3", "augmented": min(len(remainder), len(refined)),
         "certification_failures": step3_failures},
    ]
    names = ["tree_bound", "step1", "step2", "step3", "verify"]
    prev = clock["start"]
    timing = {}
    for name in names:
        timing[f"{name}_ms"] = round((clock[name] - prev) * 1000, 1)
        prev = clock[name]
    timing["total_ms"] = round((prev - clock["start"]) * 1000, 1)
    report.timing = timing
    if step3_failures:
        report.events.append({"stage": "verdict", "note": "augmented pieces failed eps-certification"})
    partition = Partition(final, remainder, seed, step1, provenance)
    return partition, report


def tsr_partition(G: Graph, eps, k: int | None = None, seed: int = 0, max_retries: int = 20,
                  budget: int = DEFAULT_BUDGET,
                  family: WitnessFamily | None = None) -> tuple[Partition, PartitionReport]:
    """Partition whose pairs are ``eps``-regular with density below ``eps`` or above ``1 - eps``.

    Runs :func:`stable_partition` at ``eps^2 / 2``, so ``sqrt(2 eps') = eps``.
    With ``k`` the tree bound is the generic ``2^(k+2) - 2`` (usually far
    too large to run); without it the tree bound is certified from ``G``.
    """
    eps = Fraction(eps)
    inner = eps * eps / 2
    mode = ("from-k", k) if k is not None else "auto"
    partition, report = stable_partition(G, inner, mode, seed, max_retries, budget, family)
    bad = 0
    for rec in report.pairs:
        if not rec.uniform:
            continue
        d = rec.density
        if not (d < eps if rec.truth == 0 else d > 1 - eps):
            bad += 1
    report.events.append({
        "stage": "stable_regularity", "eps": str(eps), "inner_eps": str(inner),
        "zeta": str(zeta_exact(inner)),
        "pairs_not_extreme": bad,
        "nominal_bound": str(stable_regularity_bound(eps, k)) if k is not None else None,
    })
    report.extreme_failures += bad
    return partition, report
