"""Half-graph and special-tree witness search, tree/stability bounds, VC checks.

Both searches are exact backtracking with a node budget.  Candidate vertices
are reduced modulo twin classes: swapping two unused twins is an automorphism
fixing every earlier choice, so trying one representative per class is
enough for an exhaustive answer.

Special-tree convention: every constrained pair ``(a_eta, b_rho)`` must
consist of two distinct vertices, i.e. a leaf is never one of its own
ancestor nodes.  Other coincidences (two nodes, or a node and a leaf in a
different branch) are allowed.  ``distinct=False`` drops the restriction and
lets a leaf sit on a 0-branch ancestor, where ``not R(a, a)`` holds
vacuously.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Any, Iterator

from .graph import Graph, VertexSet, bits_of, mask_of, trace_count

DEFAULT_BUDGET = 10**7

FOUND = "Found"
ABSENT = "CertifiedAbsent"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class HalfGraphWitness:
    a: tuple[int, ...]
    b: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.a)

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b)}


@dataclass(frozen=True)
class SpecialTreeWitness:
    height: int
    nodes: dict[str, int]
    leaves: dict[str, int]

    def to_json(self) -> dict:
        return {"height": self.height, "nodes": dict(sorted(self.nodes.items())),
                "leaves": dict(sorted(self.leaves.items()))}


@dataclass(frozen=True)
class SearchOutcome:
    status: str
    witness: Any = None
    nodes_explored: int = 0

    @property
    def found(self) -> bool:
        return self.status == FOUND

    @property
    def absent(self) -> bool:
        return self.status == ABSENT

    @property
    def inconclusive(self) -> bool:
        return self.status == INCONCLUSIVE

    def to_json(self) -> dict:
        out = {"outcome": self.status, "nodes_explored": self.nodes_explored}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


class _Exhausted(Exception):
    pass


class _Counter:
    __slots__ = ("n", "budget")

    def __init__(self, budget: int):
        self.n = 0
        self.budget = budget

    def tick(self) -> None:
        self.n += 1
        if self.n > self.budget:
            raise _Exhausted


def _reps(G: Graph, cand: int) -> Iterator[int]:
    """Smallest member of each twin class meeting ``cand``, ascending."""
    if cand.bit_count() <= 2 * len(G.twin_classes):
        tried = set()
        rank = G.twin_rank
        for v in bits_of(cand):
            r = int(rank[v])
            if r not in tried:
                tried.add(r)
                yield v
    else:
        for cm in G.twin_classes:
            m = cm & cand
            if m:
                yield (m & -m).bit_length() - 1


# -- verification (independent of the searches) ------------------------------


def verify_half_graph(G: Graph, w: HalfGraphWitness) -> bool:
    k = len(w.a)
    if len(w.b) != k or k == 0:
        return False
    vs = list(w.a) + list(w.b)
    if len(set(vs)) != 2 * k or any(not 0 <= v < G.n for v in vs):
        return False
    return all(G.adjacent(w.a[i], w.b[j]) == (i < j) for i in range(k) for j in range(k))


def verify_special_tree(G: Graph, w: SpecialTreeWitness, distinct: bool = True) -> bool:
    h = w.height
    expected_nodes = {"".join(p) for d in range(h) for p in _strings(d)}
    expected_leaves = set(_strings(h))
    if set(w.nodes) != expected_nodes or set(w.leaves) != expected_leaves:
        return False
    for eta, a in w.leaves.items():
        for d in range(h):
            b = w.nodes[eta[:d]]
            if distinct and a == b:
                return False
            if G.adjacent(a, b) != (eta[d] == "1"):
                return False
    return True


def _strings(length: int) -> list[str]:
    return [format(i, f"0{length}b") if length else "" for i in range(2**length)]


# -- half-graphs -----------------------------------------------------------


def find_half_graph(G: Graph, k: int, budget: int = DEFAULT_BUDGET) -> SearchOutcome:
    """Search for distinct ``a_1..a_k, b_1..b_k`` with ``R(a_i, b_j)`` iff ``i < j``.

    Choices alternate ``a_1, b_1, a_2, b_2, ...``.  ``common`` holds the
    vertices adjacent to every chosen ``a`` (the pool for later ``b``) and
    ``blocked`` the vertices adjacent to some chosen ``b`` (banned for later
    ``a``).  Length 1 is a single distinct non-adjacent pair.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if G.n < 2 * k:
        return SearchOutcome(ABSENT, None, 0)
    rows, full = G.rows, G.full_mask
    ctr = _Counter(budget)
    a_seq: list[int] = []
    b_seq: list[int] = []

    def extend(i: int, used: int, common: int, blocked: int) -> bool:
        if i == k:
            return True
        rest = k - i - 1
        a_pool = full & ~used & ~blocked
        for a in _reps(G, a_pool):
            ctr.tick()
            later_b = common & rows[a] & ~used
            if later_b.bit_count() < rest:
                continue
            used_a = used | (1 << a)
            b_pool = common & ~rows[a] & ~used_a
            for b in _reps(G, b_pool):
                ctr.tick()
                blocked_b = blocked | rows[b]
                used_ab = used_a | (1 << b)
                if rest and (full & ~used_ab & ~blocked_b).bit_count() < rest:
                    continue
                a_seq.append(a)
                b_seq.append(b)
                if extend(i + 1, used_ab, common & rows[a], blocked_b):
                    return True
                a_seq.pop()
                b_seq.pop()
        return False

    try:
        ok = extend(0, 0, full, 0)
    except _Exhausted:
        return SearchOutcome(INCONCLUSIVE, None, ctr.n)
    if not ok:
        return SearchOutcome(ABSENT, None, ctr.n)
    w = HalfGraphWitness(tuple(a_seq), tuple(b_seq))
    if not verify_half_graph(G, w):
        raise AssertionError(f"half-graph search produced an invalid witness {w}")
    return SearchOutcome(FOUND, w, ctr.n)


@dataclass(frozen=True)
class HalfGraphProfile:
    length: int
    outcomes: dict[int, SearchOutcome] = field(default_factory=dict)

    @property
    def next_outcome(self) -> SearchOutcome | None:
        return self.outcomes.get(self.length + 1)


def max_half_graph_length(G: Graph, cap: int, budget: int = DEFAULT_BUDGET) -> HalfGraphProfile:
    """Largest ``k <= cap`` with a half-graph, plus the outcome at ``k + 1``.

    A prefix of a witness is a witness, so the levels are probed upward and
    the first non-Found level stops the scan.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    outcomes: dict[int, SearchOutcome] = {}
    best = 0
    for k in range(1, cap + 2):
        out = find_half_graph(G, k, budget)
        outcomes[k] = out
        if not out.found:
            break
        if k <= cap:
            best = k
        else:
            break
    return HalfGraphProfile(best, outcomes)


# -- special trees ---------------------------------------------------------


def find_special_tree(G: Graph, h: int, budget: int = DEFAULT_BUDGET,
                      distinct: bool = True) -> SearchOutcome:
    """Search for a full special tree of height ``h``.

    ``grow(C, d)`` asks for a tree of height ``d`` whose leaves lie in ``C``.
    Picking the root ``b`` splits ``C`` into ``C & N(b)`` (1-branch) and
    ``C - N(b)`` (0-branch, also minus ``b`` itself when ``distinct``); the
    two branches are independent, so results are memoised on ``(C, d)``.
    Root representatives: per twin class, one member inside ``C`` and one
    outside, since a twin swap preserving ``C`` maps solutions to solutions.
    """
    if h < 1:
        raise ValueError("height must be >= 1")
    rows = G.rows
    ctr = _Counter(budget)
    memo: dict[tuple[int, int], Any] = {}
    classes = G.twin_classes

    def roots(C: int) -> Iterator[int]:
        for cm in classes:
            inside = cm & C
            if inside:
                yield (inside & -inside).bit_length() - 1
            outside = cm & ~C
            if outside:
                yield (outside & -outside).bit_length() - 1

    def grow(C: int, d: int):
        if d == 0:
            return (C & -C).bit_length() - 1 if C else None
        need = 1 << (d - 1)
        if C.bit_count() < 2 * need:
            return None
        key = (C, d)
        if key in memo:
            return memo[key]
        found = None
        for b in roots(C):
            ctr.tick()
            one = C & rows[b]
            if one.bit_count() < need:
                continue
            zero = C & ~rows[b]
            if distinct:
                zero &= ~(1 << b)
            if zero.bit_count() < need:
                continue
            sub1 = grow(one, d - 1)
            if sub1 is None:
                continue
            sub0 = grow(zero, d - 1)
            if sub0 is None:
                continue
            found = (b, sub0, sub1)
            break
        memo[key] = found
        return found

    try:
        result = grow(G.full_mask, h)
    except _Exhausted:
        return SearchOutcome(INCONCLUSIVE, None, ctr.n)
    if result is None:
        return SearchOutcome(ABSENT, None, ctr.n)
    nodes: dict[str, int] = {}
    leaves: dict[str, int] = {}

    def unpack(node, prefix: str, d: int) -> None:
        if d == 0:
            leaves[prefix] = node
            return
        b, sub0, sub1 = node
        nodes[prefix] = b
        unpack(sub0, prefix + "0", d - 1)
        unpack(sub1, prefix + "1", d - 1)

    unpack(result, "", h)
    w = SpecialTreeWitness(h, nodes, leaves)
    if not verify_special_tree(G, w, distinct=distinct):
        raise AssertionError(f"special-tree search produced an invalid witness {w}")
    return SearchOutcome(FOUND, w, ctr.n)


def tree_bound_from_k(k: int) -> int:
    """Strict upper bound ``2^(k+2) - 2`` on tree height in k-edge-stable graphs."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > 56:
        raise OverflowError("k > 56 overflows a 64-bit tree bound")
    return 2 ** (k + 2) - 2


def stability_from_tree(h: int) -> int:
    """No tree of height ``h`` implies ``2^(h+1)``-edge stability."""
    if h < 1:
        raise ValueError("h must be >= 1")
    if h > 62:
        raise OverflowError("h > 62 overflows a 64-bit stability bound")
    return 2 ** (h + 1)


@dataclass(frozen=True)
class TreeBound:
    t: int | None
    outcome: SearchOutcome
    levels: dict[int, SearchOutcome]

    def to_json(self) -> dict:
        out = {"t": self.t, **self.outcome.to_json()}
        out["levels"] = {str(h): o.status for h, o in sorted(self.levels.items())}
        return out


def empirical_tree_bound(G: Graph, cap: int, budget: int = DEFAULT_BUDGET,
                         distinct: bool = True) -> TreeBound:
    """Smallest certified-absent height ``t <= cap``.

    A tree of height ``h+1`` contains one of height ``h``, so absence is
    upward closed; an Inconclusive level is skipped and a later certified
    level still yields a valid (possibly non-minimal) bound.  When nothing is
    certified, ``t`` is None and ``outcome`` is the last level's result.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    levels: dict[int, SearchOutcome] = {}
    last = None
    for h in range(1, cap + 1):
        last = find_special_tree(G, h, budget, distinct=distinct)
        levels[h] = last
        if last.absent:
            return TreeBound(h, last, levels)
    return TreeBound(None, last, levels)


# -- VC dimension and Sauer-Shelah -----------------------------------------


def trace_family(G: Graph, A: VertexSet) -> set[int]:
    """Positive and negative traces of ``A`` as masks."""
    am = A.mask
    fam = set()
    for row in G.rows:
        fam.add(row & am)
        fam.add(am & ~row)
    return fam


def vc_dimension(G: Graph, A: VertexSet, cap: int = 6) -> int:
    """Largest ``d <= cap`` such that some ``d``-subset of ``A`` is shattered."""
    if not A:
        raise ValueError("A must be nonempty")
    if cap > 6:
        raise ValueError("brute-force shattering is capped at 6")
    fam = trace_family(G, A)
    members = A.to_list()
    best = 0
    for d in range(1, min(cap, len(members)) + 1):
        target = 1 << d
        hit = False
        for S in combinations(members, d):
            sm = mask_of(S)
            if len({f & sm for f in fam}) == target:
                hit = True
                break
        if not hit:
            break
        best = d
    return best


def sauer_bound(size: int, k: int) -> int:
    return sum(comb(size, i) for i in range(k + 1))


def sauer_check(G: Graph, A: VertexSet, k: int) -> bool:
    """Distinct positive traces of ``A`` are at most ``sum_{i<=k} C(|A|, i)``."""
    return trace_count(G, A) <= sauer_bound(len(A), k)
