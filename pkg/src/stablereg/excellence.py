"""Goodness, majority opinions and excellence.

All threshold tests are exact: ``count < eps * size`` is evaluated as
``count * eps.denominator < eps.numerator * size``.

The quantifier "for every good B" is exponential, so the engine decides
excellence relative to a :class:`WitnessFamily` (singletons, explicit sets,
seeded random subsets).  :class:`ExcellenceOracle` keeps the exact
definition for graphs with at most 16 vertices.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from .generators import rng_for
from .graph import Graph, VertexSet, bool_column_sums, column_counts, distinct_traces, unpack_rows

EXCELLENT_WRT = "ExcellentWrtFamily"
NOT_EXCELLENT = "NotExcellent"
EXCELLENT_EXACT = "ExcellentExact"
NOT_EXCELLENT_EXACT = "NotExcellentExact"

ORACLE_MAX_N = 16


class OpinionUndefined(ValueError):
    pass


def _eps(eps) -> Fraction:
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError(f"epsilon must lie in (0, 1/2), got {eps}")
    return eps


def below(count, eps: Fraction, size):
    """``count < eps * size``; works elementwise on numpy integer arrays."""
    return count * eps.denominator < eps.numerator * size


@dataclass(frozen=True)
class OpinionSummary:
    majority: int | None  # None means Split
    exceptions: int
    threshold: Fraction
    size: int

    @property
    def split(self) -> bool:
        return self.majority is None


def _summary(pos: int, size: int, eps: Fraction) -> OpinionSummary:
    neg = size - pos
    thr = eps * size
    if below(neg, eps, size):
        return OpinionSummary(1, neg, thr, size)
    if below(pos, eps, size):
        return OpinionSummary(0, pos, thr, size)
    return OpinionSummary(None, min(pos, neg), thr, size)


def opinion(G: Graph, b: int, A: VertexSet, eps) -> OpinionSummary:
    """Majority truth value of ``R(b, a)`` over ``a in A`` (``b`` may lie in ``A``)."""
    eps = _eps(eps)
    if not A:
        raise ValueError("A must be nonempty")
    return _summary((G.rows[b] & A.mask).bit_count(), len(A), eps)


def is_good(G: Graph, A: VertexSet, eps) -> tuple[bool, int | None]:
    """Whether every vertex has a majority opinion on ``A``.

    On failure also returns the vertex with the largest minority class
    (smallest id on ties).
    """
    eps = _eps(eps)
    if not A:
        raise ValueError("A must be nonempty")
    cnt = column_counts(G, A)
    m = len(A)
    minority = np.minimum(cnt, m - cnt)
    bad = ~below(minority, eps, m)
    if not bad.any():
        return True, None
    worst = np.where(bad, minority, -1)
    return False, int(np.argmax(worst))


def set_opinion(G: Graph, a: int, B: VertexSet, eps) -> OpinionSummary:
    """The value ``t(a, B)``: majority of ``R(a, b)`` over ``b in B``; B must be good."""
    eps = _eps(eps)
    good, _ = is_good(G, B, eps)
    if not good:
        raise OpinionUndefined("opinion undefined: B is not eps-good")
    return _summary((G.rows[a] & B.mask).bit_count(), len(B), eps)


@dataclass(frozen=True)
class ExcellenceVerdict:
    kind: str
    witness: VertexSet | None = None
    zeros: VertexSet | None = None
    ones: VertexSet | None = None

    @property
    def excellent(self) -> bool:
        return self.kind in (EXCELLENT_WRT, EXCELLENT_EXACT)

    @property
    def class_sizes(self) -> tuple[int, int] | None:
        if self.zeros is None:
            return None
        return len(self.zeros), len(self.ones)

    def to_json(self) -> dict:
        out: dict = {"verdict": self.kind}
        if self.witness is not None:
            out["witness"] = self.witness.to_list()
            out["class_sizes"] = list(self.class_sizes)
        return out


def _opinion_classes(G: Graph, A: VertexSet, B: VertexSet, eps: Fraction) -> tuple[VertexSet, VertexSet]:
    bm, nb = B.mask, len(B)
    ones = 0
    for a in A:
        if below(nb - (G.rows[a] & bm).bit_count(), eps, nb):
            ones |= 1 << a
    return VertexSet(A.mask & ~ones), VertexSet(ones)


def excellent_wrt(G: Graph, A: VertexSet, B: VertexSet, eps) -> ExcellenceVerdict:
    """Excellence of ``A`` against the single good set ``B``."""
    eps = _eps(eps)
    if not A:
        raise ValueError("A must be nonempty")
    good, _ = is_good(G, B, eps)
    if not good:
        raise OpinionUndefined("opinion undefined: B is not eps-good")
    zeros, ones = _opinion_classes(G, A, B, eps)
    m = len(A)
    if below(len(ones), eps, m) or below(len(zeros), eps, m):
        return ExcellenceVerdict(EXCELLENT_WRT)
    return ExcellenceVerdict(NOT_EXCELLENT, B, zeros, ones)


@dataclass(frozen=True)
class WitnessFamily:
    """Candidate good sets scanned when testing excellence.

    Scan order: singletons by vertex id, then ``explicit`` in order, then
    ``samples_per_size`` random subsets of the tested set for each of up to
    ``max_sizes`` sizes between ``ceil(eps|A|)`` and ``ceil(|A|/4)``.
    """

    explicit: tuple[VertexSet, ...] = ()
    singletons: bool = True
    samples_per_size: int = 64
    max_sizes: int = 8

    def with_explicit(self, sets) -> "WitnessFamily":
        return WitnessFamily(tuple(sets), self.singletons, self.samples_per_size, self.max_sizes)

    def to_json(self) -> dict:
        return {"singletons": self.singletons, "explicit": len(self.explicit),
                "samples_per_size": self.samples_per_size, "max_sizes": self.max_sizes}


def sample_sizes(m: int, eps: Fraction, max_sizes: int) -> list[int]:
    lo = max(1, ceil(eps * m))
    hi = ceil(Fraction(m, 4))
    if hi < lo or max_sizes <= 0:
        return []
    if hi - lo + 1 <= max_sizes:
        return list(range(lo, hi + 1))
    return sorted({int(round(x)) for x in np.linspace(lo, hi, max_sizes)})


class FamilyScanner:
    """Bulk split-witness search over a :class:`WitnessFamily`.

    Keeps a goodness cache for explicit sets so that a pipeline re-scanning
    a growing family pays for each explicit set once per threshold.
    """

    def __init__(self, G: Graph):
        self.G = G
        self._good: dict[tuple[int, int], dict[int, bool]] = {}

    def explicit_good(self, B: VertexSet, eps: Fraction) -> bool:
        cache = self._good.setdefault((eps.numerator, eps.denominator), {})
        hit = cache.get(B.mask)
        if hit is None:
            cnt = column_counts(self.G, B)
            nb = len(B)
            hit = cache[B.mask] = bool(below(np.minimum(cnt, nb - cnt), eps, nb).all())
        return hit

    def find_split(self, A: VertexSet, eps, family: WitnessFamily, seed: int = 0,
                   stream: tuple[int, ...] = ()) -> tuple[VertexSet, ExcellenceVerdict] | None:
        eps = _eps(eps)
        m = len(A)
        if m == 0:
            raise ValueError("A must be nonempty")
        if m == 1:
            return None
        idx = A.indices
        M = unpack_rows(self.G, idx.tolist())

        def split_of(ones) -> np.ndarray:
            ones = np.asarray(ones, dtype=np.int64)
            return ~below(ones, eps, m) & ~below(m - ones, eps, m)

        def verdict(B: VertexSet, ones_mask: np.ndarray):
            ones = VertexSet.of(idx[ones_mask].tolist())
            return B, ExcellenceVerdict(NOT_EXCELLENT, B, A - ones, ones)

        if family.singletons:
            cnt = bool_column_sums(M)
            hits = np.flatnonzero(split_of(cnt))
            if hits.size:
                b = int(hits[0])
                return verdict(VertexSet(1 << b), M[:, b])

        good_sets = [B for B in family.explicit if B and self.explicit_good(B, eps)]
        if good_sets:
            # one gather plus a segmented sum covers every explicit set at once
            lengths = np.array([len(B) for B in good_sets], dtype=np.int64)
            starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
            cat = np.concatenate([B.indices for B in good_sets])
            cnt = np.add.reduceat(M[:, cat].astype(np.int32), starts, axis=1)
            t1 = below(lengths[None, :] - cnt, eps, lengths[None, :])
            hits = np.flatnonzero(split_of(t1.sum(axis=0)))
            if hits.size:
                j = int(hits[0])
                return verdict(good_sets[j], t1[:, j])

        sizes = sample_sizes(m, eps, family.max_sizes)
        if not sizes or family.samples_per_size <= 0:
            return None
        rng = rng_for(seed, 11, *stream)
        rows = []
        for s in sizes:
            order = rng.random((family.samples_per_size, m)).argsort(axis=1)[:, :s]
            S = np.zeros((family.samples_per_size, m), dtype=bool)
            np.put_along_axis(S, order, True, axis=1)
            rows.append(S)
        S = np.vstack(rows)
        Sf = S.astype(np.float64)
        size = S.sum(axis=1)
        T, _ = distinct_traces(M)
        cntB = np.rint(Sf @ T.astype(np.float64)).astype(np.int64)
        good = below(np.minimum(cntB, size[:, None] - cntB), eps, size[:, None]).all(axis=1)
        inner = M[:, idx].astype(np.float64)
        cntA = np.rint(Sf @ inner.T).astype(np.int64)
        t1 = below(size[:, None] - cntA, eps, size[:, None])
        ones = t1.sum(axis=1)
        hits = np.flatnonzero(good & split_of(ones))
        if hits.size:
            j = int(hits[0])
            return verdict(VertexSet.of(idx[S[j]].tolist()), t1[j])
        return None


def find_split_witness(G: Graph, A: VertexSet, eps, family: WitnessFamily | None = None,
                       seed: int = 0) -> tuple[VertexSet, ExcellenceVerdict] | None:
    """First family member that is good and splits ``A`` (both classes >= eps|A|)."""
    return FamilyScanner(G).find_split(A, eps, family or WitnessFamily(), seed)


class ExcellenceOracle:
    """Exact excellence by enumerating every nonempty ``B`` of a small graph.

    ``good_masks`` lists the good sets in increasing mask order and
    ``ones[i]`` is the mask of vertices whose opinion on ``good_masks[i]``
    is 1.
    """

    def __init__(self, G: Graph, eps):
        if G.n > ORACLE_MAX_N:
            raise ValueError("oracle scale exceeded")
        self.G = G
        self.eps = eps = _eps(eps)
        n = G.n
        masks = np.arange(1, 1 << n, dtype=np.int64)
        size = np.bitwise_count(masks).astype(np.int64)
        good = np.ones(masks.size, dtype=bool)
        cnts = []
        for b in range(n):
            cnt = np.bitwise_count(masks & G.rows[b]).astype(np.int64)
            cnts.append(cnt)
            good &= below(cnt, eps, size) | below(size - cnt, eps, size)
        self.good_masks = masks[good]
        gsize = size[good]
        ones = np.zeros(self.good_masks.size, dtype=np.int64)
        for v, cnt in enumerate(cnts):
            ones |= below(gsize - cnt[good], eps, gsize).astype(np.int64) << v
        self.ones = ones

    def is_good(self, A: VertexSet) -> bool:
        i = np.searchsorted(self.good_masks, A.mask)
        return bool(i < self.good_masks.size and self.good_masks[i] == A.mask)

    def verdict(self, A: VertexSet) -> ExcellenceVerdict:
        if not A:
            raise ValueError("A must be nonempty")
        m = len(A)
        ones = np.bitwise_count(self.ones & A.mask).astype(np.int64)
        split = ~below(ones, self.eps, m) & ~below(m - ones, self.eps, m)
        hits = np.flatnonzero(split)
        if not hits.size:
            return ExcellenceVerdict(EXCELLENT_EXACT)
        i = int(hits[0])
        ones_set = VertexSet(int(self.ones[i]) & A.mask)
        return ExcellenceVerdict(NOT_EXCELLENT_EXACT, VertexSet(int(self.good_masks[i])),
                                 A - ones_set, ones_set)

    def per_witness(self, A: VertexSet) -> dict[int, bool]:
        """``{B mask: A excellent against B}`` for every good ``B``."""
        m = len(A)
        ones = np.bitwise_count(self.ones & A.mask).astype(np.int64)
        ok = below(ones, self.eps, m) | below(m - ones, self.eps, m)
        return dict(zip(self.good_masks.tolist(), ok.tolist()))


def brute_force_excellent(G: Graph, A: VertexSet, eps) -> ExcellenceVerdict:
    """Exact verdict against every good ``B`` of ``G`` (``n <= 16``)."""
    return ExcellenceOracle(G, eps).verdict(A)
