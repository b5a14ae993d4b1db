"""Pairwise uniformity certificates, the regularity consequence, and reports."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import Graph, VertexSet, density, unpack_rows

ORACLE_MAX_SIDE = 12


class ImplementationError(AssertionError):
    """A certified pair violated a consequence that must follow from it."""


def _below(count, eps: Fraction, size):
    return count * eps.denominator < eps.numerator * size


@dataclass(frozen=True)
class UniformityCertificate:
    truth: int | None  # None means Fail
    row_exceptions: int
    row_threshold: Fraction
    col_threshold: Fraction

    @property
    def passed(self) -> bool:
        return self.truth is not None


def pair_uniformity(G: Graph, A: VertexSet, B: VertexSet, eps) -> UniformityCertificate:
    """One truth value ``t`` with fewer than ``eps|A|`` rows of ``A`` having
    ``eps|B|`` or more entries disagreeing with ``t``.  ``t = 1`` is tried first."""
    eps = Fraction(eps)
    if not A or not B:
        raise ValueError("empty side")
    if A.mask & B.mask:
        raise ValueError("sides must be disjoint")
    nb, na = len(B), len(A)
    bm = B.mask
    hits = [(G.rows[a] & bm).bit_count() for a in A]
    best = None
    for t in (1, 0):
        exc = sum(1 for h in hits if not _below(nb - h if t else h, eps, nb))
        if _below(exc, eps, na):
            return UniformityCertificate(t, exc, eps * na, eps * nb)
        best = exc if best is None else min(best, exc)
    return UniformityCertificate(None, best, eps * na, eps * nb)


def zeta_of(eps) -> float:
    """``sqrt(2 eps)`` for reporting; comparisons use :func:`below_zeta`."""
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError("epsilon must lie in (0, 1/2)")
    return math.sqrt(2 * eps)


def zeta_exact(eps) -> Fraction | None:
    """``sqrt(2 eps)`` as a fraction when it is rational, else None."""
    x = 2 * Fraction(eps)
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def below_zeta(x: Fraction, eps) -> bool:
    """``0 <= x < sqrt(2 eps)`` without leaving the rationals."""
    return x >= 0 and x * x < 2 * Fraction(eps)


@dataclass(frozen=True)
class RegularityRecord:
    zeta: float
    density: Fraction
    extreme: bool
    regularity: str = "implied by uniformity"


def regular_consequence(G: Graph, A: VertexSet, B: VertexSet, eps,
                        cert: UniformityCertificate) -> RegularityRecord:
    """Density of a uniform pair lies below ``zeta`` (t=0) or above ``1 - zeta`` (t=1)."""
    if not cert.passed:
        raise ValueError("certificate did not pass")
    d = density(G, A, B)
    extreme = below_zeta(d if cert.truth == 0 else 1 - d, eps)
    if not extreme:
        raise ImplementationError(
            f"uniform pair (t={cert.truth}) has density {d}, not within sqrt(2*{eps}) of {cert.truth}")
    return RegularityRecord(zeta_of(eps), d, True)


def brute_force_regular(G: Graph, A: VertexSet, B: VertexSet, eps
                        ) -> tuple[bool, tuple[VertexSet, VertexSet] | None]:
    """Exact check that every ``A' x B'`` with ``|A'| >= eps|A|``, ``|B'| >= eps|B|``
    has density strictly within ``eps`` of ``d(A, B)``.

    Subsets of ``A`` are enumerated; for a fixed ``A'`` and ``|B'| = s`` the
    edge count ``e(A', B')`` is extremal on the ``s`` columns with fewest or
    most neighbours in ``A'``, so checking those two covers every ``B'``.
    """
    eps = Fraction(eps)
    if len(A) > ORACLE_MAX_SIDE or len(B) > ORACLE_MAX_SIDE:
        raise ValueError("oracle scale exceeded")
    if not A or not B:
        raise ValueError("empty side")
    a_ids, b_ids = A.indices, B.indices
    na, nb = len(a_ids), len(b_ids)
    adj = unpack_rows(G, a_ids.tolist())[:, b_ids].astype(np.int64)
    total = int(adj.sum())
    p, q = eps.numerator, eps.denominator

    sub = np.arange(1, 1 << na, dtype=np.int64)
    asize = np.bitwise_count(sub).astype(np.int64)
    sub, asize = sub[asize * q >= p * na], asize[asize * q >= p * na]
    if sub.size == 0:
        return True, None
    ind = ((sub[:, None] >> np.arange(na)) & 1).astype(np.int64)
    w = ind @ adj  # w[i, j] = neighbours of b_j inside the i-th A'
    order = np.argsort(w, axis=1, kind="stable")
    ws = np.take_along_axis(w, order, axis=1)
    lo = np.cumsum(ws, axis=1)
    hi = np.cumsum(ws[:, ::-1], axis=1)
    for s in range(1, nb + 1):
        if s * q < p * nb:
            continue
        for e, tail in ((lo[:, s - 1], False), (hi[:, s - 1], True)):
            # |e/(a's) - total/(na nb)| >= eps  <=>  |e na nb - total a' s| q >= p a' s na nb
            lhs = np.abs(e * na * nb - total * asize * s) * q
            rhs = p * asize * s * na * nb
            bad = np.flatnonzero(lhs >= rhs)
            if bad.size:
                i = int(bad[0])
                cols = order[i, ::-1][:s] if tail else order[i, :s]
                A2 = VertexSet.of(a_ids[ind[i].astype(bool)].tolist())
                B2 = VertexSet.of(b_ids[np.sort(cols)].tolist())
                return False, (A2, B2)
    return True, None


# -- whole-partition verification -------------------------------------------------


def canonical_order(pieces: Sequence[VertexSet]) -> list[VertexSet]:
    return sorted(pieces, key=lambda P: P.min())


def _label_counts(G: Graph, piece: VertexSet, labels: np.ndarray, num: int) -> np.ndarray:
    """``out[i, j] = |N(piece[i]) & P_j|``."""
    M = unpack_rows(G, piece.indices.tolist())
    r, c = np.nonzero(M)
    lab = labels[c]
    keep = lab >= 0
    key = r[keep] * num + lab[keep]
    return np.bincount(key, minlength=len(piece) * num).reshape(len(piece), num)


@dataclass
class PairRecord:
    i: int
    j: int
    edges: int
    size_i: int
    size_j: int
    uniform: bool
    truth: int | None
    reverse_truth: int | None

    @property
    def density(self) -> Fraction:
        return Fraction(self.edges, self.size_i * self.size_j)

    def to_json(self) -> dict:
        d = self.density
        return {"i": self.i, "j": self.j,
                "density": {"num": d.numerator, "den": d.denominator, "decimal": f"{float(d):.6f}"},
                "uniform": self.uniform, "truth": self.truth}


@dataclass
class PartitionReport:
    n: int
    edge_count: int
    eps: Fraction
    pieces: list[VertexSet]
    pairs: list[PairRecord]
    equitable: bool
    bound: dict | None = None
    params: dict | None = None
    sizes: list[int] | None = None
    retry_stats: dict | None = None
    events: list[dict] = field(default_factory=list)
    extreme_failures: int = 0
    timing: dict = field(default_factory=dict)

    @property
    def failing_pairs(self) -> list[PairRecord]:
        return [p for p in self.pairs if not p.uniform]

    @property
    def bound_ok(self) -> bool:
        return self.bound is None or self.bound.get("ok", True)

    @property
    def passed(self) -> bool:
        return not self.failing_pairs and self.equitable and self.bound_ok and not self.extreme_failures

    def verdict_json(self) -> dict:
        sizes = [len(P) for P in self.pieces]
        return {
            "pass": self.passed,
            "graph": {"n": self.n, "edges": self.edge_count},
            "params": self.params,
            "size_sequence": self.sizes,
            "pieces": {"count": len(self.pieces), "sizes": sizes,
                       "ids": [P.to_list() for P in self.pieces]},
            "equitable": self.equitable,
            "max_size_spread": (max(sizes) - min(sizes)) if sizes else 0,
            "bound": self.bound,
            "pairs_total": len(self.pairs),
            "pairs_failed": len(self.failing_pairs),
            "extreme_density_failures": self.extreme_failures,
            "pair_records": [p.to_json() for p in self.pairs],
            "regularity": {"eps": str(self.eps), "zeta": zeta_of(self.eps) if self.eps < Fraction(1, 2) else None,
                           "basis": "uniform pairs are sqrt(2 eps)-regular with extreme density"},
            "retry_stats": self.retry_stats,
            "events": self.events,
        }

    def to_json(self) -> dict:
        return {"verdict": self.verdict_json(), "timing": self.timing}


def _count_not_extreme(E: np.ndarray, sizes: np.ndarray, truth: np.ndarray,
                       uniform: np.ndarray, eps: Fraction) -> int:
    """Uniform pairs whose density is not within ``sqrt(2 eps)`` of their truth value.

    Exact: ``(x / (s_i s_j))^2 < 2 eps`` is tested as ``x^2 den < 2 num (s_i s_j)^2``
    with ``x`` the edge count (t=0) or non-edge count (t=1).
    """
    iu, ju = np.nonzero(np.triu(uniform, k=1))
    if iu.size == 0:
        return 0
    prod = sizes[iu] * sizes[ju]
    e = E[iu, ju]
    x = np.where(truth[iu, ju] == 0, e, prod - e)
    if int(prod.max()) ** 2 * 2 * max(eps.numerator, eps.denominator) < 2**62:
        ok = x * x * eps.denominator < 2 * eps.numerator * prod * prod
        return int((~ok).sum())
    return sum(1 for xi, pi in zip(x.tolist(), prod.tolist())
               if not xi * xi * eps.denominator < 2 * eps.numerator * pi * pi)


def verify_partition(G: Graph, pieces: Sequence[VertexSet], eps, bound: Fraction | None = None,
                     nominal: Fraction | None = None) -> PartitionReport:
    """Certify every pair of pieces, equitability, and the piece-count bound.

    Pieces are put in canonical order (by smallest member) first.  A pair
    counts as uniform when both orientations pass with the same truth value;
    every uniform pair must then have extreme density.
    """
    eps = Fraction(eps)
    P = canonical_order([VertexSet(p.mask) for p in pieces])
    union = 0
    for piece in P:
        if not piece:
            raise ValueError("empty piece")
        if union & piece.mask:
            raise ValueError("pieces overlap")
        union |= piece.mask
    if union != G.full_mask:
        raise ValueError("pieces do not cover the graph")
    num = len(P)
    labels = np.full(G.n, -1, dtype=np.int64)
    for j, piece in enumerate(P):
        labels[piece.indices] = j
    sizes = np.array([len(p) for p in P], dtype=np.int64)
    E = np.zeros((num, num), dtype=np.int64)
    X1 = np.zeros((num, num), dtype=np.int64)
    X0 = np.zeros((num, num), dtype=np.int64)
    for i, piece in enumerate(P):
        C = _label_counts(G, piece, labels, num)
        E[i] = C.sum(axis=0)
        X1[i] = (~_below(sizes[None, :] - C, eps, sizes[None, :])).sum(axis=0)
        X0[i] = (~_below(C, eps, sizes[None, :])).sum(axis=0)

    # truth[i, j]: 1, 0, or -1 (Fail) for the orientation with rows in P_i
    rows = sizes[:, None]
    truth = np.where(_below(X1, eps, rows), 1, np.where(_below(X0, eps, rows), 0, -1))
    uniform = (truth >= 0) & (truth == truth.T)
    extreme_failures = _count_not_extreme(E, sizes, truth, uniform, eps)
    if extreme_failures:
        raise ImplementationError(f"{extreme_failures} uniform pairs without extreme density")
    iu, ju = np.triu_indices(num, k=1)
    pairs = [PairRecord(i, j, e, si, sj, u, None if t < 0 else t, None if rt < 0 else rt)
             for i, j, e, si, sj, u, t, rt in zip(
                 iu.tolist(), ju.tolist(), E[iu, ju].tolist(), sizes[iu].tolist(), sizes[ju].tolist(),
                 uniform[iu, ju].tolist(), truth[iu, ju].tolist(), truth[ju, iu].tolist())]
    spread = int(sizes.max() - sizes.min()) if num else 0
    bound_rec = None
    if bound is not None:
        bound_rec = {"pieces": num, "exact": str(bound), "exact_value": float(bound),
                     "nominal": str(nominal) if nominal is not None else None,
                     "nominal_value": float(nominal) if nominal is not None else None,
                     "ok": num <= bound}
    return PartitionReport(G.n, G.edge_count, eps, P, pairs, spread <= 1, bound_rec)
