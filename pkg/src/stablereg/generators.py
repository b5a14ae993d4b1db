"""Seeded constructions of the graph families used in tests and benchmarks.

Randomness comes from numpy's PCG64 bit generator, whose algorithm and
stream are fixed across platforms, so a seed reproduces a graph exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import Graph, VertexSet

FAMILIES = ("half-graph", "cliques", "multipartite", "gnp", "planted", "special-tree-example")

# vertex ids in special_tree_example()
TREE_EXAMPLE_IDS = {"b": 0, "b0": 1, "b1": 2, "a00": 3, "a01": 4, "a10": 5, "a11": 6}


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(stream))))


def half_graph(k: int) -> Graph:
    """``a_i = i-1``, ``b_j = k+j-1``; ``a_i ~ b_j`` iff ``i < j``."""
    if k < 1:
        raise ValueError("half-graph length must be >= 1")
    edges = [(i - 1, k + j - 1) for i in range(1, k + 1) for j in range(i + 1, k + 1)]
    return Graph.from_edges(2 * k, edges)


def half_graph_sides(k: int) -> tuple[VertexSet, VertexSet]:
    return VertexSet.range(0, k), VertexSet.range(k, 2 * k)


def _check_sizes(sizes: Sequence[int]) -> list[int]:
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ValueError("need at least one part")
    if any(s < 1 for s in sizes):
        raise ValueError("part sizes must be >= 1")
    return sizes


def _part_masks(sizes: list[int]) -> list[tuple[int, int, int]]:
    out, start = [], 0
    for s in sizes:
        out.append((start, start + s, ((1 << s) - 1) << start))
        start += s
    return out


def union_of_cliques(sizes: Sequence[int]) -> Graph:
    """Disjoint cliques on consecutive id ranges."""
    sizes = _check_sizes(sizes)
    rows: list[int] = []
    for start, stop, m in _part_masks(sizes):
        rows.extend(m ^ (1 << v) for v in range(start, stop))
    return Graph(sum(sizes), rows, check=False)


def complete_multipartite(sizes: Sequence[int]) -> Graph:
    """Edge iff the endpoints lie in different parts."""
    sizes = _check_sizes(sizes)
    full = (1 << sum(sizes)) - 1
    rows: list[int] = []
    for start, stop, m in _part_masks(sizes):
        rows.extend([full & ~m] * (stop - start))
    return Graph(sum(sizes), rows, check=False)


def parts_of(sizes: Sequence[int]) -> list[VertexSet]:
    return [VertexSet(m) for _, _, m in _part_masks(list(sizes))]


ER_BLOCK_PAIRS = 1 << 22


def erdos_renyi(n: int, p: Fraction | float | str, seed: int) -> Graph:
    """G(n, p): pairs ``u < v`` in row-major order, one draw each."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rng = rng_for(seed)
    width = (n + 7) // 8
    packed = np.zeros((n, width), dtype=np.uint8)
    cols = np.arange(n)
    u = 0
    while u < n - 1:
        # draw whole rows of the upper triangle, about ER_BLOCK_PAIRS at a time
        v, pairs = u + 1, n - u - 1
        while v < n - 1 and pairs + n - v - 1 <= ER_BLOCK_PAIRS:
            pairs += n - v - 1
            v += 1
        block = np.zeros((v - u, n), dtype=bool)
        block[cols[None, :] > np.arange(u, v)[:, None]] = (
            rng.integers(0, p.denominator, size=pairs, dtype=np.int64) < p.numerator)
        packed[u:v] = np.packbits(block, axis=1, bitorder="little")
        u = v
    # mirror the upper triangle; block c only writes columns below its own rows
    step = 8 * max(1, ER_BLOCK_PAIRS // (8 * n))
    for c0 in range(0, n, step):
        c1 = min(n, c0 + step)
        upper_cols = np.unpackbits(packed[:, c0 // 8:(c1 + 7) // 8], axis=1, bitorder="little")[:, :c1 - c0]
        packed[c0:c1] |= np.packbits(upper_cols.T, axis=1, bitorder="little")[:, :width]
    return Graph(n, [int.from_bytes(row.tobytes(), "little") for row in packed], check=False)


def special_tree_example() -> Graph:
    """The height-2 tree example: exactly its four required edges."""
    ids = TREE_EXAMPLE_IDS
    edges = [("b", "a11"), ("b", "a10"), ("b1", "a11"), ("b0", "a01")]
    return Graph.from_edges(7, [(ids[x], ids[y]) for x, y in edges])


@dataclass(frozen=True)
class PlantedHalfGraph:
    graph: Graph
    a: tuple[int, ...]
    b: tuple[int, ...]


def planted_half_graph(base: Graph, k: int, seed: int) -> PlantedHalfGraph:
    """Rewire the ``k*k`` pairs ``(a_i, b_j)`` of 2k random vertices.

    Only those pairs change; every other adjacency of ``base`` survives.
    """
    if k < 1:
        raise ValueError("half-graph length must be >= 1")
    if base.n < 2 * k:
        raise ValueError(f"base graph has {base.n} vertices, need >= {2 * k}")
    chosen = rng_for(seed).choice(base.n, size=2 * k, replace=False).tolist()
    a, b = chosen[:k], chosen[k:]
    rows = list(base.rows)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            if i < j:
                rows[ai] |= 1 << bj
                rows[bj] |= 1 << ai
            else:
                rows[ai] &= ~(1 << bj)
                rows[bj] &= ~(1 << ai)
    return PlantedHalfGraph(Graph(base.n, rows, check=False), tuple(a), tuple(b))


def random_clique_sizes(n: int, seed: int, low: int = 400, high: int = 3000) -> list[int]:
    """Clique sizes drawn uniformly from ``[low, high]`` summing to ``n``."""
    rng = rng_for(seed, 1)
    sizes: list[int] = []
    left = n
    while left > 0:
        s = int(rng.integers(low, high + 1))
        if left - s < low:
            s = left
        sizes.append(s)
        left -= s
    return sizes


@dataclass(frozen=True)
class FamilySpec:
    family: str
    k: int | None = None
    sizes: tuple[int, ...] = ()
    n: int | None = None
    p: Fraction = Fraction(1, 2)
    seed: int = 0
    base: "FamilySpec | None" = field(default=None)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if not 0 <= Fraction(self.p) <= 1:
            raise ValueError("p must lie in [0, 1]")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def build(self) -> Graph:
        f = self.family
        if f == "half-graph":
            return half_graph(_need(self.k, "k"))
        if f == "cliques":
            return union_of_cliques(self.sizes)
        if f == "multipartite":
            return complete_multipartite(self.sizes)
        if f == "gnp":
            return erdos_renyi(_need(self.n, "n"), self.p, self.seed)
        if f == "special-tree-example":
            return special_tree_example()
        base = self.base.build() if self.base else Graph(_need(self.n, "n"), [0] * self.n)
        return planted_half_graph(base, _need(self.k, "k"), self.seed).graph


def _need(value, name):
    if value is None:
        raise ValueError(f"family parameter {name!r} is required")
    return value


def oracle_corpus(count: int = 200, max_n: int = 10, seed: int = 2024) -> list[tuple[str, Graph]]:
    """Deterministic corpus of small graphs: every family plus random fill."""
    fixed: list[tuple[str, Graph]] = []
    for k in range(1, max_n // 2 + 1):
        fixed.append((f"half_graph({k})", half_graph(k)))
    fixed.append(("special_tree_example", special_tree_example()))
    for sizes in ([3, 3], [4, 4], [3, 3, 3], [2, 2, 2, 2], [5, 5], [1, 1], [10], [5], [2, 3, 4], [1, 2, 3, 4]):
        if sum(sizes) <= max_n:
            fixed.append((f"cliques({sizes})", union_of_cliques(sizes)))
    for sizes in ([3, 3], [2, 2, 2], [4, 4], [1, 1, 1], [5, 5], [2, 3, 4], [3, 3, 3]):
        if sum(sizes) <= max_n:
            fixed.append((f"multipartite({sizes})", complete_multipartite(sizes)))
    for n in (1, 5, 10):
        fixed.append((f"empty({n})", Graph(n, [0] * n)))
    for k, n in ((2, 6), (3, 8), (3, 10), (4, 10)):
        base = union_of_cliques([n // 2, n - n // 2])
        fixed.append((f"planted(cliques,{k})", planted_half_graph(base, k, seed + k).graph))
    out = fixed[:count]
    rng = rng_for(seed, 7)
    i = 0
    while len(out) < count:
        n = int(rng.integers(4, max_n + 1))
        p = Fraction(int(rng.integers(1, 10)), 10)
        out.append((f"gnp({n},{p},{seed + i})", erdos_renyi(n, p, seed + i)))
        i += 1
    return out
