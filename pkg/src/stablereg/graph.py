"""Dense bit-row graphs and vertex-set algebra.

Every vertex ``v`` of a :class:`Graph` owns one Python ``int`` whose bit ``u``
is set iff ``u`` and ``v`` are adjacent.  Set algebra is plain integer
algebra and cardinalities are ``int.bit_count``.  Bulk kernels (column sums,
distinct traces) unpack a handful of rows into numpy arrays on demand so the
ints stay the single source of truth.
"""
from __future__ import annotations

import io
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

_ROW_CHUNK = 1024


def bits_of(mask: int) -> list[int]:
    """Ascending list of the set bit positions of ``mask``."""
    if mask < 0:
        raise ValueError("negative mask")
    if mask.bit_length() <= 256:
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out
    nbytes = (mask.bit_length() + 7) // 8
    buf = np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(buf, bitorder="little")).tolist()


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << int(v)
    return m


class VertexSet:
    """An immutable set of vertex ids stored as a bitmask."""

    __slots__ = ("mask", "_size", "_indices")

    def __init__(self, mask: int = 0):
        if mask < 0:
            raise ValueError("negative mask")
        self.mask = mask
        self._size = mask.bit_count()
        self._indices: np.ndarray | None = None

    @classmethod
    def of(cls, vertices: Iterable[int]) -> "VertexSet":
        return cls(mask_of(vertices))

    @classmethod
    def range(cls, start: int, stop: int) -> "VertexSet":
        return cls(((1 << (stop - start)) - 1) << start if stop > start else 0)

    @property
    def indices(self) -> np.ndarray:
        """Members as a sorted int64 array (cached)."""
        if self._indices is None:
            self._indices = np.asarray(bits_of(self.mask), dtype=np.int64)
        return self._indices

    def __len__(self) -> int:
        return self._size

    def __bool__(self) -> bool:
        return self.mask != 0

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices.tolist())

    def __contains__(self, v: int) -> bool:
        return v >= 0 and (self.mask >> v) & 1 == 1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VertexSet) and other.mask == self.mask

    def __hash__(self) -> int:
        return hash(self.mask)

    def __and__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.mask & other.mask)

    def __or__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.mask | other.mask)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.mask & ~other.mask)

    def __xor__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.mask ^ other.mask)

    def __le__(self, other: "VertexSet") -> bool:
        return not self.mask & ~other.mask

    def min(self) -> int:
        if not self.mask:
            raise ValueError("empty set has no minimum")
        return (self.mask & -self.mask).bit_length() - 1

    def to_list(self) -> list[int]:
        return self.indices.tolist()

    def __repr__(self) -> str:
        items = self.to_list()
        if len(items) > 12:
            return f"VertexSet(<{len(items)} vertices from {items[0]}>)"
        return f"VertexSet({items})"


class Graph:
    """A finite simple graph on vertices ``0..n-1``.

    ``rows[v]`` is the neighbourhood bitmask of ``v``.  The constructor checks
    symmetry and irreflexivity unless ``check=False`` is passed by a trusted
    builder.
    """

    def __init__(self, n: int, rows: Iterable[int], check: bool = True):
        self.n = int(n)
        self.rows: tuple[int, ...] = tuple(rows)
        if len(self.rows) != self.n:
            raise ValueError(f"expected {self.n} rows, got {len(self.rows)}")
        if check:
            self._validate()

    def _validate(self) -> None:
        full = self.full_mask
        for v, row in enumerate(self.rows):
            if row & ~full:
                raise ValueError(f"row {v} references a vertex >= n")
            if (row >> v) & 1:
                raise ValueError(f"self-loop at vertex {v}")
        if self.n <= 4096:
            mat = self.dense()
            if not np.array_equal(mat, mat.T):
                raise ValueError("adjacency is not symmetric")
        else:
            for v, row in enumerate(self.rows):
                for u in bits_of(row):
                    if not (self.rows[u] >> v) & 1:
                        raise ValueError(f"asymmetric pair ({v}, {u})")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, rows, check=False)

    @classmethod
    def from_dense(cls, mat: np.ndarray) -> "Graph":
        """Build from a square boolean matrix (symmetric, zero diagonal)."""
        mat = np.asarray(mat, dtype=bool)
        n = mat.shape[0]
        packed = np.packbits(mat, axis=1, bitorder="little")
        rows = [int.from_bytes(packed[v].tobytes(), "little") for v in range(n)]
        return cls(n, rows)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def vertices(self) -> VertexSet:
        return VertexSet(self.full_mask)

    def adjacent(self, u: int, v: int) -> bool:
        return (self.rows[u] >> v) & 1 == 1

    def neighbors(self, v: int) -> VertexSet:
        return VertexSet(self.rows[v])

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    @cached_property
    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        for u, row in enumerate(self.rows):
            for v in bits_of(row >> (u + 1) << (u + 1)):
                yield u, v

    def dense(self) -> np.ndarray:
        return unpack_rows(self, range(self.n))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.n, self.rows))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"

    def check_set(self, A: VertexSet) -> None:
        if A.mask & ~self.full_mask:
            raise ValueError("vertex set exceeds graph size")

    # -- twin classes -----------------------------------------------------

    @cached_property
    def twin_classes(self) -> tuple[int, ...]:
        """Masks of the twin classes, ordered by smallest member.

        ``u`` and ``v`` are twins when ``N(u) - {v} == N(v) - {u}``; swapping
        two twins is an automorphism.  True twins share closed
        neighbourhoods, false twins share open ones, and no vertex has both
        kinds, so grouping by either key yields an equivalence relation.
        """
        by_open: dict[int, list[int]] = {}
        by_closed: dict[int, list[int]] = {}
        for v, row in enumerate(self.rows):
            by_open.setdefault(row, []).append(v)
            by_closed.setdefault(row | (1 << v), []).append(v)
        owner = [-1] * self.n
        groups: list[list[int]] = []
        for table in (by_closed, by_open):
            for members in table.values():
                if len(members) > 1 and owner[members[0]] < 0:
                    for v in members:
                        owner[v] = len(groups)
                    groups.append(members)
        del by_open, by_closed
        for v in range(self.n):
            if owner[v] < 0:
                owner[v] = len(groups)
                groups.append([v])
        groups.sort(key=lambda g: g[0])
        return tuple(mask_of(g) for g in groups)

    @cached_property
    def twin_rank(self) -> np.ndarray:
        """``twin_rank[v]`` = smallest member of the twin class of ``v``."""
        rank = np.empty(self.n, dtype=np.int64)
        for cm in self.twin_classes:
            members = bits_of(cm)
            rank[members] = members[0]
        return rank


# -- bulk kernels ---------------------------------------------------------


def unpack_rows(G: Graph, vertices: Iterable[int]) -> np.ndarray:
    """Boolean matrix whose ``i``-th row is the adjacency row of ``vertices[i]``."""
    vs = list(vertices)
    nbytes = (G.n + 7) // 8
    if not vs:
        return np.zeros((0, G.n), dtype=bool)
    buf = b"".join(G.rows[v].to_bytes(nbytes, "little") for v in vs)
    packed = np.frombuffer(buf, dtype=np.uint8).reshape(len(vs), nbytes)
    return np.unpackbits(packed, axis=1, bitorder="little")[:, : G.n].view(bool)


def bool_column_sums(M: np.ndarray) -> np.ndarray:
    """Column sums of a boolean matrix (much faster than ``M.sum(axis=0)``)."""
    acc = np.uint16 if M.shape[0] < 2**16 else np.uint32
    return np.add.reduce(M.view(np.uint8), axis=0, dtype=acc).astype(np.int64)


def column_counts(G: Graph, A: VertexSet) -> np.ndarray:
    """``out[b] = |N(b) & A|`` for every vertex ``b`` of ``G``."""
    idx = A.indices
    out = np.zeros(G.n, dtype=np.int64)
    for start in range(0, len(idx), _ROW_CHUNK):
        out += bool_column_sums(unpack_rows(G, idx[start : start + _ROW_CHUNK].tolist()))
    return out


def distinct_traces(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct columns of a boolean row block.

    ``M`` is ``unpack_rows(G, A)``, so column ``b`` is the trace of ``A``
    under ``b``.  Returns ``(T, first)`` where ``T`` is ``|A| x d`` (one
    column per distinct trace) and ``first[j]`` is the smallest vertex
    producing column ``j``.
    """
    packed = np.ascontiguousarray(np.packbits(M, axis=0).T)
    if packed.shape[1] == 0:
        return np.zeros((M.shape[0], 1), dtype=bool), np.zeros(1, dtype=np.int64)
    keys = packed.view(np.dtype((np.void, packed.shape[1]))).ravel()
    _, first = np.unique(keys, return_index=True)
    first = np.sort(first)
    return M[:, first], first.astype(np.int64)


# -- set-level operations -------------------------------------------------


def density(G: Graph, A: VertexSet, B: VertexSet) -> Fraction:
    """Ordered adjacent pairs ``(a, b)`` in ``A x B`` over ``|A| |B|``."""
    if not A or not B:
        raise ValueError("empty side")
    bm = B.mask
    edges = sum((G.rows[a] & bm).bit_count() for a in A)
    return Fraction(edges, len(A) * len(B))


def trace(G: Graph, b: int, A: VertexSet, polarity: int) -> VertexSet:
    """``{a in A : R(a, b)}`` for polarity 1, its complement in ``A`` for 0."""
    if polarity == 1:
        return VertexSet(A.mask & G.rows[b])
    if polarity == 0:
        return VertexSet(A.mask & ~G.rows[b])
    raise ValueError("polarity must be 0 or 1")


def trace_count(G: Graph, A: VertexSet) -> int:
    """Number of distinct positive traces ``N(b) & A`` over all ``b``."""
    am = A.mask
    return len({row & am for row in G.rows})


# -- edge-list I/O ----------------------------------------------------------


class EdgeListError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def load_edge_list(text: str | io.TextIOBase) -> Graph:
    """Parse ``u v`` lines (0-based) with optional ``n <count>`` header."""
    lines = text.splitlines() if isinstance(text, str) else text.read().splitlines()
    declared: int | None = None
    edges: list[tuple[int, int]] = []
    seen_data = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] == "n" and not seen_data and declared is None:
            if len(tokens) != 2:
                raise EdgeListError(lineno, "header must be 'n <count>'")
            try:
                declared = int(tokens[1])
            except ValueError:
                raise EdgeListError(lineno, f"non-integer token {tokens[1]!r}") from None
            if declared < 0:
                raise EdgeListError(lineno, "negative vertex count")
            continue
        seen_data = True
        if len(tokens) != 2:
            raise EdgeListError(lineno, f"expected 'u v', got {line!r}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            bad = next(t for t in tokens if not t.lstrip("-").isdigit())
            raise EdgeListError(lineno, f"non-integer token {bad!r}") from None
        if u < 0 or v < 0:
            raise EdgeListError(lineno, "negative vertex id")
        if u == v:
            raise EdgeListError(lineno, f"self-loop at vertex {u}")
        if declared is not None and max(u, v) >= declared:
            raise EdgeListError(lineno, f"vertex id {max(u, v)} >= declared n={declared}")
        edges.append((u, v))
    if declared is None:
        declared = max((max(e) for e in edges), default=-1) + 1
    return Graph.from_edges(declared, edges)


def dump_edge_list(G: Graph) -> str:
    out = [f"n {G.n}"]
    out.extend(f"{u} {v}" for u, v in G.edges())
    return "\n".join(out) + "\n"


def read_graph(path: str) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh.read())


def write_graph(G: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_edge_list(G))
