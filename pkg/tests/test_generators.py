from fractions import Fraction

import numpy as np
import pytest

from stablereg import generators

from stablereg.generators import (FamilySpec, TREE_EXAMPLE_IDS, complete_multipartite, erdos_renyi, half_graph,
                                  oracle_corpus, planted_half_graph, random_clique_sizes, rng_for,
                                  special_tree_example, union_of_cliques)
from stablereg.graph import Graph
from stablereg.witness import find_half_graph


def test_half_graph_shapes():
    assert half_graph(1).n == 2 and half_graph(1).edge_count == 0
    assert list(half_graph(2).edges()) == [(0, 3)]
    assert half_graph(5).edge_count == 10
    with pytest.raises(ValueError):
        half_graph(0)


def test_cliques_and_multipartite():
    assert union_of_cliques([3]).edge_count == 3
    G = union_of_cliques([3, 3, 3])
    assert (G.n, G.edge_count) == (9, 9)
    assert union_of_cliques([1, 1]).edge_count == 0
    assert complete_multipartite([3, 3]).edge_count == 9
    assert complete_multipartite([1, 1, 1]).rows == union_of_cliques([3]).rows
    assert complete_multipartite([2, 2, 2]).edge_count == 12
    for f in (union_of_cliques, complete_multipartite):
        with pytest.raises(ValueError):
            f([])


def test_erdos_renyi_extremes_and_determinism():
    assert erdos_renyi(5, 0, 3).edge_count == 0
    assert erdos_renyi(5, 1, 3).edge_count == 10
    assert erdos_renyi(100, Fraction(1, 2), 7).rows == erdos_renyi(100, Fraction(1, 2), 7).rows
    assert erdos_renyi(100, Fraction(1, 2), 7).rows != erdos_renyi(100, Fraction(1, 2), 8).rows


@pytest.mark.parametrize("block", [1 << 22, 37, 1])
def test_erdos_renyi_blocks_follow_one_row_major_stream(monkeypatch, block):
    # reference: one draw per pair u < v in row-major order, from a single call
    monkeypatch.setattr(generators, "ER_BLOCK_PAIRS", block)
    for n, p, seed in [(1, Fraction(1, 2), 1), (9, Fraction(1, 3), 2), (70, Fraction(1, 2), 5)]:
        keep = rng_for(seed).integers(0, p.denominator, size=n * (n - 1) // 2, dtype=np.int64) < p.numerator
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        expected = Graph.from_edges(n, [e for e, k in zip(pairs, keep.tolist()) if k])
        assert erdos_renyi(n, p, seed).rows == expected.rows


def test_rng_streams_are_reproducible_and_independent():
    assert rng_for(5, 1, 2).integers(0, 2**32, 4).tolist() == rng_for(5, 1, 2).integers(0, 2**32, 4).tolist()
    assert rng_for(5, 1, 2).integers(0, 2**32, 4).tolist() != rng_for(5, 1, 3).integers(0, 2**32, 4).tolist()


def test_special_tree_example_constraints():
    G = special_tree_example()
    ids = TREE_EXAMPLE_IDS
    assert (G.n, G.edge_count) == (7, 4)
    edges = {("b", "a11"), ("b", "a10"), ("b1", "a11"), ("b0", "a01")}
    non_edges = {("b", "a00"), ("b", "a01"), ("b1", "a10"), ("b0", "a00")}
    for u, v in edges:
        assert G.adjacent(ids[u], ids[v])
    for u, v in non_edges:
        assert not G.adjacent(ids[u], ids[v])


def test_planted_half_graph_in_empty_graph():
    P = planted_half_graph(Graph(6, [0] * 6), 3, seed=1)
    assert P.graph.edge_count == 3
    assert all(P.graph.adjacent(P.a[i], P.b[j]) == (i < j) for i in range(3) for j in range(3))


def test_planted_half_graph_in_complete_graph():
    # length 2 forces the three non-edges a1b1, a2b1, a2b2 (only a1b2 stays)
    P = planted_half_graph(union_of_cliques([6]), 2, seed=4)
    assert P.graph.edge_count == 15 - 3
    assert find_half_graph(P.graph, 2).found


def test_planted_is_deterministic_per_seed():
    base = erdos_renyi(20, Fraction(1, 3), 1)
    assert planted_half_graph(base, 4, 9).graph.rows == planted_half_graph(base, 4, 9).graph.rows


def test_random_clique_sizes_sum_and_range():
    sizes = random_clique_sizes(30000, 1)
    assert sum(sizes) == 30000 and all(s >= 1 for s in sizes)
    assert sizes == random_clique_sizes(30000, 1)


def test_family_spec_validation():
    with pytest.raises(ValueError):
        FamilySpec("nope")
    with pytest.raises(ValueError):
        FamilySpec("gnp", n=5, p=Fraction(3, 2))
    assert FamilySpec("half-graph", k=3).build().rows == half_graph(3).rows


def test_oracle_corpus_is_deterministic_and_small():
    corpus = oracle_corpus()
    assert len(corpus) == 200 and all(G.n <= 10 for _, G in corpus)
    assert [G.rows for _, G in corpus] == [G.rows for _, G in oracle_corpus()]


def test_three_cliques_have_length_two_but_not_three():
    G = union_of_cliques([3, 3, 3])
    assert find_half_graph(G, 2).found and find_half_graph(G, 3).absent
    assert find_half_graph(union_of_cliques([3, 3]), 2).absent
