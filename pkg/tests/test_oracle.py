import random
from itertools import combinations

import networkx as nx
import pytest
from networkx.algorithms.isomorphism import GraphMatcher

from treesos.errors import PreconditionError
from treesos.formats import to_graph6
from treesos.graph import Graph, complete_bipartite, complete_graph
from treesos.oracle import (admissible_k, all_graphs, canonical_code, contains_tree, graph_counts,
                            ramsey_sample_check, self_test, verify_erdos_sos)
from treesos.trees import RootedTree, enumerate_trees, random_tree

# number of unlabelled graphs on n vertices, n = 1..7; cross-checked against the networkx atlas below
COUNTS_TO_7 = [1, 2, 4, 11, 34, 156, 1044]


def _nx(G):
    H = nx.Graph()
    H.add_nodes_from(range(G.n))
    H.add_edges_from(G.edges())
    return H


def _random_graph(rng, n):
    return Graph(n, [e for e in combinations(range(n), 2) if rng.random() < rng.random()])


def test_counts_match_frozen_values():
    assert graph_counts(7) == COUNTS_TO_7


def test_enumeration_matches_atlas():
    atlas = {}
    for H in nx.graph_atlas_g():
        G = Graph(H.number_of_nodes(), list(H.edges()))
        if G.n:
            atlas.setdefault(G.n, set()).add(canonical_code(G))
    for n in range(1, 8):
        ours = {canonical_code(G) for G in all_graphs(n)}
        assert ours == atlas[n]


def test_canonical_code_is_an_isomorphism_invariant():
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(1, 10)
        G = _random_graph(rng, n)
        perm = list(range(n))
        rng.shuffle(perm)
        H = Graph(n, [(perm[a], perm[b]) for a, b in G.edges()])
        assert canonical_code(G) == canonical_code(H)


def test_canonical_code_separates_non_isomorphic_graphs():
    rng = random.Random(11)
    for _ in range(300):
        n = rng.randint(4, 9)
        G, H = _random_graph(rng, n), _random_graph(rng, n)
        assert (canonical_code(G) == canonical_code(H)) == nx.is_isomorphic(_nx(G), _nx(H))


def test_regular_graphs_with_many_twins():
    for G in (complete_graph(9), complete_bipartite(4, 5), Graph(10)):
        perm = list(range(G.n))
        random.Random(0).shuffle(perm)
        H = Graph(G.n, [(perm[a], perm[b]) for a, b in G.edges()])
        assert canonical_code(G) == canonical_code(H)
    petersen = nx.petersen_graph()
    P = Graph(10, list(petersen.edges()))
    Q = Graph(10, list(nx.relabel_nodes(petersen, {i: (3 * i + 1) % 10 for i in range(10)}).edges()))
    assert canonical_code(P) == canonical_code(Q)


def test_contains_tree_agrees_with_networkx_monomorphism():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(2, 8)
        G = _random_graph(rng, n)
        T = random_tree(rng.randint(1, n - 1), rng)
        expected = GraphMatcher(_nx(G), _nx(T.to_graph())).subgraph_is_monomorphic()
        assert contains_tree(G, T) == expected


def test_extremal_hosts():
    for k in range(2, 7):
        for T in enumerate_trees(k, k):
            assert not contains_tree(complete_graph(k), T)
        assert not contains_tree(complete_bipartite(k - 1, k - 1), RootedTree.star(k))


def test_admissible_k_uses_strict_inequality():
    assert admissible_k(complete_graph(4)) == [1, 2, 3]
    assert 4 not in admissible_k(complete_bipartite(3, 3))


def test_doctored_graph_is_refused():
    out = self_test()
    assert out["detected"] and 4 in out["claimed_k"]


def test_graph6_corpus_source_deduplicates():
    lines = [to_graph6(complete_graph(4)), to_graph6(Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)])),
             to_graph6(complete_bipartite(2, 3)), ""]
    out = verify_erdos_sos(source="graph6-corpus", corpus=lines)
    assert out["graphs"] == 2 and out["counterexamples"] == []
    assert out["runtime"] is None


def test_small_sweep():
    out = verify_erdos_sos(5)
    assert out["graphs"] == sum(COUNTS_TO_7[:5])
    assert out["counterexamples"] == [] and out["verified"] == out["instances"]
    with pytest.raises(PreconditionError):
        verify_erdos_sos(9)


def test_ramsey_small_cases():
    out = ramsey_sample_check(2, 1, 1, samples=10)
    assert out["passed"] == 10 and out["n"] == 2
    with pytest.raises(PreconditionError):
        ramsey_sample_check(2, 8, 3)
    assert ramsey_sample_check(2, 3, 2, samples=5, seed=1) == ramsey_sample_check(2, 3, 2, samples=5, seed=1)


def test_oracle_guard_budget():
    from treesos.errors import BudgetExhausted
    with pytest.raises(BudgetExhausted):
        contains_tree(complete_bipartite(7, 8), RootedTree.path(14), budget=10)
