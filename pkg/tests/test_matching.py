import random

import networkx as nx
from hypothesis import given, settings, strategies as st

from treesos.graph import Graph
from treesos.matching import bipartite_matching, graph_max_matching


@settings(max_examples=80)
@given(st.integers(1, 16), st.floats(0, 1), st.integers(0, 2**32))
def test_max_matching_size_matches_networkx(n, p, seed):
    rng = random.Random(seed)
    G = Graph(n, [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p])
    M = graph_max_matching(G)
    used = [v for e in M for v in e]
    assert len(used) == len(set(used)) and all(G.has_edge(a, b) for a, b in M)
    H = nx.Graph()
    H.add_nodes_from(range(n))
    H.add_edges_from(G.edges())
    assert len(M) == len(nx.max_weight_matching(H, maxcardinality=True))


def test_odd_cycle_blossom():
    G = Graph(7, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5), (5, 6)])
    assert len(graph_max_matching(G)) == 3


def test_bipartite_matching_perfect():
    nbrs = [[0, 1], [0], [2]]
    m = bipartite_matching(3, nbrs, 3)
    assert sorted(m) == [0, 1, 2] and m[1] == 0
