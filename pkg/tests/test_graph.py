import random
from fractions import Fraction

import networkx as nx
import pytest

from treesos.errors import GraphInvariantError, PreconditionError
from treesos.graph import (Bipartition, Graph, average_degree_exceeds, best_bipartition, complete_bipartite,
                           complete_graph, disjoint_union, generate_extremal, intra_edges, peel_min_degree)


def _random_graph(rng, n, p):
    return Graph(n, [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p])


def test_validate_catches_doctored_edge_count():
    G = Graph.from_adjacency(list(complete_graph(4).adj), edge_count=10, validate=False)
    with pytest.raises(GraphInvariantError):
        G.validate()


def test_asymmetric_adjacency_rejected():
    with pytest.raises(GraphInvariantError):
        Graph.from_adjacency([0b10, 0])


def test_loops_rejected():
    with pytest.raises(GraphInvariantError):
        Graph(2, [(1, 1)])


def test_degrees_and_edges_agree_with_networkx():
    rng = random.Random(1)
    for _ in range(30):
        G = _random_graph(rng, rng.randint(1, 14), rng.random())
        H = nx.Graph()
        H.add_nodes_from(range(G.n))
        H.add_edges_from(G.edges())
        assert G.edge_count == H.number_of_edges()
        assert list(G.degrees) == [d for _, d in sorted(H.degree())]
        assert sorted(map(sorted, G.components())) == sorted(sorted(c) for c in nx.connected_components(H))
        assert (G.two_colouring() is not None) == nx.is_bipartite(H)


def test_induced_relabels_and_keeps_labels():
    G = complete_graph(5)
    H = G.induced([4, 2, 0])
    assert H.labels == (4, 2, 0) and H.edge_count == 3
    assert H.induced([2, 1]).labels == (0, 2)


def test_average_degree_exact():
    G = complete_graph(4)
    assert G.average_degree() == 3
    # d(K_4) = 3 is exactly k - 1 at k = 4
    assert average_degree_exceeds(G, 3) and not average_degree_exceeds(G, 4)


def test_peel_keeps_min_degree():
    rng = random.Random(2)
    for _ in range(20):
        G = _random_graph(rng, 20, 0.4)
        thr = Fraction(rng.randint(1, 12), 2)
        H = peel_min_degree(G, thr)
        assert H.n == 0 or H.min_degree() >= thr


def test_peel_keeps_average_degree_above_half_threshold():
    # deleting a vertex of degree <= d/2 cannot lower the average degree d
    G = disjoint_union([complete_graph(6), Graph(4, [(0, 1)])])
    H = peel_min_degree(G, Fraction(5, 2))
    assert H.n == 6 and H.average_degree() >= G.average_degree()


def test_best_bipartition_on_bipartite_graph():
    G = complete_bipartite(4, 5)
    P = best_bipartition(G)
    assert intra_edges(G, P) == 0
    assert sorted([len(P.A), len(P.B)]) == [4, 5]


def test_extremal_generators():
    assert generate_extremal("clique", 5).edge_count == 10
    assert generate_extremal("balanced-bipartite", 4).edge_count == 9
    U = generate_extremal("disjoint-union-list", 3, [("clique", 3), ("balanced-bipartite", 3)])
    assert U.n == 7 and U.edge_count == 3 + 4
    with pytest.raises(PreconditionError):
        generate_extremal("clique", 1)
    with pytest.raises(ValueError):
        generate_extremal("wheel", 4)
