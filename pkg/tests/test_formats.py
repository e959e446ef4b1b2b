import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from treesos.errors import FormatError
from treesos.formats import from_edgelist, from_graph6, read_graph, read_graph6_lines, to_edgelist, to_graph6
from treesos.graph import Graph, complete_bipartite


def test_k33_graph6():
    assert to_graph6(complete_bipartite(3, 3)) == "EFz_"


@settings(max_examples=60)
@given(st.integers(0, 70), st.integers(0, 2**32))
def test_graph6_round_trip_matches_networkx(n, seed):
    rng = random.Random(seed)
    G = Graph(n, [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.3])
    s = to_graph6(G)
    assert from_graph6(s) == G
    H = nx.Graph()
    H.add_nodes_from(range(n))
    H.add_edges_from(G.edges())
    assert nx.to_graph6_bytes(H, header=False).decode().strip() == s


@pytest.mark.parametrize("bad", ["", "E~~~~~", "E\x01", "EFz"])
def test_graph6_errors(bad):
    with pytest.raises(FormatError):
        from_graph6(bad)


def test_edgelist_round_trip_and_errors():
    G = complete_bipartite(2, 3)
    assert from_edgelist(to_edgelist(G)) == G
    with pytest.raises(FormatError):
        from_edgelist("3 2\n0 1\n")
    with pytest.raises(FormatError):
        from_edgelist("3 2\n0 1\n1 0\n")
    assert read_graph(to_edgelist(G)) == G
    assert read_graph("EFz_") == complete_bipartite(3, 3)


def test_corpus_reader_reports_line():
    with pytest.raises(FormatError, match="line 2"):
        list(read_graph6_lines(["EFz_", "?!!"]))
