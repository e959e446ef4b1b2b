import random
from fractions import Fraction

import pytest

from treesos.dense import (balance_components, embed_avg_boost, embed_bip_reduced, embed_dispatch,
                           embed_linear_degree, embed_nonbip_dense, find_structure, nonbip_matching_predicate,
                           nonbip_structure, verify_balance, verify_structure)
from treesos.errors import PreconditionError
from treesos.exact import Surd
from treesos.graph import Graph, complete_bipartite, complete_graph, disjoint_union
from treesos.regularity import build_reduced, refine_partition
from treesos.report import Config, StageLog
from treesos.trees import RootedTree, random_tree


def test_balance_examples():
    items = [(2, 1), (1, 2), (0, 3)]
    J = balance_components(items, 3, 3)
    assert J == [0]
    assert verify_balance(items, J, 3, 3)["all"]
    M = Surd(4, -1, Fraction(1, 4), 2)  # 4 - 1/2
    assert verify_balance(items, balance_components(items, M, 3), M, 3)["all"]
    with pytest.raises(PreconditionError):
        balance_components(items, -1, 3)
    with pytest.raises(PreconditionError):
        balance_components([(3, 1)], 5, 3)


def _blowup_c5(m):
    # five independent clusters of size m joined cyclically
    return Graph(5 * m, [(a, b) for a in range(5 * m) for b in range(a + 1, 5 * m)
                         if (b // m - a // m) % 5 in (1, 4)])


def test_structure_certificate_is_verified():
    G = complete_graph(64)
    G1, P = refine_partition(G, Fraction(1, 4), Fraction(1, 10), enforce=False)
    G2, P2, cert = find_structure(G1, P, 32, Fraction(1, 4), check=False, log=StageLog(False))
    R = build_reduced(P2).graph
    props = verify_structure(R, cert)
    assert props["matchings_valid"] and props["I_disjoint"]


@pytest.mark.parametrize("T", [RootedTree.path(64), RootedTree.spider(4, 16)], ids=["path", "spider"])
def test_linear_degree_on_complete_host(T):
    emb = embed_linear_degree(complete_graph(128), 64, Fraction(1, 4), T, config=Config(eps=Fraction(1, 4)))
    assert emb.notes.get("fallback") is not True
    assert "invariants" in emb.notes


def test_avg_boost_deletion_branch():
    import networkx as nx
    H = nx.random_regular_graph(26, 60, seed=1)
    G = Graph(60, list(H.edges()))
    for T in (RootedTree.path(20), RootedTree.star(20)):
        emb = embed_avg_boost(G, 20, Fraction(1, 4), T, inner_delta=Fraction(1, 2))
        assert emb.notes["branch"] == "deletion"
        assert not emb.notes.get("fallback")


def _nonbip_host(h):
    I, V1, V2 = range(2 * h), range(2 * h, 3 * h), range(3 * h, 4 * h)
    E = [(i, v) for i in I for v in V1] + [(a, b) for S in (V1, V2) for a in S for b in S if a < b]
    E += [(a, b) for a in V1 for b in V2]
    return Graph(4 * h, E)


def test_nonbip_structure_and_embedding():
    G = _nonbip_host(16)
    G1, P = refine_partition(G, Fraction(1, 8), Fraction(1, 100), enforce=False)
    assert build_reduced(P).graph.two_colouring() is None
    ns = nonbip_structure(G1, P, 32, eta=Fraction(1, 100))
    labels = ns.graph.labels
    assert all(labels[x] < 32 for x in ns.I)
    assert ns.properties["b"]
    for T in (RootedTree.path(32), RootedTree.spider(4, 8), random_tree(32, random.Random(0), 3)):
        emb = embed_nonbip_dense(G, ns, Fraction(1, 4), T)
        assert not emb.notes.get("fallback")


def test_bip_reduced_branches():
    G = complete_bipartite(30, 30)
    G1, P = refine_partition(G, Fraction(1, 4), Fraction(1, 100), enforce=False)
    branches = {}
    for name, T in (("star", RootedTree.star(24)), ("path", RootedTree.path(24))):
        emb = embed_bip_reduced(G1, P, 24, Fraction(1, 4), T)
        assert not emb.notes.get("fallback")
        branches[name] = emb.notes["branch"]
    assert branches == {"star": "direct", "path": "V_A"}


def test_dispatch_on_two_cliques_uses_component_greedy():
    r = embed_dispatch(disjoint_union([complete_graph(13)] * 2), 12, 3, Config(eps=Fraction(1, 4)))
    assert r["all_ok"] and r["fallbacks"] == 0


def test_dispatch_on_bridged_cliques():
    a = complete_graph(12)
    E = list(a.edges()) + [(u + 12, v + 12) for u, v in a.edges()] + [(0, 12)]
    r = embed_dispatch(Graph(24, E), 11, 3, Config(eps=Fraction(1, 4)))
    assert r["all_ok"]


def test_dispatch_reports_the_missing_star_in_extremal_host():
    k = 6
    r = embed_dispatch(complete_bipartite(k - 1, k - 1), k, k, Config(eps=Fraction(1, 4)))
    bad = [x["tree"] for x in r["results"] if not x["ok"]]
    assert bad == ["(" + "()" * k + ")"]
    assert not r["all_ok"]


def test_nonbip_matching_predicate():
    # K_5 plus a disjoint bipartite edge; only the triangle-rich component is reported
    R = Graph(7, [(a, b) for a in range(5) for b in range(a + 1, 5)] + [(5, 6)])
    rows = nonbip_matching_predicate(R, 4, 28, Fraction(1, 10 ** 6))
    assert [(r["clusters"], r["matching"], r["holds"]) for r in rows] == [(5, 2, True)]
    assert not nonbip_matching_predicate(R, 4, 28, Fraction(1, 4))[0]["holds"]


def test_nonbip_structure_reports_missing_independent_set_in_clique():
    G = complete_graph(64)
    G1, P = refine_partition(G, Fraction(1, 8), Fraction(1, 100), enforce=False)
    ns = nonbip_structure(G1, P, 32, eta=Fraction(1, 100))
    assert not ns.properties["b"] and not ns.properties["all"]
