import random
from fractions import Fraction

import pytest

from treesos.errors import PathShortfall, PreconditionError
from treesos.extremal import (degree_profile, embed_almost_complete, embed_almost_complete_bipartite,
                              perturbed_complete, perturbed_complete_bipartite, reserve_high_degree_set,
                              short_connecting_paths)
from treesos.graph import Bipartition, Graph, complete_bipartite, complete_graph, cycle_graph
from treesos.report import StageLog
from treesos.trees import RootedTree, random_tree


def test_short_paths_count_direct_common_and_matched():
    # x=0, y=1: direct edge, common neighbour 2, and 3-4 matched through the edge 3-4
    G = Graph(5, [(0, 1), (0, 2), (1, 2), (0, 3), (3, 4), (4, 1)])
    paths = short_connecting_paths(G, 0, 1)
    assert sorted(map(len, paths)) == [2, 3, 4]
    with pytest.raises(PathShortfall):
        short_connecting_paths(G, 0, 1, avoid=[2], want=3)
    assert len(short_connecting_paths(cycle_graph(6), 0, 3)) == 2


def test_degree_profile_and_reserve():
    k, eps = 40, Fraction(1, 20)
    G = perturbed_complete(k, random.Random(5), eps, low=2)
    prof = degree_profile(G, k, eps)
    assert len(prof.X) >= 2
    assert all(G.degree(y) >= k for y in prof.Y)
    Yp, Z = reserve_high_degree_set(G, prof, k, eps, StageLog(strict=False))
    assert prof.v_star not in Yp and set(Yp) <= set(prof.Y)


@pytest.mark.parametrize("seed", range(6))
def test_almost_complete_on_perturbed_hosts(seed):
    rng = random.Random(seed)
    k = 120
    G = perturbed_complete(k, rng, Fraction(1, 20), low=rng.randint(0, 2))
    T = random_tree(k, rng, 3)
    emb = embed_almost_complete(G, k, T, Fraction(1, 20), degree_bound=3, check=False)
    assert emb.route == "almost-complete"
    assert "fallback" in emb.notes


def test_almost_complete_rejects_sparse_host():
    with pytest.raises(PreconditionError):
        embed_almost_complete(complete_graph(10), 10, RootedTree.path(10), check=False)


def test_bipartite_embedder_on_exact_and_perturbed_hosts():
    k, Delta = 32, 2
    G = complete_bipartite(k, k)
    P = Bipartition(range(k), range(k, 2 * k))
    for T in (RootedTree.path(k), RootedTree.spider(2, k // 2)):
        emb = embed_almost_complete_bipartite(G, P, k, Delta, T)
        assert emb.route == "almost-complete-bipartite"
    rng = random.Random(2)
    for _ in range(5):
        G, P = perturbed_complete_bipartite(k, Delta, rng)
        embed_almost_complete_bipartite(G, P, k, Delta, random_tree(k, rng, Delta), check=False)


def test_bipartite_embedder_checks_hypotheses():
    G = complete_bipartite(8, 8)
    with pytest.raises(PreconditionError, match="8 Delta"):
        embed_almost_complete_bipartite(G, Bipartition(range(8), range(8, 16)), 8, 2, RootedTree.path(8))
