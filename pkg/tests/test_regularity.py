import random
from fractions import Fraction

import pytest

from treesos.errors import PreconditionError, RefinementError
from treesos.graph import Graph, complete_bipartite
from treesos.regularity import (RegularPartition, build_reduced, check_regular_pair, find_matching_structure,
                                matching_structure, pair_density, refine_partition, regular_pair_tree_embed,
                                typical_vertices, verify_matching_structure)
from treesos.report import StageLog
from treesos.trees import RootedTree, random_tree


def _gnp(n, p, seed):
    rng = random.Random(seed)
    return Graph(n, [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p])


def _random_pair(m, seed):
    rng = random.Random(seed)
    return Graph(2 * m, [(a, m + b) for a in range(m) for b in range(m) if rng.random() < 0.5])


def test_complete_and_empty_pairs_are_trivially_regular():
    G = complete_bipartite(5, 5)
    A, B = range(5), range(5, 10)
    v = check_regular_pair(G, A, B, Fraction(1, 4))
    assert (v.status, v.mode, v.density) == ("certified", "trivial", 1)
    assert check_regular_pair(Graph(10), A, B, Fraction(1, 4)).density == 0


def test_witness_is_reverified():
    G = _random_pair(12, 3)
    A, B = list(range(12)), list(range(12, 24))
    v = check_regular_pair(G, A, B, Fraction(1, 4))
    assert v.status == "witness"
    X, Y = v.witness
    assert len(X) > 3 and len(Y) > 3
    assert abs(pair_density(G, X, Y) - v.density) >= Fraction(1, 4)


def test_half_graph_fails_and_large_eps_passes():
    m = 8
    half = Graph(2 * m, [(a, m + b) for a in range(m) for b in range(m) if a <= b])
    A, B = range(m), range(m, 2 * m)
    assert check_regular_pair(half, A, B, Fraction(1, 4)).status == "witness"
    assert check_regular_pair(half, A, B, Fraction(9, 10)).status == "certified"


def test_exhaustive_bound_and_sampled_mode():
    G = _random_pair(20, 0)
    A, B = range(20), range(20, 40)
    with pytest.raises(PreconditionError):
        check_regular_pair(G, A, B, Fraction(1, 4), bound=16)
    v = check_regular_pair(G, A, B, Fraction(1, 4), mode="sampled", trials=500)
    assert v.status in ("heuristic", "witness")


def test_typical_vertices():
    G = complete_bipartite(6, 6)
    A, B = list(range(6)), list(range(6, 12))
    assert typical_vertices(G, A, B[:3], 1, Fraction(1, 4), B=B, certified=True) == A
    with pytest.raises(PreconditionError):
        typical_vertices(G, A, B[:1], 1, Fraction(1, 4), B=B)


def test_refinement_structure_and_round_trip():
    G = _gnp(64, Fraction(1, 2), 0)
    G1, P = refine_partition(G, Fraction(1, 4), Fraction(1, 2), enforce=False)
    P.validate(G1)
    assert P.report["exceptional_ok"] and P.report["loss_ok"]
    clustered = {G1.labels[x] for c in P.clusters for x in c}
    assert clustered.isdisjoint(P.exceptional) and len(clustered) + len(P.exceptional) == 64
    Q = RegularPartition.from_json(P.to_json())
    assert Q.to_json() == P.to_json()
    R = build_reduced(P, G=G1)
    assert R.graph.n == P.size


def test_refinement_loss_at_small_eta_is_reported():
    # at 64 vertices the cleaned graph loses more than (eta + eps) n for eta = 1/10
    G = _gnp(64, Fraction(1, 2), 0)
    G1, P = refine_partition(G, Fraction(1, 4), Fraction(1, 10), enforce=False)
    P.validate(G1)
    assert P.report["exceptional_ok"]
    assert not P.report["loss_ok"]
    assert P.report["max_degree_loss"] > P.report["loss_bound"]
    with pytest.raises(RefinementError):
        refine_partition(G, Fraction(1, 4), Fraction(1, 10))


def test_refinement_keeps_a_clean_blowup():
    # blow-up of a 4-cycle: every pair is complete or empty
    m = 16
    edges = [(a, b) for a in range(64) for b in range(64) if a < b and (b // m - a // m) % 2 == 1]
    G = Graph(64, edges)
    G1, P = refine_partition(G, Fraction(1, 4), Fraction(1, 10))
    assert P.report["max_degree_loss"] == 0 and P.report["irregular_pairs_removed"] == 0
    assert G1.edge_count == G.edge_count


def test_matching_structure_on_blowup():
    m = 16
    edges = [(a, b) for a in range(64) for b in range(64) if a < b and (b // m - a // m) % 2 == 1]
    G = Graph(64, edges)
    G1, P = refine_partition(G, Fraction(1, 4), Fraction(1, 10))
    G2, P2, ms = matching_structure(G1, P, 16)
    assert ms.properties["all"]
    R = build_reduced(P2).graph
    assert verify_matching_structure(R, ms, P2.cluster_size, 16)["all"]


def test_matching_structure_prefers_large_independent_set():
    R = Graph(6, [(0, 1), (2, 3), (4, 5), (0, 2)])
    ms = find_matching_structure(R, prefer_large_independent=True)
    assert verify_matching_structure(R, ms, 1, 1)["all"]
    assert len(ms.independent) >= len(find_matching_structure(R).independent)


def test_regular_pair_embed_literal_scale():
    m, eps = 64, Fraction(1, 25)
    G = complete_bipartite(m, m)
    A, B = list(range(m)), list(range(m, 2 * m))
    # |T| <= eps m leaves room for two vertices only
    for root_side in ("A", "B"):
        T = RootedTree.path(1)
        emb = regular_pair_tree_embed(G, A, B, A, B, [], T, eps, root_side=root_side)
        assert emb.notes["moreover_holds"]
        assert emb.notes["min_candidates"] >= 2 * eps * m


def test_regular_pair_embed_larger_trees_keep_candidate_floor():
    m, eps = 64, Fraction(1, 25)
    G = complete_bipartite(m, m)
    A, B = list(range(m)), list(range(m, 2 * m))
    rng = random.Random(1)
    for _ in range(20):
        T = random_tree(rng.randint(3, 30), rng, 4)
        log = StageLog(strict=False)
        emb = regular_pair_tree_embed(G, A, B, A, B, [], T, eps, log=log)
        assert emb.notes["min_candidates"] >= 2 * eps * m


def _brute_regular(G, A, B, eps):
    from itertools import combinations
    d = pair_density(G, A, B)
    for a in range(1, len(A) + 1):
        if not a > eps * len(A):
            continue
        for X in combinations(A, a):
            for b in range(1, len(B) + 1):
                if not b > eps * len(B):
                    continue
                for Y in combinations(B, b):
                    if abs(pair_density(G, X, Y) - d) >= eps:
                        return False
    return True


def test_exhaustive_checker_matches_brute_force():
    rng = random.Random(17)
    for _ in range(150):
        m = rng.randint(2, 5)
        p = rng.random()
        G = Graph(2 * m, [(a, m + b) for a in range(m) for b in range(m) if rng.random() < p])
        A, B = list(range(m)), list(range(m, 2 * m))
        eps = Fraction(1, rng.randint(2, 6))
        if pair_density(G, A, B) in (0, 1):
            continue
        v = check_regular_pair(G, A, B, eps)
        assert (v.status == "certified") == _brute_regular(G, A, B, eps)


def test_random_half_density_pairs_at_m12_have_witnesses():
    # quarter-size subsets of a 12 x 12 random pair deviate by 1/4 in every sampled graph
    found = sum(check_regular_pair(_random_pair(12, s), range(12), range(12, 24), Fraction(1, 4)).status == "witness"
                for s in range(20))
    assert found == 20
