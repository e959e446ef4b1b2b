import random
from fractions import Fraction

import pytest

from treesos.embedding import (Embedding, backtracking_embed, embedding_problems, greedy_embed_h,
                               near_complete_embed, verify_embedding)
from treesos.errors import BudgetExhausted, ContractViolation, PreconditionError
from treesos.graph import Graph, complete_bipartite, complete_graph
from treesos.trees import RootedTree, enumerate_trees, random_tree


def test_verifier_catches_bad_maps():
    T, G = RootedTree.path(2), complete_graph(3)
    verify_embedding(T, G, {0: 0, 1: 1, 2: 2})
    assert embedding_problems(T, G, {0: 0, 1: 0, 2: 2})
    with pytest.raises(ContractViolation):
        verify_embedding(T, Graph(3, [(0, 1)]), {0: 0, 1: 1, 2: 2})


def test_backtracking_exact_on_extremal_graphs():
    assert backtracking_embed(RootedTree.star(4), complete_bipartite(3, 3)) is None
    assert backtracking_embed(RootedTree.path(4), complete_bipartite(3, 3)) is not None
    for T in enumerate_trees(5, 5):
        assert backtracking_embed(T, complete_graph(5)) is None
        assert backtracking_embed(T, complete_graph(6)) is not None


def test_backtracking_respects_pins_and_budget():
    emb = backtracking_embed(RootedTree.path(3), complete_graph(5), pins={0: 4})
    assert emb.mapping[0] == 4
    with pytest.raises(BudgetExhausted):
        backtracking_embed(RootedTree.path(20), complete_bipartite(10, 11), budget=5)


def test_greedy_h_under_hypotheses():
    rng = random.Random(0)
    for _ in range(20):
        k = rng.randint(3, 15)
        T = random_tree(k, rng, 3)
        emb = greedy_embed_h(T, complete_graph(k + 2), 0, 0)
        verify_embedding(T, complete_graph(k + 2), emb)


def test_greedy_h_rejects_low_degree_host():
    with pytest.raises(PreconditionError):
        greedy_embed_h(RootedTree.star(5), complete_graph(4).induced([0, 1, 2]), 0, 0)


def test_near_complete_spanning():
    T = RootedTree.caterpillar(10, 3)
    H = complete_graph(T.n)
    emb = near_complete_embed(T, H, 0, Fraction(1, 400), check=False)
    verify_embedding(T, H, emb)
    assert isinstance(emb, Embedding)
