import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from treesos.errors import ContractViolation, PreconditionError
from treesos.trees import (CutCertificate, RootedTree, canonical_form, colour_classes, cut_set, enumerate_trees,
                           even_cut_set, find_cut_subtree, leaves_or_bare_paths, random_tree, tree_from_code,
                           verify_bare, verify_cut_set, verify_cut_subtree)

# free trees by number of edges (all degrees / max degree 3), frozen from
# the networkx generator in test_counts_match_networkx
ALL_COUNTS = [1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551, 1301]
DEG3_COUNTS = [1, 1, 2, 2, 4, 6, 11, 18, 37, 66, 135, 265]


def test_counts_frozen():
    assert [sum(1 for _ in enumerate_trees(k, k)) for k in range(1, 13)] == ALL_COUNTS
    assert [sum(1 for _ in enumerate_trees(k, 3)) for k in range(1, 13)] == DEG3_COUNTS


def test_counts_match_networkx():
    for k in range(1, 11):
        trees = list(nx.nonisomorphic_trees(k + 1))
        assert len(trees) == ALL_COUNTS[k - 1]
        assert sum(1 for t in trees if max(d for _, d in t.degree()) <= 3) == DEG3_COUNTS[k - 1]


def test_enumeration_has_no_duplicates():
    for k in range(1, 10):
        forms = [canonical_form(T) for T in enumerate_trees(k, k)]
        assert len(forms) == len(set(forms))


@settings(max_examples=80)
@given(st.integers(1, 60), st.integers(0, 2**32))
def test_canonical_form_ignores_labels_and_root(k, seed):
    rng = random.Random(seed)
    T = random_tree(k, rng)
    perm = list(range(T.n))
    rng.shuffle(perm)
    edges = [(perm[a], perm[b]) for a, b in T.edges()]
    U = RootedTree.from_edges(T.n, edges, root=rng.randrange(T.n))
    assert canonical_form(U) == canonical_form(T)
    assert canonical_form(tree_from_code(canonical_form(T))) == canonical_form(T)


def test_random_tree_respects_degree():
    rng = random.Random(3)
    for _ in range(50):
        T = random_tree(rng.randint(1, 80), rng, 3)
        assert T.max_degree() <= 3 and T.n == T.k + 1


def test_text_round_trip_and_errors():
    T = RootedTree.spider(3, 2)
    assert RootedTree.from_text(T.to_text()) == T
    with pytest.raises(Exception):
        RootedTree.from_text("2 0 -1 0 1 5")


def test_rerooted_keeps_ids():
    T = RootedTree.path(4)
    R = T.rerooted(2)
    assert R.root == 2 and sorted(map(sorted, R.edges())) == sorted(map(sorted, T.edges()))


def test_colour_classes_of_path():
    C, D = colour_classes(RootedTree.path(4))
    assert 0 in C and len(C) == 3 and len(D) == 2


def test_cut_subtree_size_guard():
    with pytest.raises(PreconditionError):
        find_cut_subtree(RootedTree.path(100), Fraction(1, 2))
    T = RootedTree.path(400)
    cert = find_cut_subtree(T, Fraction(1, 2))
    verify_cut_subtree(T, cert, Fraction(1, 2))


def test_cut_subtree_on_caterpillar():
    T = RootedTree.caterpillar(267, 2)
    assert T.k == 800 and T.max_degree() == 4
    cert = find_cut_subtree(T, Fraction(1, 4))
    verify_cut_subtree(T, cert, Fraction(1, 4))


def test_verifier_rejects_tampered_certificate():
    T = RootedTree.path(20)
    cert = find_cut_subtree(T, Fraction(1, 2), check_size=False)
    bad = CutCertificate("subtree", cert.components[:-1] if len(cert.components) > 1 else [],
                         cert.subtree, cert.anchor)
    with pytest.raises(ContractViolation):
        verify_cut_subtree(T, bad, Fraction(1, 2))


def test_cut_set_preconditions_and_bounds():
    T = RootedTree.star(10)
    with pytest.raises(PreconditionError):
        cut_set(T, Fraction(1, 11))
    cert = cut_set(T, Fraction(1, 10))
    verify_cut_set(T, cert, Fraction(1, 10))
    with pytest.raises(PreconditionError):
        even_cut_set(T, Fraction(1, 2))
    with pytest.raises(PreconditionError):
        even_cut_set(T, Fraction(1, 3))  # star violates the degree condition


def test_even_cut_set_on_long_path():
    T = RootedTree.path(200)
    cert = even_cut_set(T, Fraction(1, 5))
    verify_cut_set(T, cert, Fraction(1, 5), even=True)


def test_bare_paths_on_path_and_leaves_on_star():
    res = leaves_or_bare_paths(RootedTree.path(40), 3)
    assert res.kind == "paths"
    verify_bare(RootedTree.path(40), res, 3)
    res = leaves_or_bare_paths(RootedTree.star(40), 3)
    assert res.kind == "leaves" and res.count == 40
