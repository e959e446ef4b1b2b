"""Acceptance criteria.  Each test carries a ``criterion`` marker; the
conftest prints one PASS/FAIL line per criterion after the run."""

import os
import random
import subprocess
import sys
from fractions import Fraction

import pytest

from treesos.exact import root_times
from treesos.extremal import (embed_almost_complete, embed_almost_complete_bipartite, perturbed_complete,
                              perturbed_complete_bipartite)
from treesos.graph import complete_bipartite, complete_graph
from treesos.oracle import contains_tree, graph_counts, pipeline_consistency, ramsey_sample_check, verify_erdos_sos
from treesos.regularity import pair_density, regular_pair_tree_embed
from treesos.report import Config, StageLog
from treesos.selftest import run_selftest
from treesos.trees import RootedTree, enumerate_trees, random_tree

# unlabelled graphs on n = 1..8 vertices; n <= 7 is cross-checked against the networkx atlas in test_oracle
GRAPH_COUNTS = [1, 2, 4, 11, 34, 156, 1044, 12346]


@pytest.mark.criterion(1, "exhaustive sweep over all graphs with n <= 8 finds no counterexample")
def test_sweep_to_eight(record):
    assert graph_counts(8) == GRAPH_COUNTS
    out = verify_erdos_sos(8)
    record(f"{out['graphs']} graphs, {out['instances']} instances, {len(out['counterexamples'])} counterexamples")
    assert out["graphs"] == sum(GRAPH_COUNTS)
    assert out["counterexamples"] == []
    assert out["verified"] == out["instances"] > 0


@pytest.mark.criterion(2, "extremal hosts K_k and K_{k-1,k-1} are tight for k = 3..8")
@pytest.mark.parametrize("k", range(3, 9))
def test_extremal_tightness(k, record):
    K = complete_graph(k)
    B = complete_bipartite(k - 1, k - 1)
    for G in (K, B):
        assert 2 * G.edge_count == (k - 1) * G.n
    trees = list(enumerate_trees(k, k))
    assert not any(contains_tree(K, T) for T in trees)
    assert not contains_tree(B, RootedTree.star(k))
    record(f"k={k}: {len(trees)} trees")


@pytest.mark.criterion(3, "lemma property suites with >= 1000 random instances each plus boundary cases")
def test_property_suites(record):
    rep = run_selftest(instances=1000, seed=0)
    for s in rep["suites"]:
        assert s["instances"] >= 1000, s["name"]
        assert s["boundary"] > 0, s["name"]
        assert s["failures"] == [], (s["name"], s["failures"][:3])
    assert rep["oracle_self_test"]["detected"]
    record(", ".join(f"{s['name']} {s['instances']}+{s['boundary']}" for s in rep["suites"]))


def _pair_instance(rng, m, lo):
    A, B = list(range(m)), list(range(m, 2 * m))
    X = sorted(rng.sample(A, rng.randint(lo, m)))
    Y = sorted(rng.sample(B, rng.randint(lo, m)))
    Z = sorted(rng.sample(A + B, rng.randint(0, m // 8)))
    return A, B, X, Y, Z


@pytest.mark.criterion(4, "regular-pair embedder at m = 64, eps = 1/25 keeps >= 2 eps m candidates (100/100 seeds)")
def test_regular_pair_literal(record):
    m, eps = 64, Fraction(1, 25)
    G = complete_bipartite(m, m)
    assert pair_density(G, range(m), range(m, 2 * m)) >= root_times(5, eps)
    ok = 0
    for seed in range(100):
        rng = random.Random(seed)
        while True:
            A, B, X, Y, Z = _pair_instance(rng, m, 14)
            zs = set(Z)
            if min(len(set(X) - zs), len(set(Y) - zs)) > 13:
                break
        # |T| <= beta m = 64/25 admits trees with at most two vertices
        T = RootedTree.path(1)
        emb = regular_pair_tree_embed(G, A, B, X, Y, Z, T, eps, root_side=rng.choice("AB"))
        assert emb.notes["moreover_holds"] and emb.notes["min_candidates"] >= 2 * eps * m
        ok += 1
    record(f"literal scale {ok}/100")
    assert ok == 100


@pytest.mark.criterion(4, "regular-pair embedder at m = 64, eps = 1/25 keeps >= 2 eps m candidates (100/100 seeds)")
def test_regular_pair_beyond_size_bound(record):
    # trees far above beta m; only the size hypothesis is logged as failing
    m, eps = 64, Fraction(1, 25)
    G = complete_bipartite(m, m)
    ok, floor = 0, 2 * eps * m
    smallest = m
    for seed in range(100):
        rng = random.Random(f"extended:{seed}")
        A, B, X, Y, Z = _pair_instance(rng, m, 48)
        T = random_tree(rng.randint(3, 24), rng, rng.choice([2, 3, 5]))
        log = StageLog(strict=False)
        emb = regular_pair_tree_embed(G, A, B, X, Y, Z, T, eps, root_side=rng.choice("AB"), check=False, log=log)
        failed = {c["name"] for c in log.checks if not c["holds"]}
        assert failed <= {"|T| <= beta m"}
        smallest = min(smallest, emb.notes["min_candidates"])
        ok += emb.notes["min_candidates"] >= floor
    record(f"trees of 4..25 vertices {ok}/100, fewest candidates {smallest} >= {float(floor):.2f}")
    assert ok == 100


@pytest.mark.criterion(5, "pipeline agrees with the oracle on every instance with n <= 8")
def test_pipeline_consistency(record):
    out = pipeline_consistency(8, Config(seed=0))
    rate = out["fallbacks"] / out["instances"]
    record(f"{out['instances']} instances, {len(out['discrepancies'])} discrepancies, "
           f"exact-search fallback {out['fallbacks']} ({rate:.1%}), routes {out['routes']}")
    assert out["discrepancies"] == []
    assert out["pipeline_ok"] == out["oracle_ok"] == out["instances"]


@pytest.mark.criterion(6, "near-extremal embedders: bipartite k = 100, Delta = 2 and almost-complete k = 400")
def test_bipartite_near_extremal(record):
    k, Delta = 100, 2
    ok = 0
    for seed in range(100):
        rng = random.Random(f"bip:{seed}")
        G, P = perturbed_complete_bipartite(k, Delta, rng)
        T = random_tree(k, rng, Delta)
        log = StageLog(strict=False)
        embed_almost_complete_bipartite(G, P, k, Delta, T, check=False, log=log)
        assert all(c["holds"] for c in log.checks if c["hard"]), [c for c in log.checks if not c["holds"]]
        ok += 1
    record(f"bipartite {ok}/100")
    assert ok == 100


@pytest.mark.criterion(6, "near-extremal embedders: bipartite k = 100, Delta = 2 and almost-complete k = 400")
def test_almost_complete_near_extremal(record):
    k, eps = 400, Fraction(1, 20)
    ok = fallbacks = 0
    for seed in range(100):
        rng = random.Random(f"complete:{seed}")
        G = perturbed_complete(k, rng, eps, low=rng.randint(0, 3))
        T = random_tree(k, rng, 3)
        emb = embed_almost_complete(G, k, T, eps, degree_bound=3, check=False)
        fallbacks += bool(emb.notes.get("fallback"))
        ok += 1
    record(f"almost-complete {ok}/100, fallback rate {fallbacks}%")
    assert ok == 100
    assert fallbacks < 10


@pytest.mark.criterion(7, "sampled Ramsey check for (ell, k, Delta) = (2, 4, 3) and (3, 3, 3)")
@pytest.mark.parametrize("ell,k,Delta", [(2, 4, 3), (3, 3, 3)])
def test_ramsey(ell, k, Delta, record):
    out = ramsey_sample_check(ell, k, Delta, samples=100, seed=0)
    record(f"({ell},{k},{Delta}) {out['passed']}/{out['samples']} on K_{out['n']}")
    assert out["passed"] == 100 and out["failures"] == []


def _cli(args, hashseed, cwd):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    env.pop("TREESOS_SEED", None)
    return subprocess.run([sys.executable, "-m", "treesos.cli", *args], capture_output=True, env=env, cwd=cwd,
                          check=False)


@pytest.mark.criterion(8, "reports are byte-identical across runs")
def test_determinism(tmp_path, record):
    g = _cli(["gen", "--kind", "disjoint-union-list", "--k", "6", "--parts", "clique:6,balanced-bipartite:6"], 0,
             tmp_path)
    assert g.returncode == 0
    (tmp_path / "host.g6").write_bytes(g.stdout)
    (tmp_path / "dense.g6").write_bytes(_cli(["gen", "--kind", "clique", "--k", "48"], 0, tmp_path).stdout)
    commands = [
        ["verify", "--nmax", "6"],
        ["verify", "--nmax", "5", "--consistency"],
        ["embed", "--graph", "host.g6", "--k", "5", "--Delta", "5", "--emit-certificate"],
        ["partition", "--graph", "dense.g6", "--eps", "1/4", "--emit-certificate"],
        ["ramsey", "--ell", "3", "--k", "3", "--Delta", "3", "--emit-certificate"],
        ["selftest", "--instances", "50"],
    ]
    for argv in commands:
        runs = [_cli(argv, h, tmp_path) for h in (0, 1, 12345)]
        assert len({r.stdout for r in runs}) == 1, argv
        assert runs[0].returncode in (0, 1) and runs[0].stdout
    record(f"{len(commands)} commands x 3 hash seeds")
