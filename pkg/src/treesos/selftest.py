"""Seeded property suites for the tree lemmas, balancing, concentration and
the matching structure.  Each suite returns ``{"name", "instances",
"boundary", "failures"}`` and never raises on a failed instance."""

from __future__ import annotations

import random
from fractions import Fraction

from .concentration import WeightedFunction, concentration_bound, concentration_dichotomy
from .dense import balance_components, verify_balance
from .errors import ContractViolation
from .exact import Surd
from .graph import Graph
from .oracle import self_test
from .regularity import find_matching_structure, verify_matching_structure
from .trees import (RootedTree, colour_classes, cut_set, enumerate_trees, even_cut_set, find_cut_subtree,
                    leaves_or_bare_paths, random_tree, verify_bare, verify_cut_set, verify_cut_subtree)


def _suite(name):
    return {"name": name, "instances": 0, "boundary": 0, "failures": []}


def _run(out, label, fn, boundary=False):
    out["boundary" if boundary else "instances"] += 1
    try:
        fn()
    except (ContractViolation, AssertionError) as exc:
        out["failures"].append(f"{label}: {exc}")


def _boundary_trees(k_max: int = 12):
    for k in range(1, k_max + 1):
        yield RootedTree.path(k)
        yield RootedTree.star(k)
    yield RootedTree.spider(3, 4)
    yield RootedTree.caterpillar(5, 2)


def suite_cut_subtree(count: int, seed: int) -> dict:
    out = _suite("cut-subtree")
    rng = random.Random(f"cut-subtree:{seed}")

    def one(T, gamma):
        cert = find_cut_subtree(T, gamma, check_size=False)
        verify_cut_subtree(T, cert, gamma)

    for i in range(count):
        k = rng.randint(2, 300)
        T = random_tree(k, rng, rng.choice([None, 3, 5]))
        gamma = Fraction(rng.randint(2, k), k)
        _run(out, f"random {i} k={k} gamma={gamma}", lambda: one(T, gamma))
    for T in _boundary_trees():
        for gamma in (Fraction(1), Fraction(1, 2), Fraction(1, T.k)):
            if gamma * T.k >= 1:
                _run(out, f"{T.to_text()} gamma={gamma}", lambda: one(T, gamma), boundary=True)
    T = RootedTree.path(400)
    _run(out, "path 400 at gamma = 1/2 with the size check", lambda: verify_cut_subtree(
        T, find_cut_subtree(T, Fraction(1, 2)), Fraction(1, 2)), boundary=True)
    return out


def suite_bare(count: int, seed: int, k_max: int = 12) -> dict:
    """Exhaustive over all trees with at most ``k_max`` edges, then random."""
    out = _suite("leaves-or-bare-paths")
    for k in range(1, k_max + 1):
        for T in enumerate_trees(k, k):
            _run(out, T.to_text(), lambda: verify_bare(T, leaves_or_bare_paths(T, 3), 3), boundary=True)
    rng = random.Random(f"bare:{seed}")
    for i in range(count):
        T = random_tree(rng.randint(13, 400), rng, rng.choice([None, 2, 3]))
        _run(out, f"random {i}", lambda: verify_bare(T, leaves_or_bare_paths(T, 3), 3))
    return out


def suite_cut_sets(count: int, seed: int) -> dict:
    out = _suite("cut-set")
    rng = random.Random(f"cut-set:{seed}")

    def plain(T, beta):
        verify_cut_set(T, cut_set(T, beta), beta)

    def even(T, beta):
        verify_cut_set(T, even_cut_set(T, beta, check_degree=True), beta, even=True)

    for i in range(count):
        k = rng.randint(4, 400)
        T = random_tree(k, rng, rng.choice([None, 3]))
        beta = Fraction(1, rng.randint(2, k))
        _run(out, f"plain {i} k={k} beta={beta}", lambda: plain(T, beta))
    done = 0
    while done < count:
        # the even version needs max degree <= beta^2 k / 2
        beta = Fraction(1, rng.randint(3, 6))
        dmax = rng.randint(2, 4)
        k = int(2 * dmax / beta ** 2) + rng.randint(0, 400)
        T = random_tree(k, rng, dmax)
        _run(out, f"even {done} k={k} beta={beta}", lambda: even(T, beta))
        done += 1
    for T in _boundary_trees():
        if T.k >= 2:
            _run(out, f"{T.to_text()} beta=1/k", lambda: plain(T, Fraction(1, T.k)), boundary=True)
    T = RootedTree.path(72)
    _run(out, "path 72 beta=1/3 even", lambda: even(T, Fraction(1, 3)), boundary=True)
    return out


def suite_colour_classes(count: int, seed: int, k_max: int = 9) -> dict:
    """min(|C|, |D|) >= k / Delta(T), exhaustively for 1 <= k <= k_max, then random."""
    out = _suite("colour-classes")

    def one(T):
        C, D = colour_classes(T)
        assert len(C) + len(D) == T.n
        assert min(len(C), len(D)) * T.max_degree() >= T.k, f"classes {len(C)}, {len(D)}"

    for k in range(1, k_max + 1):
        for T in enumerate_trees(k, k):
            _run(out, T.to_text(), lambda: one(T), boundary=True)
    rng = random.Random(f"colour:{seed}")
    for i in range(count):
        T = random_tree(rng.randint(10, 400), rng, rng.choice([None, 2, 3, 8]))
        _run(out, f"random {i}", lambda: one(T))
    return out


def suite_balance(count: int, seed: int) -> dict:
    out = _suite("balancing")
    rng = random.Random(f"balance:{seed}")

    def one(items, M, lam):
        J = balance_components(items, M, lam)
        res = verify_balance(items, J, M, lam)
        assert res["all"], res

    i = 0
    while i < count:
        lam = Fraction(rng.randint(1, 40), rng.randint(1, 4))
        items = []
        for _ in range(rng.randint(0, 40)):
            a = Fraction(rng.randint(0, 20), rng.randint(1, 3))
            b = Fraction(rng.randint(0, 20), rng.randint(1, 3))
            if a + b > lam:
                s = (a + b) / lam
                a, b = a / s, b / s
            items.append((a, b))
        total = sum((a + b for a, b in items), Fraction(0))
        if i % 3 == 2:
            M = Surd(rng.randint(0, int(total) + 5), rng.randint(-3, 3), Fraction(1, rng.randint(2, 100)), 4)
        else:
            M = Fraction(rng.randint(0, int(total) * 2 + 2), rng.randint(1, 2))
        if M < 0:
            continue
        _run(out, f"random {i}", lambda: one(items, M, lam))
        i += 1
    for items, M in (([], 0), ([(0, 0)], 0), ([(1, 0), (0, 1)], 1), ([(2, 1), (1, 2), (0, 3)], 100),
                     ([(3, 0)] * 5, 7)):
        _run(out, f"{items} M={M}", lambda: one(items, M, 3), boundary=True)
    return out


def suite_concentration(count: int, seed: int) -> dict:
    """Both statements.  Instances violating a hypothesis are redrawn."""
    out = _suite("concentration")
    rng = random.Random(f"concentration:{seed}")
    done = {"dichotomy": 0, "bound": 0}
    out["verdicts"] = {}
    while done["dichotomy"] < count:
        N = rng.randint(1, 30)
        vals = [Fraction(rng.randint(0, 200), rng.randint(1, 4)) for _ in range(N)]
        measure = None
        if rng.random() < 0.5:
            w = [rng.randint(1, 9) for _ in range(N)]
            measure = [Fraction(x, sum(w)) for x in w]
        eps = Fraction(1, rng.randint(2, 400))
        wf = WeightedFunction(vals, measure)
        t = wf.expectation * Fraction(rng.randint(1, 100), 100)
        if not (t > 0 and eps * wf.sup ** 2 < t * t):
            continue
        verdict = []
        _run(out, f"dichotomy {done['dichotomy']}",
             lambda: verdict.append(concentration_dichotomy(wf, t, eps).verdict))
        v = verdict[0] if verdict else "violation"
        out["verdicts"][v] = out["verdicts"].get(v, 0) + 1
        done["dichotomy"] += 1
    while done["bound"] < count:
        N = rng.randint(1, 60)
        eps = Fraction(1, rng.randint(3, 200))
        t = Fraction(rng.randint(1, 100))
        lo = rng.choice([0, 500, 900, 990])
        vals = [t * (1 + eps) * Fraction(rng.randint(lo, 1000), 1000) for _ in range(N)]
        if not t <= Fraction(sum(vals), N):
            continue
        _run(out, f"bound {done['bound']}", lambda: concentration_bound(vals, t, eps))
        done["bound"] += 1
    counter = WeightedFunction([Fraction(39, 10), Fraction(1, 2), Fraction(5, 4)],
                               [Fraction(6, 100), Fraction(51, 100), Fraction(43, 100)])
    _run(out, "weak form at eps = 1/16", lambda: concentration_dichotomy(counter, 1, Fraction(1, 16)), boundary=True)
    _run(out, "constant function", lambda: concentration_bound([5] * 10, 5, Fraction(1, 4)), boundary=True)
    return out


def _random_reduced(rng) -> Graph:
    """Reduced graph of a halved partition: every cluster has a non-adjacent twin."""
    h = rng.randint(1, 12)
    p = rng.random()
    base = [(a, b) for a in range(h) for b in range(a + 1, h) if rng.random() < p]
    edges = []
    for a, b in base:
        for x in (2 * a, 2 * a + 1):
            for y in (2 * b, 2 * b + 1):
                edges.append((x, y))
    return Graph(2 * h, edges)


def suite_matching_structure(count: int, seed: int) -> dict:
    out = _suite("matching-structure")
    rng = random.Random(f"matching:{seed}")

    def one(R, prefer):
        ms = find_matching_structure(R, prefer_large_independent=prefer)
        props = verify_matching_structure(R, ms, 1, Fraction(len(ms.matching)))
        assert props["all"], props

    for i in range(count):
        R = _random_reduced(rng)
        prefer = R.n <= 12 and rng.random() < 0.3
        _run(out, f"random {i}", lambda: one(R, prefer))
    for R in (Graph(2), Graph(4, [(0, 2), (0, 3), (1, 2), (1, 3)]), Graph(6, [(a, b) for a in range(6)
                                                                              for b in range(a + 1, 6)
                                                                              if a // 2 != b // 2])):
        _run(out, f"{R}", lambda: one(R, False), boundary=True)
    return out


def run_selftest(instances: int = 200, seed: int = 0) -> dict:
    suites = [
        suite_cut_subtree(instances, seed),
        suite_bare(instances, seed),
        suite_cut_sets(instances, seed),
        suite_colour_classes(instances, seed),
        suite_balance(instances, seed),
        suite_concentration(instances, seed),
        suite_matching_structure(instances, seed),
    ]
    oracle = self_test()
    ok = all(not s["failures"] for s in suites) and oracle["detected"]
    return {"seed": seed, "instances_per_suite": instances, "suites": suites, "oracle_self_test": oracle,
            "all_ok": ok}
