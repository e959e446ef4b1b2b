"""Exact ground truth: tree containment, the exhaustive small-n sweep and
the sampled Ramsey harness.

Graphs up to isomorphism are produced by vertex augmentation.  The new
vertex always has minimum degree, and duplicates are removed by a
canonical form computed with colour refinement plus individualisation.
Within a cell, only one vertex per twin class is branched on.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import Iterable, Iterator

from .embedding import backtracking_embed
from .errors import GraphInvariantError, PreconditionError
from .formats import read_graph6_lines, to_graph6
from .graph import Graph, bits, complete_graph
from .report import Config
from .trees import RootedTree, enumerate_trees

ORACLE_EXACT_LIMIT = 10
DEFAULT_GUARD = 50_000_000


def contains_tree(G: Graph, T: RootedTree, budget: int | None = None) -> bool:
    """Whether G has a subgraph isomorphic to T.

    Unlimited search up to 10 host vertices; beyond that the search is
    capped by ``budget`` (a large default) and raises BudgetExhausted.
    """
    if T.n > G.n:
        return False
    if budget is None and G.n > ORACLE_EXACT_LIMIT:
        budget = DEFAULT_GUARD
    return backtracking_embed(T, G, budget=budget) is not None


# -- canonical form -----------------------------------------------------------

def _refine(adj, n, colours):
    """Coarsest equitable refinement of ``colours`` (a list of ints, smaller first)."""
    while True:
        sig = [(colours[v], tuple(sorted(colours[u] for u in bits(adj[v])))) for v in range(n)]
        order = sorted(set(sig))
        rank = {s: i for i, s in enumerate(order)}
        new = [rank[s] for s in sig]
        if len(order) == len(set(colours)):
            return new
        colours = new


def _code(adj, n, pos) -> int:
    code = 0
    for v in range(n):
        for u in bits(adj[v]):
            if u > v:
                a, b = sorted((pos[v], pos[u]))
                code |= 1 << (a * n + b)
    return code


def _twin_reps(adj, cell):
    """One vertex per twin class; swapping twins is an automorphism."""
    reps = []
    for v in cell:
        if not any(adj[r] & ~(1 << v) == adj[v] & ~(1 << r) for r in reps):
            reps.append(v)
    return reps


def _search(adj, n, colours) -> int:
    colours = _refine(adj, n, colours)
    if len(set(colours)) == n:
        return _code(adj, n, colours)
    cells: dict[int, list[int]] = {}
    for v, c in enumerate(colours):
        cells.setdefault(c, []).append(v)
    target = min((c for c, vs in cells.items() if len(vs) > 1), key=lambda c: (len(cells[c]), c))
    best = None
    for v in _twin_reps(adj, cells[target]):
        # v gets a colour of its own just below the rest of its cell
        new = [2 * c + 1 for c in colours]
        new[v] -= 1
        code = _search(adj, n, new)
        if best is None or code < best:
            best = code
    return best


def canonical_code(G: Graph) -> tuple[int, int]:
    """(n, code) equal for two graphs exactly when they are isomorphic."""
    return G.n, _search(G.adj, G.n, [0] * G.n)


def _from_code(n: int, code: int) -> Graph:
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if code >> (a * n + b) & 1]
    return Graph(n, edges)


@lru_cache(maxsize=None)
def _graph_codes(n: int) -> tuple[int, ...]:
    if n == 1:
        return (0,)
    out = set()
    for code in _graph_codes(n - 1):
        H = _from_code(n - 1, code)
        deg = H.degrees
        for S in range(1 << (n - 1)):
            s = S.bit_count()
            # the new vertex must have minimum degree in the augmented graph
            if any(s > deg[v] + (S >> v & 1) for v in range(n - 1)):
                continue
            adj = list(H.adj) + [S]
            for v in bits(S):
                adj[v] |= 1 << (n - 1)
            out.add(_search(adj, n, [0] * n))
    return tuple(sorted(out))


def all_graphs(n: int) -> Iterator[Graph]:
    """Every graph on n vertices up to isomorphism, in a fixed order."""
    if n < 1:
        raise PreconditionError("n >= 1", n, 1)
    for code in _graph_codes(n):
        yield _from_code(n, code)


def graph_counts(n_max: int) -> list[int]:
    return [len(_graph_codes(n)) for n in range(1, n_max + 1)]


# -- the sweep ------------------------------------------------------------------

@lru_cache(maxsize=None)
def _trees(k: int) -> tuple[RootedTree, ...]:
    return tuple(enumerate_trees(k, max(k, 1)))


def admissible_k(G: Graph) -> list[int]:
    """All k >= 1 with k <= n and 2e(G) > (k-1)n."""
    return [k for k in range(1, G.n + 1) if 2 * G.edge_count > (k - 1) * G.n]


def _check_graph(G: Graph) -> dict:
    G.validate()
    out = {"instances": 0, "verified": 0, "counterexamples": []}
    for k in admissible_k(G):
        for T in _trees(k):
            out["instances"] += 1
            if contains_tree(G, T):
                out["verified"] += 1
            else:
                out["counterexamples"].append({"graph6": to_graph6(G), "k": k, "tree": T.to_text()})
    return out


def _check_batch(graphs: list[Graph]) -> dict:
    acc = {"instances": 0, "verified": 0, "counterexamples": []}
    for G in graphs:
        part = _check_graph(G)
        acc["instances"] += part["instances"]
        acc["verified"] += part["verified"]
        acc["counterexamples"].extend(part["counterexamples"])
    return acc


def _batches(graphs: list[Graph], size: int = 200) -> list[list[Graph]]:
    return [graphs[i:i + size] for i in range(0, len(graphs), size)]


def _map(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def verify_erdos_sos(n_max: int = 8, source: str = "internal-enumeration", corpus: Iterable[str] | None = None,
                     workers: int = 1, timing: bool = False, allow_large: bool = False) -> dict:
    """Check every tree with k edges against every graph with 2e > (k-1)n.

    ``source`` is ``internal-enumeration`` (all graphs on at most ``n_max``
    vertices) or ``graph6-corpus`` (the graphs read from ``corpus``, one
    graph6 string per line, isomorphic copies counted once).
    """
    start = time.perf_counter()
    if source == "internal-enumeration":
        if n_max > 8 and not allow_large:
            raise PreconditionError("n_max <= 8 for internal enumeration", n_max, 8)
        graphs = [G for n in range(1, n_max + 1) for G in all_graphs(n)]
    elif source == "graph6-corpus":
        if corpus is None:
            raise PreconditionError("a corpus is given for the graph6 source")
        seen, graphs = set(), []
        for G in read_graph6_lines(corpus):
            key = canonical_code(G)
            if key not in seen:
                seen.add(key)
                graphs.append(G)
    else:
        raise ValueError(f"unknown source {source!r}")
    parts = _map(_check_batch, _batches(graphs), workers)
    per_n: dict[int, int] = {}
    for G in graphs:
        per_n[G.n] = per_n.get(G.n, 0) + 1
    counter = sorted((c for p in parts for c in p["counterexamples"]),
                     key=lambda c: (len(c["graph6"]), c["graph6"], c["k"], c["tree"]))
    return {
        "source": source,
        "n_max": n_max if source == "internal-enumeration" else max(per_n, default=0),
        "graphs": len(graphs),
        "graphs_per_n": {str(n): per_n[n] for n in sorted(per_n)},
        "instances": sum(p["instances"] for p in parts),
        "verified": sum(p["verified"] for p in parts),
        "counterexamples": counter,
        "runtime": round(time.perf_counter() - start, 3) if timing else None,
    }


def self_test() -> dict:
    """Feed the sweep a doctored K_4 whose cached edge count claims 10 edges,
    which would admit k = 4; the sweep must refuse it rather than report a
    counterexample."""
    fake = Graph.from_adjacency(list(complete_graph(4).adj), edge_count=10, validate=False)
    claimed = admissible_k(fake)
    try:
        _check_graph(fake)
    except GraphInvariantError as exc:
        return {"detected": True, "claimed_k": claimed, "reason": str(exc)}
    return {"detected": False, "claimed_k": claimed}


# -- pipeline against oracle ------------------------------------------------------

def _consistency_batch(args) -> dict:
    graphs, cfg = args
    from .dense import embed_dispatch

    acc = {"instances": 0, "pipeline_ok": 0, "oracle_ok": 0, "fallbacks": 0, "discrepancies": [],
           "routes": {}}
    for G in graphs:
        for k in admissible_k(G):
            trees = _trees(k)
            rep = embed_dispatch(G, k, k, cfg, trees=trees)
            for T, res in zip(trees, rep["results"]):
                acc["instances"] += 1
                oracle = contains_tree(G, T)
                acc["oracle_ok"] += oracle
                acc["pipeline_ok"] += res["ok"]
                acc["fallbacks"] += res["fallback"]
                route = res["route"] or "none"
                acc["routes"][route] = acc["routes"].get(route, 0) + 1
                if oracle and not res["ok"]:
                    acc["discrepancies"].append({"graph6": to_graph6(G), "k": k, "tree": T.to_text(),
                                                 "failure": res.get("failure")})
    return acc


def pipeline_consistency(n_max: int = 8, config: Config | None = None, workers: int = 1) -> dict:
    """Run the dispatch pipeline on every instance of the sweep and compare
    with the oracle; a discrepancy is a pipeline 'no' against an oracle 'yes'."""
    cfg = config or Config()
    graphs = [G for n in range(1, n_max + 1) for G in all_graphs(n)]
    parts = _map(_consistency_batch, [(b, cfg) for b in _batches(graphs)], workers)
    routes: dict[str, int] = {}
    for p in parts:
        for r, c in p["routes"].items():
            routes[r] = routes.get(r, 0) + c
    return {
        "n_max": n_max,
        "instances": sum(p["instances"] for p in parts),
        "pipeline_ok": sum(p["pipeline_ok"] for p in parts),
        "oracle_ok": sum(p["oracle_ok"] for p in parts),
        "fallbacks": sum(p["fallbacks"] for p in parts),
        "routes": {r: routes[r] for r in sorted(routes)},
        "discrepancies": [d for p in parts for d in p["discrepancies"]],
    }


# -- Ramsey sampling ----------------------------------------------------------------

def ramsey_sample_check(ell: int, k: int, Delta: int, samples: int = 100, seed: int = 0,
                        max_host: int = 12) -> dict:
    """Colour the edges of K_n, n = ell(k-1) + 2, uniformly at random and
    check that the colour with most edges has d > k - 1 and contains every
    tree with k edges and max degree at most Delta."""
    if ell < 2:
        raise PreconditionError("ell >= 2", ell, 2)
    if k < 1:
        raise PreconditionError("k >= 1", k, 1)
    n = ell * (k - 1) + 2
    if n > max_host:
        raise PreconditionError("ell(k-1)+2 within the host budget", n, max_host)
    trees = list(enumerate_trees(k, Delta))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    rows, failures = [], []
    for i in range(samples):
        rng = random.Random(f"ramsey:{seed}:{ell}:{k}:{Delta}:{i}")
        colour = [rng.randrange(ell) for _ in pairs]
        counts = [colour.count(c) for c in range(ell)]
        major = max(range(ell), key=lambda c: (counts[c], -c))
        H = Graph(n, [e for e, c in zip(pairs, colour) if c == major])
        dense = 2 * H.edge_count > (k - 1) * n
        if not dense:
            raise AssertionError(f"sample {i}: majority colour has 2e = {2 * H.edge_count} <= {(k - 1) * n}")
        missing = [T.to_text() for T in trees if not contains_tree(H, T)]
        if missing:
            failures.append({"sample": i, "graph6": to_graph6(H), "missing": missing})
        rows.append({"sample": i, "colour": major, "edges": H.edge_count, "contains_all": not missing})
    return {"ell": ell, "k": k, "Delta": Delta, "n": n, "samples": samples, "seed": seed,
            "trees": len(trees), "passed": samples - len(failures), "failures": failures, "rows": rows}


__all__ = ["contains_tree", "canonical_code", "all_graphs", "graph_counts", "admissible_k", "verify_erdos_sos",
           "self_test", "pipeline_consistency", "ramsey_sample_check"]

