"""Regular pairs, partition refinement, reduced graphs and cluster matchings.

Regularity verdicts come in three kinds.  ``certified`` means every pair of
significant subsets was examined (or the density is 0 or 1, where every
subpair has the same density).  ``heuristic`` means a fixed-seed random sample
of subset pairs found no deviation; it is never promoted to certified.
``witness`` carries subsets X, Y whose density deviates by at least eps and
has been re-checked exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Sequence

import numpy as np

from .embedding import Embedding, verify_embedding
from .errors import ContractViolation, EmbeddingFailure, PreconditionError, RefinementError, StructureError
from .exact import Surd, frac, root_times
from .graph import Graph, bits, mask_of
from .matching import matching_pairs, max_matching
from .report import StageLog
from .trees import RootedTree, colour_classes


def _mask(S) -> int:
    return S if isinstance(S, int) else mask_of(S)


def pair_density(G: Graph, A, B) -> Fraction:
    """e(A, B) / (|A| |B|) for disjoint vertex sets."""
    am, bm = _mask(A), _mask(B)
    a, b = am.bit_count(), bm.bit_count()
    if not a or not b:
        raise PreconditionError("pair sides are non-empty", (a, b))
    return Fraction(G.e_between(am, bm), a * b)


@dataclass
class Verdict:
    status: str  # certified | heuristic | witness
    density: Fraction
    mode: str
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    @property
    def regular(self) -> bool:
        return self.status != "witness"

    def to_dict(self) -> dict:
        out = {"status": self.status, "density": str(self.density), "mode": self.mode}
        if self.witness:
            out["witness"] = [list(self.witness[0]), list(self.witness[1])]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Verdict":
        w = d.get("witness")
        return cls(d["status"], Fraction(d["density"]), d["mode"],
                   (tuple(w[0]), tuple(w[1])) if w else None)


def _significant(size: int, whole: int, eps: Fraction) -> bool:
    return size > eps * whole


def _deviates(G, X, Y, d, eps) -> bool:
    return abs(pair_density(G, X, Y) - d) >= eps


def _exhaustive(G: Graph, A: list[int], B: list[int], d: Fraction, eps: Fraction, chunk: int = 4096):
    """Search all significant X of the smaller side; for each X and each
    admissible |Y| the extreme densities come from the |Y| largest and
    smallest degrees into X."""
    swap = len(A) > len(B)
    rows, cols = (B, A) if swap else (A, B)
    a, b = len(rows), len(cols)
    M = np.array([[1 if G.has_edge(r, c) else 0 for c in cols] for r in rows], dtype=np.int64)
    p, q = eps.numerator, eps.denominator
    total = a * b
    e = int(M.sum())
    s_vec = np.arange(1, b + 1, dtype=np.int64)
    s_ok = q * s_vec > p * b
    shifts = np.arange(a, dtype=np.int64)
    for start in range(1, 1 << a, chunk):
        masks = np.arange(start, min(1 << a, start + chunk), dtype=np.int64)
        S = (masks[:, None] >> shifts) & 1
        xs = S.sum(axis=1)
        keep = q * xs > p * a
        if not keep.any():
            continue
        S, masks, xs = S[keep], masks[keep], xs[keep]
        D = S @ M
        asc = np.sort(D, axis=1)
        lo = np.cumsum(asc, axis=1)
        hi = np.cumsum(asc[:, ::-1], axis=1)
        base = e * xs[:, None] * s_vec[None, :]
        thr = p * xs[:, None] * s_vec[None, :] * total
        v_hi = (q * (hi * total - base) >= thr) & s_ok[None, :]
        v_lo = (q * (base - lo * total) >= thr) & s_ok[None, :]
        for viol, high in ((v_hi, True), (v_lo, False)):
            if viol.any():
                flat = int(np.argmax(viol))
                i, j = divmod(flat, b)
                X = [rows[t] for t in range(a) if int(masks[i]) >> t & 1]
                order = np.argsort(-D[i] if high else D[i], kind="stable")
                Y = [cols[int(t)] for t in order[: j + 1]]
                return (Y, X) if swap else (X, Y)
    return None


def check_regular_pair(G: Graph, A: Sequence[int], B: Sequence[int], eps, mode: str = "exhaustive",
                       seed: int = 0, trials: int = 2000, bound: int = 16) -> Verdict:
    """Decide (exhaustive) or probe (sampled) eps-regularity of (A, B)."""
    eps = frac(eps)
    A, B = sorted(A), sorted(B)
    d = pair_density(G, A, B)
    if d in (0, 1):
        return Verdict("certified", d, "trivial")
    if mode == "exhaustive":
        if min(len(A), len(B)) > bound:
            raise PreconditionError("exhaustive mode needs the smaller side within the bound", min(len(A), len(B)), bound)
        w = _exhaustive(G, A, B, d, eps)
        if w is None:
            return Verdict("certified", d, "exhaustive")
    elif mode == "sampled":
        rng = random.Random(seed)
        lo_a = int(eps * len(A)) + 1
        lo_b = int(eps * len(B)) + 1
        w = None
        if lo_a <= len(A) and lo_b <= len(B):
            for _ in range(trials):
                X = rng.sample(A, rng.randint(lo_a, len(A)))
                Y = rng.sample(B, rng.randint(lo_b, len(B)))
                if _deviates(G, X, Y, d, eps):
                    w = (sorted(X), sorted(Y))
                    break
        if w is None:
            return Verdict("heuristic", d, "sampled")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    X, Y = w
    if not (_significant(len(X), len(A), eps) and _significant(len(Y), len(B), eps) and _deviates(G, X, Y, d, eps)):
        raise ContractViolation("regularity witness failed re-verification")
    return Verdict("witness", d, mode, (tuple(sorted(X)), tuple(sorted(Y))))


def typical_vertices(G: Graph, A, Y, d, eps, B=None, certified: bool = False) -> list[int]:
    """Vertices x of A with deg(x, Y) > (d - eps)|Y|."""
    eps, d = frac(eps), frac(d)
    ym = _mask(Y)
    if B is not None and not _significant(ym.bit_count(), _mask(B).bit_count(), eps):
        raise PreconditionError("Y is significant", ym.bit_count(), eps * _mask(B).bit_count())
    thr = (d - eps) * ym.bit_count()
    out = [x for x in bits(_mask(A)) if G.deg_into(x, ym) > thr]
    if certified and _mask(A).bit_count() - len(out) > eps * _mask(A).bit_count():
        raise ContractViolation("more than eps|A| atypical vertices in a certified pair")
    return out


# -- partitions -------------------------------------------------------------------

@dataclass
class RegularPartition:
    clusters: list[list[int]]
    eps: Fraction
    eta: Fraction
    density: list[list[Fraction]]
    verdicts: dict[tuple[int, int], Verdict]
    exceptional: list[int] = field(default_factory=list)
    report: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.clusters)

    @property
    def cluster_size(self) -> int:
        return len(self.clusters[0]) if self.clusters else 0

    def cluster_of(self) -> dict[int, int]:
        return {v: i for i, c in enumerate(self.clusters) for v in c}

    def validate(self, G: Graph) -> None:
        sizes = {len(c) for c in self.clusters}
        if len(sizes) > 1:
            raise ContractViolation("clusters differ in size")
        seen = set()
        for c in self.clusters:
            if seen.intersection(c):
                raise ContractViolation("clusters overlap")
            seen.update(c)
            if G.e_inside(mask_of(c)):
                raise ContractViolation("cluster is not independent")
        for i in range(self.size):
            for j in range(i + 1, self.size):
                if pair_density(G, self.clusters[i], self.clusters[j]) != self.density[i][j]:
                    raise ContractViolation(f"stored density of pair {i},{j} is stale")

    def to_json(self) -> str:
        body = {
            "clusters": self.clusters,
            "eps": str(self.eps),
            "eta": str(self.eta),
            "density": [[str(x) for x in row] for row in self.density],
            "verdicts": {f"{i},{j}": v.to_dict() for (i, j), v in sorted(self.verdicts.items())},
            "exceptional": self.exceptional,
        }
        return json.dumps(body, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RegularPartition":
        d = json.loads(text)
        verdicts = {}
        for key, v in d["verdicts"].items():
            i, j = (int(x) for x in key.split(","))
            verdicts[(i, j)] = Verdict.from_dict(v)
        return cls(
            clusters=[list(c) for c in d["clusters"]],
            eps=Fraction(d["eps"]),
            eta=Fraction(d["eta"]),
            density=[[Fraction(x) for x in row] for row in d["density"]],
            verdicts=verdicts,
            exceptional=list(d.get("exceptional", [])),
        )


def _similarity_clusters(G: Graph, vertices: list[int], size: int) -> tuple[list[list[int]], list[int]]:
    """Greedy grouping of vertices with small symmetric neighbourhood difference."""
    left = list(vertices)
    clusters = []
    while len(left) >= size:
        s = left[0]
        rest = sorted(left[1:], key=lambda u: ((G.adj[s] ^ G.adj[u]).bit_count(), u))
        group = [s] + rest[: size - 1]
        clusters.append(sorted(group))
        taken = set(group)
        left = [u for u in left if u not in taken]
    return clusters, left


def _verdict_mode(m: int, bound: int) -> str:
    return "exhaustive" if m <= bound else "sampled"


def _all_verdicts(G, clusters, eps, mode, seed, trials, bound):
    out = {}
    for i in range(len(clusters)):
        for j in range(i + 1, len(clusters)):
            out[(i, j)] = check_regular_pair(G, clusters[i], clusters[j], eps, mode=mode,
                                             seed=seed + 7919 * i + j, trials=trials, bound=bound)
    return out


def refine_partition(G: Graph, eps, eta, max_clusters: int = 64, seed: int = 0, trials: int = 2000,
                     bound: int = 16, mode: str = "auto", enforce: bool = True):
    """Regular partition of an almost spanning subgraph G' of G.

    Start from ceil(1/eps) clusters of similar vertices; while some pair has
    a regularity witness and halving keeps clusters of size >= 2 within
    ``max_clusters``, halve every cluster, splitting witness clusters along
    the witness.  Then delete intra-cluster edges and all edges of pairs that
    are sparse (< eta) or still irregular.  Returns ``(G', partition)``
    where G' carries labels into G.
    """
    eps, eta = frac(eps), frac(eta)
    n = G.n
    ell = ceil(1 / eps)
    if n < 2 * ell:
        raise PreconditionError("|G| >= 2 ceil(1/eps)", n, 2 * ell)
    m = n // ell
    clusters, _ = _similarity_clusters(G, list(range(n)), m)
    clusters = clusters[:ell]
    exceptional = sorted(set(range(n)) - {v for c in clusters for v in c})
    rounds = []
    while True:
        cur_mode = _verdict_mode(m, bound) if mode == "auto" else mode
        verdicts = _all_verdicts(G, clusters, eps, cur_mode, seed, trials, bound)
        rounds.append((clusters, sorted(exceptional), verdicts))
        witnesses = {key: v for key, v in verdicts.items() if v.status == "witness"}
        if not witnesses or m // 2 < 2 or 2 * len(clusters) > max_clusters:
            break
        split_by = {}
        for (i, j), v in sorted(witnesses.items()):
            split_by.setdefault(i, set(v.witness[0]))
            split_by.setdefault(j, set(v.witness[1]))
        half = m // 2
        new = []
        exceptional = list(exceptional)
        for i, c in enumerate(clusters):
            if i in split_by:
                w = split_by[i]
                ordered = [v for v in c if v in w] + [v for v in c if v not in w]
            else:
                ordered = sorted(c, key=lambda u: ((G.adj[c[0]] ^ G.adj[u]).bit_count(), u))
            new.append(sorted(ordered[:half]))
            new.append(sorted(ordered[half: 2 * half]))
            exceptional.extend(ordered[2 * half:])
        clusters, m = new, half
    # keep the round that meets the bounds with the fewest irregular pairs
    best = None
    for r, (cl, exc, verdicts) in enumerate(rounds):
        G2, part = _clean(G, cl, exc, eps, eta, verdicts)
        loss = max((G.degree(G2.labels[x]) - G2.degree(x) for x in range(G2.n)), default=0)
        irregular = sum(1 for v in verdicts.values() if v.status == "witness")
        ok = len(exc) <= eps * n and loss <= (eta + eps) * n
        key = (not ok, irregular if ok else loss, r)
        if best is None or key < best[0]:
            best = (key, r, G2, part, loss, irregular, verdicts, exc)
    _, r, G2, part, loss, irregular, verdicts, exc = best
    report = {
        "rounds": len(rounds),
        "chosen_round": r,
        "clusters": part.size,
        "cluster_size": part.cluster_size,
        "exceptional": len(exc),
        "exceptional_bound": eps * n,
        "max_degree_loss": loss,
        "loss_bound": (eta + eps) * n,
        "irregular_pairs_removed": irregular,
        "heuristic_pairs": sum(1 for v in verdicts.values() if v.status == "heuristic"),
        "certified_pairs": sum(1 for v in verdicts.values() if v.status == "certified"),
    }
    report["exceptional_ok"] = len(exc) <= eps * n
    report["loss_ok"] = loss <= (eta + eps) * n
    part.report = report
    if enforce and not report["exceptional_ok"]:
        raise RefinementError(f"{len(exc)} exceptional vertices exceed eps*n = {eps * n}")
    if enforce and not report["loss_ok"]:
        raise RefinementError(f"a vertex lost {loss} edges, above (eta+eps)n = {(eta + eps) * n}")
    return G2, part


def _clean(G: Graph, clusters, exceptional, eps, eta, verdicts):
    """Induced subgraph on the clustered vertices without intra-cluster,
    sparse-pair and irregular-pair edges; vertex i of the result is
    ``order[i]`` where clusters are laid out consecutively."""
    eps, eta = frac(eps), frac(eta)
    order = [v for c in clusters for v in c]
    sub = G.induced(order)
    cid = []
    for i, c in enumerate(clusters):
        cid.extend([i] * len(c))
    dens = [[Fraction(0)] * len(clusters) for _ in clusters]
    keep_pair = set()
    for (i, j), v in verdicts.items():
        if v.density >= eta and v.status != "witness":
            keep_pair.add((i, j))
    G2 = sub.keep_edges_where(lambda u, w: (min(cid[u], cid[w]), max(cid[u], cid[w])) in keep_pair)
    new_clusters = []
    pos = 0
    for c in clusters:
        new_clusters.append(list(range(pos, pos + len(c))))
        pos += len(c)
    new_verdicts = {}
    for (i, j), v in verdicts.items():
        d = pair_density(G2, new_clusters[i], new_clusters[j])
        dens[i][j] = dens[j][i] = d
        if (i, j) in keep_pair:
            new_verdicts[(i, j)] = Verdict(v.status, d, v.mode)
        else:
            new_verdicts[(i, j)] = Verdict("certified", d, "trivial")
    part = RegularPartition(new_clusters, eps, eta, dens, new_verdicts, exceptional=[G.labels[x] for x in exceptional])
    return G2, part


@dataclass
class ReducedGraph:
    graph: Graph
    clusters: list[list[int]]
    eta: Fraction
    report: dict = field(default_factory=dict)

    @property
    def degrees(self):
        return self.graph.degrees

    def components(self) -> list[list[int]]:
        return self.graph.components()


def build_reduced(P: RegularPartition, eta=None, G: Graph | None = None, host_n: int | None = None) -> ReducedGraph:
    """Clusters joined when their density is at least eta.

    With ``G`` (the cleaned graph of the partition) the report checks, per
    cluster C, deg_R(C) >= avg_{v in C} deg_G(v) * |R| / |G|; with
    ``host_n`` it also records the bound measured against the original order
    after allowing the refinement slack (eta + eps) * host_n.
    """
    eta = P.eta if eta is None else frac(eta)
    ell = P.size
    edges = [(i, j) for i in range(ell) for j in range(i + 1, ell) if P.density[i][j] >= eta and P.density[i][j] > 0]
    R = Graph(ell, edges)
    report = {}
    if G is not None:
        n2 = G.n
        rows = []
        ok = True
        for i, c in enumerate(P.clusters):
            avg = Fraction(sum(G.degree(v) for v in c), len(c))
            bound = avg * ell / n2
            holds = R.degree(i) >= bound
            ok &= holds
            rows.append({"cluster": i, "deg": R.degree(i), "bound": bound, "holds": holds})
        report["degree_bound"] = rows
        report["degree_bound_holds"] = ok
        report["average_degree_bound"] = R.average_degree() >= G.average_degree() * ell / n2
        if host_n is not None:
            slack = (eta + P.eps) * host_n
            report["with_slack_holds"] = all(
                R.degree(i) >= (Fraction(sum(G.degree(v) for v in c), len(c)) - slack) * ell / host_n
                for i, c in enumerate(P.clusters)
            )
    return ReducedGraph(R, P.clusters, eta, report)


# -- tree into a regular pair -------------------------------------------------------

def regular_pair_tree_embed(G: Graph, A, B, X, Y, Z, T: RootedTree, eps, beta=None, *,
                            root_side: str = "A", pins: dict | None = None, domains: dict | None = None,
                            check: bool = True, log: StageLog | None = None) -> Embedding:
    """Embed a small tree into (X ∪ Y) \\ Z of a dense regular pair (A, B).

    The root's colour class goes to the ``root_side`` side.  Each vertex is
    placed on a free neighbour of its parent's image; vertices that still
    have children to place are put on vertices typical to the free part of
    the opposite side.  The number of typical candidates at each placement
    is recorded and must be at least 2 eps m.
    """
    eps = frac(eps)
    beta = eps if beta is None else frac(beta)
    am, bm, xm, ym, zm = (_mask(S) for S in (A, B, X, Y, Z))
    m = am.bit_count()
    d = pair_density(G, am, bm)
    sq = root_times(1, eps)
    log = log if log is not None else StageLog(strict=check)
    log.enter("regular-pair")
    log.check("|A| = |B|", m, "==", bm.bit_count())
    log.check("0 < beta <= eps <= 1/25", beta, "<=", min(eps, Fraction(1, 25)))
    log.check("d(A,B) >= 5 sqrt(eps)", d, ">=", sq.scaled(5))
    log.check("|X \\ Z| > sqrt(eps) m", (xm & am & ~zm).bit_count(), ">", sq.scaled(m))
    log.check("|Y \\ Z| > sqrt(eps) m", (ym & bm & ~zm).bit_count(), ">", sq.scaled(m))
    log.check("|T| <= beta m", T.n, "<=", beta * m)
    C, D = colour_classes(T)
    to_x = C if root_side == "A" else D
    free = {True: xm & am & ~zm, False: ym & bm & ~zm}
    pins = dict(pins or {})
    domains = dict(domains or {})
    floor_count = 2 * eps * m
    phi: dict[int, int] = {}
    trace: dict[int, int] = {}
    order = T.preorder()
    for step, u in enumerate(order):
        side = u in to_x
        pool = free[side]
        p = T.parent[u]
        if p >= 0:
            pool &= G.adj[phi[p]]
        if u in domains:
            pool &= domains[u]
        other = free[not side]
        if T.children[u]:
            thr = (d - eps) * other.bit_count()
            typical = mask_of(x for x in bits(pool) if G.deg_into(x, other) > thr)
        else:
            typical = pool
        count = typical.bit_count()
        trace[u] = count
        if u in pins:
            x = pins[u]
            if not pool >> x & 1:
                raise EmbeddingFailure(f"pinned image {x} of vertex {u} is not admissible", "regular-pair", step)
        else:
            if not typical:
                raise EmbeddingFailure(f"no typical candidate for vertex {u}", "regular-pair", step)
            x = max(bits(typical), key=lambda y: ((G.adj[y] & other).bit_count(), -y))
        phi[u] = x
        free[side] &= ~(1 << x)
    emb = Embedding(phi, trace, route="regular-pair")
    emb.notes["min_candidates"] = min(trace.values(), default=0)
    emb.notes["candidate_floor"] = floor_count
    emb.notes["moreover_holds"] = all(c >= floor_count for u, c in trace.items() if u not in pins)
    if check and not emb.notes["moreover_holds"]:
        raise EmbeddingFailure("fewer than 2 eps m candidates at some placement", "regular-pair")
    verify_embedding(T, G, emb, pins=pins)
    used = mask_of(phi.values())
    if used & zm or used & ~(xm | ym):
        raise ContractViolation("regular-pair embedding left (X ∪ Y) \\ Z")
    return emb


# -- matching structure -----------------------------------------------------------

@dataclass
class MatchingStructure:
    matching: list[tuple[int, int]]
    independent: list[int]
    V1: list[int]
    V2: list[int]
    properties: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"matching": [list(e) for e in self.matching], "independent": self.independent,
                "V1": self.V1, "V2": self.V2, "properties": self.properties}


def halve_partition(G: Graph, P: RegularPartition, recheck: bool = True, seed: int = 0, trials: int = 2000,
                    bound: int = 16):
    """Split every cluster into two halves (dropping one vertex of odd clusters).

    Pairs are re-examined at (5 eps, eta - eps); edges of pairs that fail
    either threshold are removed so that the result is a valid partition.
    """
    eps2, eta2 = 5 * P.eps, P.eta - P.eps
    halves = []
    dropped = []
    for c in P.clusters:
        h = len(c) // 2
        halves.append(c[:h])
        halves.append(c[h: 2 * h])
        dropped.extend(c[2 * h:])
    keep = [v for c in halves for v in c]
    sub = G.induced(keep)
    index = {v: i for i, v in enumerate(keep)}
    clusters = [[index[v] for v in c] for c in halves]
    m = len(clusters[0])
    verdicts = {}
    for i in range(len(clusters)):
        for j in range(i + 1, len(clusters)):
            if recheck:
                mode = _verdict_mode(m, bound)
                verdicts[(i, j)] = check_regular_pair(sub, clusters[i], clusters[j], eps2, mode=mode,
                                                      seed=seed + 31 * i + j, trials=trials, bound=bound)
            else:
                verdicts[(i, j)] = Verdict("heuristic", pair_density(sub, clusters[i], clusters[j]), "inherited")
    order_clusters = clusters
    G2, part = _clean(sub, order_clusters, [], eps2, eta2, verdicts)
    part.exceptional = list(P.exceptional) + [G.labels[v] for v in dropped]
    part.report = {"dropped": len(dropped), "halved_from": P.size}
    return G2, part


def verify_matching_structure(R: Graph, ms: MatchingStructure, cluster_size: int, t) -> dict:
    """Evaluate the cover, size and split properties from scratch."""
    t = frac(t)
    in_m = [v for e in ms.matching for v in e]
    props = {}
    props["matching_valid"] = len(set(in_m)) == len(in_m) and all(R.has_edge(a, b) for a, b in ms.matching)
    I = set(ms.independent)
    props["disjoint"] = not I.intersection(in_m)
    props["independent"] = all(not R.has_edge(a, b) for a in I for b in I if a < b)
    props["cover"] = I.union(in_m) == set(range(R.n))
    props["size"] = len(in_m) * cluster_size >= 2 * t
    V1, V2 = set(ms.V1), set(ms.V2)
    nI = {u for a in I for u in R.neighbors(a)}
    props["partition"] = V1.isdisjoint(V2) and V1 | V2 == set(in_m)
    props["neighbourhood_in_V1"] = nI <= V1
    props["edges_split"] = all((a in V1) != (b in V1) for a, b in ms.matching)
    props["all"] = all(props.values())
    return props


def _structure_from(R: Graph, pairs, I):
    nI = {u for a in I for u in R.neighbors(a)}
    V1, V2 = [], []
    for a, b in pairs:
        if a in nI and b in nI:
            return None
        if b in nI:
            a, b = b, a
        V1.append(a)
        V2.append(b)
    return MatchingStructure(sorted(pairs), sorted(I), sorted(V1), sorted(V2))


def find_matching_structure(R: Graph, prefer_large_independent: bool = False,
                            exhaustive_limit: int = 16) -> MatchingStructure:
    """Matching M and independent I covering R with N(I) confined to one end
    of each M-edge.

    A maximum matching with I its unmatched vertices works whenever the
    vertices missed by some maximum matching form an independent set, which
    is the case for reduced graphs of halved partitions (every cluster has a
    non-adjacent twin).  Small graphs where that fails, or where a large I is
    preferred, are searched exhaustively over independent sets.
    """
    nbrs = [R.neighbors(v) for v in range(R.n)]
    mate = max_matching(R.n, nbrs)
    pairs = matching_pairs(mate)
    I = [v for v in range(R.n) if mate[v] < 0]
    ms = _structure_from(R, pairs, I)
    if ms is not None and not prefer_large_independent:
        return ms
    if R.n > exhaustive_limit:
        if ms is not None:
            return ms
        raise StructureError("maximum matching leaves an M-edge with both ends next to I")
    sign = -1 if prefer_large_independent else 1
    best = ms
    for mask in range(1 << R.n):
        Iset = [v for v in range(R.n) if mask >> v & 1]
        if best is not None and sign * len(Iset) >= sign * len(best.independent):
            continue
        if any(R.has_edge(a, b) for a in Iset for b in Iset if a < b):
            continue
        nI = {u for a in Iset for u in nbrs[a]}
        rest = [v for v in range(R.n) if not mask >> v & 1]
        idx = {v: i for i, v in enumerate(rest)}
        sub = [[idx[u] for u in nbrs[v] if u in idx and not (v in nI and u in nI)] for v in rest]
        m2 = max_matching(len(rest), sub)
        if any(x < 0 for x in m2):
            continue
        cand = _structure_from(R, [(rest[a], rest[b]) for a, b in matching_pairs(m2)], Iset)
        if cand is not None:
            best = cand
    if best is None:
        raise StructureError("reduced graph admits no matching structure")
    return best


def matching_structure(G: Graph, P: RegularPartition, t, *, check: bool = True, seed: int = 0,
                       trials: int = 2000, bound: int = 16, log: StageLog | None = None,
                       prefer_large_independent: bool = False):
    """Halve the partition and extract a verified matching structure.

    Returns ``(G', P', structure)``; G' carries labels into G.
    """
    t = frac(t)
    ell = P.size
    log = log if log is not None else StageLog(strict=check)
    log.enter("matching-structure")
    log.check("|G| >= 2t + l", G.n, ">=", 2 * t + ell)
    log.check("min degree >= t + l", G.min_degree(), ">=", t + ell)
    G2, P2 = halve_partition(G, P, seed=seed, trials=trials, bound=bound)
    log.check("|G'| >= |G| - l", G2.n, ">=", G.n - ell)
    R = build_reduced(P2).graph
    ms = find_matching_structure(R, prefer_large_independent=prefer_large_independent)
    props = verify_matching_structure(R, ms, P2.cluster_size, t)
    ms.properties = props
    for name in ("matching_valid", "disjoint", "independent", "cover", "partition", "neighbourhood_in_V1", "edges_split"):
        if not props[name]:
            raise ContractViolation(f"matching structure property {name} failed")
    log.check("|V(M)| >= 2t", len(ms.matching) * 2 * P2.cluster_size, ">=", 2 * t)
    return G2, P2, ms
