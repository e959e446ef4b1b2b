"""Embedders for hosts that are close to the extremal examples.

Two hosts are handled: almost complete bipartite graphs with both sides of
size about k, and almost complete graphs on barely more than k vertices.
Both pipelines log every inequality they rely on through a
:class:`~treesos.report.StageLog` and finish with the replay verifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .embedding import Embedding, backtracking_embed, greedy_embed_bipartite, near_complete_embed, verify_embedding
from .errors import BudgetExhausted, EmbeddingFailure, PathShortfall, PreconditionError
from .exact import floor_frac, frac, root_floor, root_times, shrink
from .graph import Bipartition, Graph, average_degree_exceeds, bits, intra_edges, mask_of
from .matching import bipartite_matching
from .report import StageLog
from .trees import RootedTree, colour_classes, find_cut_subtree, leaves_or_bare_paths


# -- almost complete bipartite hosts ------------------------------------------------

def embed_almost_complete_bipartite(G: Graph, P: Bipartition, k: int, Delta: int, T: RootedTree,
                                    check: bool = True, log: StageLog | None = None) -> Embedding:
    """Embed T with k edges and max degree Delta into an almost complete
    bipartite host.  With eps = 1/(25 Delta^2), sqrt(eps) = 1/(5 Delta) is
    rational, so every threshold below is exact."""
    log = log if log is not None else StageLog(strict=check)
    log.enter("almost-complete-bipartite")
    P.check(G)
    eps = Fraction(1, 25 * Delta * Delta)
    sq = Fraction(1, 5 * Delta)
    n = G.n
    log.check("T has k edges", T.k, "==", k)
    log.check("max degree of T <= Delta", T.max_degree(), "<=", Delta)
    log.check("k >= 8 Delta^2", k, ">=", 8 * Delta * Delta)
    log.check("|A| <= (1 + eps) k", len(P.A), "<=", (1 + eps) * k)
    log.check("|B| <= (1 + eps) k", len(P.B), "<=", (1 + eps) * k)
    log.check("d(G) > k - 1", 2 * G.edge_count, ">", (k - 1) * n)
    log.check("min degree >= k/2", G.min_degree(), ">=", Fraction(k, 2))
    log.check("intra edges <= e(G)/(50 Delta^2)", intra_edges(G, P), "<=", Fraction(G.edge_count, 50 * Delta * Delta))

    A, B = list(P.A), list(P.B)
    if len(B) < len(A):
        A, B = B, A
    a_mask, b_mask = mask_of(A), mask_of(B)
    e_ab = sum(G.deg_into(a, b_mask) for a in A)
    log.check("e(A,B) >= (1 - eps) k n / 2", e_ab, ">=", (1 - eps) * k * n / 2)
    log.check("|B| >= (1 - eps) k", len(B), ">=", (1 - eps) * k)
    log.check("|A| >= (1 - 3 eps) k", len(A), ">=", (1 - 3 * eps) * k)
    log.check("average degree from B to A > (1 - 4 eps) k", Fraction(e_ab, len(B)), ">", (1 - 4 * eps) * k)

    A0 = [a for a in A if G.deg_into(a, b_mask) < (1 - 2 * sq) * k]
    B0 = [b for b in B if G.deg_into(b, a_mask) < (1 - 3 * sq) * k]
    log.check("|A0| <= 2 sqrt(eps) |A|", len(A0), "<=", 2 * sq * len(A))
    log.check("|B0| <= 3 sqrt(eps) |B|", len(B0), "<=", 3 * sq * len(B))
    A1 = [a for a in A if a not in set(A0)]
    B1 = [b for b in B if b not in set(B0)]
    keep = A1 + B1
    sub = G.induced(keep)
    side = [1] * len(A1) + [0] * len(B1)
    H = sub.keep_edges_where(lambda u, v: side[u] != side[v])
    PH = Bipartition(range(len(A1)), range(len(A1), len(keep)))
    log.check("min degree of H >= (1 - 5 sqrt(eps)) k", H.min_degree(), ">=", (1 - 5 * sq) * k)

    C, D = colour_classes(T)
    big = max(len(C), len(D))
    log.check("max colour class <= (1 - 1/Delta) k", big, "<=", (1 - Fraction(1, Delta)) * k, hard=False)
    log.check("max colour class <= min degree of H", big, "<=", H.min_degree())
    # the root's class goes to whichever side gives the greedy lemma room
    root_side = "A" if H.min_degree() >= len(D) else "B"
    pool = range(len(A1)) if root_side == "A" else range(len(A1), len(keep))
    if not pool:
        raise EmbeddingFailure(f"side {root_side} is empty after removing low-degree vertices",
                               "almost-complete-bipartite")
    root_img = max(pool, key=lambda x: (H.degree(x), -x))
    emb = greedy_embed_bipartite(T, H, PH, 0, root_side, root_img, Delta=Delta, check=check)
    emb = emb.pulled_back(keep)
    emb.route = "almost-complete-bipartite"
    emb.notes.update({"A0": len(A0), "B0": len(B0), "H_min_degree": H.min_degree()})
    verify_embedding(T, G, emb)
    return emb


# -- almost complete hosts ---------------------------------------------------------

@dataclass
class DegreeProfile:
    X: list[int]
    Y: list[int]
    v_star: int | None
    X_v_star: list[int]
    Y_prime: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"X": self.X, "Y": self.Y, "v_star": self.v_star, "X_v_star": self.X_v_star,
                "Y_prime": self.Y_prime}


def degree_profile(G: Graph, k: int, eps) -> DegreeProfile:
    eps = frac(eps)
    low = shrink(k, 1, eps).floor()
    X = [v for v in range(G.n) if G.degree(v) <= low]
    Y = [v for v in range(G.n) if G.degree(v) >= k]
    xm = mask_of(X)
    v_star = min(Y, key=lambda v: (G.deg_into(v, xm), v), default=None)
    Xv = [] if v_star is None else [x for x in X if G.has_edge(v_star, x)]
    return DegreeProfile(X, Y, v_star, Xv)


def short_connecting_paths(G: Graph, x: int, y: int, avoid=(), want: int = 1) -> list[list[int]]:
    """A maximum family of internally disjoint x-y paths with at most three
    edges whose inner vertices avoid ``avoid``, shortest paths first.

    Using every common neighbour as a two-edge path is never worse than
    routing it into a longer path, so the count is the direct edge plus the
    common neighbours plus a maximum matching between the remaining
    neighbours of x and of y.
    """
    if x == y:
        raise PreconditionError("distinct end points", x, y)
    blocked = mask_of(avoid) | (1 << x) | (1 << y)
    paths = []
    if G.has_edge(x, y):
        paths.append([x, y])
    nx, ny = G.adj[x] & ~blocked, G.adj[y] & ~blocked
    common = nx & ny
    paths.extend([x, c, y] for c in bits(common))
    left = list(bits(nx & ~common))
    right = list(bits(ny & ~common))
    index = {b: i for i, b in enumerate(right)}
    nbrs = [[index[b] for b in bits(G.adj[a] & ny & ~common)] for a in left]
    match = bipartite_matching(len(left), nbrs, len(right))
    paths.extend([x, a, right[m], y] for a, m in zip(left, match) if m >= 0)
    if len(paths) < want:
        raise PathShortfall(len(paths), want, paths)
    return paths


def reserve_high_degree_set(G: Graph, profile: DegreeProfile, k: int, eps, log: StageLog | None = None):
    """Y' inside Y - v* with at most floor(5 sqrt(eps) k) vertices, and the
    set Z of vertices outside X with fewer than |X| neighbours in Y'."""
    log = log if log is not None else StageLog()
    eps = frac(eps)
    cap = root_times(5 * k, eps).floor()
    pool = sorted((y for y in profile.Y if y != profile.v_star), key=lambda y: (-G.degree(y), y))
    if len(profile.Y) >= cap + 1:
        branch = "large"
        Yp = sorted(pool[:cap])
    else:
        branch = "small"
        Yp = sorted(pool)
    ym = mask_of(Yp)
    xs = set(profile.X)
    need = len(profile.X)
    Z = [v for v in range(G.n) if v not in xs and G.deg_into(v, ym) < need]
    log.check("|Y'| <= floor(5 sqrt(eps) k)", len(Yp), "<=", cap)
    log.check("|Z| <= floor(2 eps k)", len(Z), "<=", floor_frac(2 * eps * k))
    log.note("reserve_branch", branch)
    profile.Y_prime = Yp
    return Yp, Z


def _pick(G: Graph, pool: int, free: int) -> int:
    return max(bits(pool), key=lambda x: ((G.adj[x] & free).bit_count(), -x))


def _embed_star_part(G, T, Ts, ids, t_img_pool, profile, Yp, bare, log):
    """Embed the cut subtree (tree ``Ts``, original ids ``ids``) so that
    vertices of X adjacent to v* get used.  Returns a map on ``Ts``."""
    v_star = profile.v_star
    all_mask = G.vertex_mask
    not_star = all_mask & ~(1 << v_star)
    xv_mask = mask_of(profile.X_v_star)
    x_mask = mask_of(profile.X)
    phi: dict[int, int] = {}
    used = 0

    def place(u, x):
        nonlocal used
        phi[u] = x
        used |= 1 << x

    relaxed = 0

    def greedy(u, allowed=not_star):
        nonlocal relaxed
        pool = G.adj[phi[Ts.parent[u]]] & allowed & ~used
        if not pool and allowed != not_star:
            # G - Y' can be tiny at small k; fall back to G - v*
            relaxed += 1
            pool = G.adj[phi[Ts.parent[u]]] & not_star & ~used
        if not pool:
            raise EmbeddingFailure(f"no free neighbour for cut-subtree vertex {u}", "cut-subtree")
        place(u, _pick(G, pool, all_mask & ~used))

    place(Ts.root, _pick(G, t_img_pool & not_star, all_mask))
    if bare.kind == "paths":
        # each bare path, oriented downwards, is keyed by its second vertex
        depth = Ts.depth
        starts = {}
        for path in bare.paths:
            if depth[path[0]] > depth[path[-1]]:
                path = path[::-1]
            if all(depth[path[i + 1]] == depth[path[i]] + 1 for i in range(len(path) - 1)):
                starts[path[1]] = path
        routed = 0
        for u in Ts.preorder()[1:]:
            if u in phi:
                continue
            free_x = xv_mask & ~used
            if u in starts and free_x:
                path = starts[u]
                x = min(bits(free_x))
                try:
                    P = short_connecting_paths(G, phi[path[0]], x, avoid=list(bits(used)) + [v_star], want=1)[0]
                except PathShortfall:
                    greedy(u)
                    continue
                for t, h in zip(path[1:], P[1:]):
                    place(t, h)
                routed += 1
                for t in path[len(P):]:
                    greedy(t)
            else:
                greedy(u)
        log.note("bare_paths_routed", routed)
        log.note("X_v_star_used", (used & xv_mask).bit_count())
        log.check("every vertex of X_v* used", (used & xv_mask).bit_count(), "==", len(profile.X_v_star), hard=False)
        return phi
    # leaves case: leaf parents U go into Y', some of their leaves into X
    need = len(profile.X)
    leaf_of = {}
    for u in range(Ts.n):
        if u != Ts.root and Ts.degree(u) == 1:
            leaf_of.setdefault(Ts.parent[u], []).append(u)
    U, L = [], []
    for p in sorted(leaf_of, key=lambda p: (-len(leaf_of[p]), p)):
        if p == Ts.root or len(U) >= max(need, 1) or len(L) >= need:
            continue
        if any(Ts.parent[p] == q or Ts.parent[q] == p for q in U):
            continue
        U.append(p)
        L.extend(leaf_of[p])
    log.check("|L| >= |X|", len(L), ">=", need, hard=False)
    in_u, in_l = set(U), set(L)
    parents_of_u = {Ts.parent[u] for u in U}
    yp = mask_of(Yp)
    outside_y = not_star & ~yp
    for u in Ts.preorder()[1:]:
        if u in phi or u in in_l:
            continue
        if u in in_u:
            greedy(u, allowed=yp)
        elif u in parents_of_u:
            kids = sum(1 for c in Ts.children[u] if c in in_u)
            pool = G.adj[phi[Ts.parent[u]]] & outside_y & ~used
            good = [x for x in bits(pool) if (G.adj[x] & yp & ~used).bit_count() >= max(need, kids)]
            if not good:
                good = [x for x in bits(pool) if (G.adj[x] & yp & ~used).bit_count() >= kids]
            if not good:
                raise EmbeddingFailure(f"no image with room in Y' for parent {u}", "cut-subtree")
            place(u, max(good, key=lambda x: ((G.adj[x] & yp & ~used).bit_count(), -x)))
        else:
            greedy(u, allowed=outside_y)
    target = len(profile.X_v_star)
    for u in L:
        if (used & x_mask).bit_count() >= target:
            greedy(u)
            continue
        pool = G.adj[phi[Ts.parent[u]]] & x_mask & ~used
        if pool:
            place(u, min(bits(pool)))
        else:
            greedy(u)
    log.note("X_used", (used & x_mask).bit_count())
    log.note("outside_Y_prime_relaxed", relaxed)
    log.check("at least |X_v*| vertices of X used", (used & x_mask).bit_count(), ">=", target, hard=False)
    return phi


def embed_almost_complete(G: Graph, k: int, T: RootedTree, eps=Fraction(1, 20), *, gamma_cap=Fraction(1, 4),
                          degree_bound=None, check: bool = True, budget: int = 2_000_000,
                          log: StageLog | None = None) -> Embedding:
    """Embed a k-edge tree into a host on at most (1 + eps) k vertices with
    average degree above k - 1 and minimum degree at least k/2.

    The cut subtree T* takes the place of the low degree vertices adjacent
    to v*; the rest of the tree is finished by the near-spanning embedder
    inside N(v*).  If a stage starves, the exact search takes over and the
    switch is recorded in ``notes['fallback']``.
    """
    eps = frac(eps)
    log = log if log is not None else StageLog(strict=check)
    log.enter("almost-complete")
    n = G.n
    sq = root_times(1, eps)
    log.check("T has k edges", T.k, "==", k)
    log.check("n <= (1 + eps) k", n, "<=", (1 + eps) * k)
    log.check("d(G) > k - 1", 2 * G.edge_count, ">", (k - 1) * n)
    log.check("min degree >= k/2", G.min_degree(), ">=", Fraction(k, 2))
    bound = root_times(Fraction(1, 1000), k) if degree_bound is None else frac(degree_bound)
    log.check("max degree of T <= bound", T.max_degree(), "<=", bound)
    if not average_degree_exceeds(G, k - 1) or n <= k:
        raise PreconditionError("d(G) > k - 1 and n > k", 2 * G.edge_count, (k - 1) * n)

    prof = degree_profile(G, k, eps)
    log.note("profile", {"X": len(prof.X), "Y": len(prof.Y), "X_v_star": len(prof.X_v_star)})
    log.check("|X| < 2 sqrt(eps) |Y|", len(prof.X), "<", sq.scaled(2 * len(prof.Y)))
    log.check("2 sqrt(eps) |Y| < 3 sqrt(eps) k", 2 * len(prof.Y), "<", 3 * k)
    if prof.v_star is None:
        raise PreconditionError("some vertex has degree >= k", 0, 1)
    v_star = prof.v_star
    notes: dict = {"v_star": v_star}
    try:
        if not prof.X_v_star:
            nbrs = sorted(G.neighbors(v_star), key=lambda x: (-G.degree(x), x))[:k]
            hv = [v_star] + nbrs
            emb = near_complete_embed(T, G.induced(hv), 0, sq, check=False)
            notes["branch"] = "X_v_star empty"
            notes["near_complete"] = emb.notes
            phi = {t: hv[h] for t, h in emb.mapping.items()}
        else:
            phi = _two_stage(G, k, T, eps, prof, gamma_cap, notes, log)
        notes["fallback"] = False
    except (EmbeddingFailure, PathShortfall) as exc:
        notes["fallback"] = True
        notes["primary_failure"] = str(exc)
        try:
            found = backtracking_embed(T, G, budget=budget)
        except BudgetExhausted:
            found = None
            notes["fallback_result"] = "budget exhausted"
        if found is None:
            raise EmbeddingFailure(f"almost-complete pipeline and fallback failed: {exc}", "almost-complete") from exc
        phi = found.mapping
    nc = notes.get("near_complete", {})
    notes["inner_fallback"] = nc.get("route", "skeleton+matching") != "skeleton+matching"
    emb = Embedding(phi, route="almost-complete", notes=notes)
    emb.notes["profile"] = prof.to_dict()
    verify_embedding(T, G, emb)
    return emb


def _two_stage(G, k, T, eps, prof, gamma_cap, notes, log):
    sq = root_times(1, eps)
    # gamma = 168 sqrt(eps), replaced by a rational lower bound and capped
    scale = 10 ** 6
    gamma = min(frac(gamma_cap), Fraction(root_floor(168 * 168 * eps * scale * scale), scale))
    log.check("gamma = min(cap, 168 sqrt(eps)) keeps k >= 200/gamma", k * gamma, ">=", 200)
    cert = find_cut_subtree(T, gamma, check_size=False)
    t_star = cert.anchor
    Ts, ids = T.induced_subtree(cert.subtree, t_star)
    log.check("|T*| >= gamma k / 2", Ts.n, ">=", gamma * k / 2)
    log.check("|T*| <= gamma k", Ts.n, "<=", gamma * k)
    bare = leaves_or_bare_paths(Ts, 3)
    notes["case"] = 1 if bare.kind == "paths" else 2
    notes["T_star"] = Ts.n
    Yp, Z = reserve_high_degree_set(G, prof, k, eps, log)
    notes["Z"] = len(Z)
    v_star = prof.v_star
    # t* goes next to v* when possible so that H below is well formed
    good_deg = shrink(k, 1, eps)
    hi = mask_of(x for x in range(G.n) if G.degree(x) >= good_deg)
    pool = hi & G.adj[v_star] or hi or G.vertex_mask
    part = _embed_star_part(G, T, Ts, ids, pool, prof, Yp, bare, log)
    phi = {ids[u]: x for u, x in part.items()}
    rest = [v for v in range(T.n) if v not in cert.subtree or v == t_star]
    Tp, rest_ids = T.induced_subtree(rest, t_star)
    used = mask_of(phi.values())
    cand = G.adj[v_star] & ~used & ~mask_of(prof.X_v_star)
    need = Tp.n - 2
    log.check("|N(v*) - phi(T*) - X_v*| >= |T'| - 2", cand.bit_count(), ">=", need)
    cand_list = sorted(bits(cand), key=lambda x: (-(G.adj[x] & cand).bit_count(), x))[:need]
    if len(cand_list) < need:
        raise EmbeddingFailure("too few free neighbours of v* for the remaining tree", "almost-complete")
    hv = [v_star, phi[t_star]] + cand_list
    emb = near_complete_embed(Tp, G.induced(hv), 0, root_times(86, eps), root_image=1, check=False)
    notes["near_complete"] = emb.notes
    for u, h in emb.mapping.items():
        phi[rest_ids[u]] = hv[h]
    return phi


# -- perturbed host families ---------------------------------------------------------

def perturbed_complete(k: int, rng, eps=Fraction(1, 20), low: int = 1, tries: int = 100) -> Graph:
    """K_n with n slightly above k, a few vertices pushed down to degree at
    most (1 - sqrt(eps)) k and random further deletions, keeping
    d > k - 1 and min degree >= k/2."""
    eps = frac(eps)
    cut = shrink(k, 1, eps).floor()
    for _ in range(tries):
        n = k + 1 + rng.randrange(max(1, (eps * k / 8).__floor__() + 1))
        adj = [((1 << n) - 1) & ~(1 << v) for v in range(n)]
        edges = n * (n - 1) // 2
        spare = edges - ((k - 1) * n // 2 + 1)
        victims = rng.sample(range(n), low)
        for v in victims:
            drop = (n - 1) - cut
            for u in rng.sample([u for u in bits(adj[v]) if u not in victims], min(drop, spare)):
                adj[v] &= ~(1 << u)
                adj[u] &= ~(1 << v)
                spare -= 1
        for _ in range(rng.randrange(spare + 1) if spare > 0 else 0):
            u, v = rng.sample(range(n), 2)
            if adj[u] >> v & 1 and min(adj[u].bit_count(), adj[v].bit_count()) > k // 2 + 1:
                adj[u] &= ~(1 << v)
                adj[v] &= ~(1 << u)
        G = Graph.from_adjacency(adj)
        if average_degree_exceeds(G, k - 1) and 2 * G.min_degree() >= k:
            return G
    raise PreconditionError("perturbation kept the hypotheses", tries, 0)


def perturbed_complete_bipartite(k: int, Delta: int, rng, tries: int = 100) -> tuple[Graph, Bipartition]:
    """K_{a,b} with a, b <= (1 + 1/(25 Delta^2)) k, some cross edges removed
    and some intra-class edges added, subject to the bipartite embedder's
    hypotheses."""
    eps = Fraction(1, 25 * Delta * Delta)
    top = (1 + eps) * k
    for _ in range(tries):
        a = rng.randint(k, top.__floor__())
        b = rng.randint(k, top.__floor__())
        n = a + b
        A, B = list(range(a)), list(range(a, n))
        edges = {(x, y) for x in A for y in B}
        rate = rng.random() / 100
        edges = {e for e in edges if rng.random() >= rate}
        for _ in range(rng.randrange(len(edges) // (60 * Delta * Delta) + 1)):
            side = A if rng.random() < 0.5 else B
            x, y = sorted(rng.sample(side, 2))
            edges.add((x, y))
        G = Graph(n, sorted(edges))
        P = Bipartition(A, B)
        if (average_degree_exceeds(G, k - 1) and 2 * G.min_degree() >= k
                and intra_edges(G, P) * 50 * Delta * Delta <= G.edge_count):
            return G, P
    raise PreconditionError("perturbation kept the hypotheses", tries, 0)
