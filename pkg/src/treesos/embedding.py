"""Tree embeddings: greedy placement lemmas, near-spanning embedding, exact search.

An embedding maps tree vertices injectively to host vertices so that tree
edges land on host edges.  Every routine here returns an :class:`Embedding`
whose ``trace`` records how many admissible images each vertex had when it
was placed; :func:`verify_embedding` re-checks the map from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .errors import BudgetExhausted, ContractViolation, EmbeddingFailure, PreconditionError
from .exact import Surd, frac
from .graph import Bipartition, Graph, bits, mask_of
from .matching import bipartite_matching
from .trees import RootedTree, colour_classes


@dataclass
class Embedding:
    mapping: dict[int, int]
    trace: dict[int, int] = field(default_factory=dict)
    route: str = ""
    notes: dict = field(default_factory=dict)

    @property
    def used(self) -> frozenset:
        return frozenset(self.mapping.values())

    def pulled_back(self, labels) -> "Embedding":
        """Same embedding with host ids translated through ``labels``."""
        return Embedding({t: labels[h] for t, h in self.mapping.items()}, dict(self.trace), self.route, dict(self.notes))

    def to_dict(self) -> dict:
        return {
            "mapping": {str(t): h for t, h in sorted(self.mapping.items())},
            "route": self.route,
            "trace_min": min(self.trace.values(), default=None),
            "notes": self.notes,
        }


def embedding_problems(T: RootedTree, G: Graph, phi: Mapping[int, int], pins=None, complete=True) -> list[str]:
    problems = []
    if complete and set(phi) != set(range(T.n)):
        problems.append(f"map covers {len(phi)} of {T.n} tree vertices")
    images = list(phi.values())
    if len(set(images)) != len(images):
        problems.append("map is not injective")
    if any(not 0 <= x < G.n for x in images):
        problems.append("image outside the host")
        return problems
    for p, c in T.edges():
        if p in phi and c in phi and not G.has_edge(phi[p], phi[c]):
            problems.append(f"tree edge {p}-{c} maps to non-edge {phi[p]}-{phi[c]}")
    for t, x in (pins or {}).items():
        if phi.get(t) != x:
            problems.append(f"pin {t}->{x} not respected")
    return problems


def verify_embedding(T: RootedTree, G: Graph, emb, pins=None, complete=True) -> None:
    phi = emb.mapping if isinstance(emb, Embedding) else emb
    problems = embedding_problems(T, G, phi, pins, complete)
    if problems:
        raise ContractViolation("; ".join(problems))


# -- orders -----------------------------------------------------------------

def root_children_first(T: RootedTree) -> list[int]:
    """Root, then all its children, then DFS through each child's subtree."""
    order = [T.root, *T.children[T.root]]
    for c in T.children[T.root]:
        stack = list(reversed(T.children[c]))
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(T.children[v]))
    return order


# -- greedy core --------------------------------------------------------------

def greedy_place(
    T: RootedTree,
    G: Graph,
    order,
    phi: dict[int, int],
    trace: dict[int, int],
    allowed: Callable[[int], int],
    prefer: int | None = None,
    stage: str = "greedy",
) -> None:
    """Place each vertex of ``order`` next to its already placed parent.

    Candidates are unused neighbours of the parent's image inside
    ``allowed(u)``; the chosen one maximises its number of unused neighbours
    in ``prefer`` (all vertices by default), ties to the smallest id.
    """
    used = mask_of(phi.values())
    prefer = G.vertex_mask if prefer is None else prefer
    for step, u in enumerate(order):
        if u in phi:
            continue
        p = T.parent[u]
        pool = allowed(u) & ~used
        if p >= 0 and p in phi:
            pool &= G.adj[phi[p]]
        elif p >= 0:
            raise EmbeddingFailure(f"parent of {u} not yet placed", stage, step)
        if not pool:
            raise EmbeddingFailure(f"no admissible image for tree vertex {u}", stage, step)
        free = prefer & ~used
        best = max(bits(pool), key=lambda x: ((G.adj[x] & free).bit_count(), -x))
        phi[u] = best
        trace[u] = pool.bit_count()
        used |= 1 << best


# -- greedy lemmas --------------------------------------------------------------

def greedy_embed_h(T: RootedTree, G: Graph, h: int, v: int, Delta: int | None = None,
                   check: bool = True) -> Embedding:
    """Embed a tree with k - h edges, root at v, using only degree >= k
    vertices beyond the root (k is inferred as ``T.k + h``)."""
    k = T.k + h
    Delta = T.max_degree() if Delta is None else Delta
    high = mask_of(x for x in range(G.n) if G.degree(x) >= k)
    low_count = G.n - high.bit_count()
    ok = T.max_degree() <= Delta and G.min_degree() >= Delta + h and low_count <= h and 0 <= v < G.n
    if check and not ok:
        if T.max_degree() > Delta:
            raise PreconditionError("max tree degree <= Delta", T.max_degree(), Delta)
        if G.min_degree() < Delta + h:
            raise PreconditionError("min host degree >= Delta + h", G.min_degree(), Delta + h)
        if low_count > h:
            raise PreconditionError("at most h vertices of degree < k", low_count, h)
        raise PreconditionError("root image is a host vertex", v, G.n)
    phi = {T.root: v}
    trace = {T.root: 1}
    try:
        greedy_place(T, G, root_children_first(T), phi, trace, lambda u: high, prefer=high, stage="greedy-h")
    except EmbeddingFailure as exc:
        if ok:
            raise ContractViolation(f"greedy embedding failed under verified hypotheses: {exc}") from exc
        raise
    emb = Embedding(phi, trace, route="greedy-h")
    verify_embedding(T, G, emb)
    return emb


def greedy_embed_bipartite(T: RootedTree, G: Graph, P: Bipartition, h: int, root_side: str, v: int,
                           Delta: int | None = None, check: bool = True) -> Embedding:
    """Embed T with the root's colour class in side ``root_side`` ("A" or "B")."""
    if root_side not in ("A", "B"):
        raise PreconditionError("root_side is 'A' or 'B'", root_side)
    P.check(G)
    a_mask, b_mask = P.masks
    C, D = colour_classes(T)
    to_a, to_b = (C, D) if root_side == "A" else (D, C)
    k1, k2 = len(to_a) + h, len(to_b) + h
    Delta = T.max_degree() if Delta is None else Delta
    cross = [G.deg_into(x, b_mask if a_mask >> x & 1 else a_mask) for x in range(G.n)]
    high_a = mask_of(x for x in bits(a_mask) if cross[x] >= k2)
    high_b = mask_of(x for x in bits(b_mask) if cross[x] >= k1)
    low_a = a_mask.bit_count() - high_a.bit_count()
    low_b = b_mask.bit_count() - high_b.bit_count()
    side_of_v = a_mask if root_side == "A" else b_mask
    ok = (
        T.max_degree() <= Delta and min(cross, default=0) >= Delta + h and low_a <= h and low_b <= h
        and 0 <= v < G.n and side_of_v >> v & 1
    )
    if check and not ok:
        if not (0 <= v < G.n and side_of_v >> v & 1):
            raise PreconditionError("root image on the side of the root's colour class", v)
        if min(cross, default=0) < Delta + h:
            raise PreconditionError("min cross degree >= Delta + h", min(cross, default=0), Delta + h)
        if low_a > h:
            raise PreconditionError("at most h vertices of A with degree < k2", low_a, h)
        if low_b > h:
            raise PreconditionError("at most h vertices of B with degree < k1", low_b, h)
        raise PreconditionError("max tree degree <= Delta", T.max_degree(), Delta)
    phi = {T.root: v}
    trace = {T.root: 1}
    in_a = set(to_a)
    try:
        greedy_place(T, G, root_children_first(T), phi, trace,
                     lambda u: high_a if u in in_a else high_b, prefer=high_a | high_b, stage="greedy-bipartite")
    except EmbeddingFailure as exc:
        if ok:
            raise ContractViolation(f"bipartite greedy failed under verified hypotheses: {exc}") from exc
        raise
    emb = Embedding(phi, trace, route="greedy-bipartite")
    verify_embedding(T, G, emb)
    return emb


# -- near-spanning embedding ----------------------------------------------------

def leaf_counts(T: RootedTree) -> list[int]:
    """Number of leaf neighbours of each tree vertex."""
    out = [0] * T.n
    for v in range(T.n):
        for u in T.neighbors(v):
            if T.degree(u) == 1:
                out[v] += 1
    return out


def near_complete_embed(T: RootedTree, H: Graph, v: int, nu, root_image: int | None = None,
                        check: bool = True, budget: int = 200_000) -> Embedding:
    """Embed T (at most |H| - 1 edges) into H, where v is adjacent to all of H.

    The skeleton (non-leaf vertices) is placed greedily, each image keeping
    enough free neighbours for its pending children and, among those, having
    the fewest free neighbours; the leaves are then
    assigned by a bipartite matching.  When the matching is not perfect the
    exact search takes over, first with the skeleton pinned and then with
    only the root pinned; ``notes['route']`` says which step finished.
    """
    # nu may be an exact surd such as sqrt(eps)
    nu = nu if isinstance(nu, Surd) else frac(nu)
    k = H.n - 1
    leaves_at = leaf_counts(T)
    if root_image is not None and not 0 <= root_image < H.n:
        raise PreconditionError("root image is a host vertex", root_image)
    if isinstance(nu, Surd):
        deg_floor = Surd(nu.a * -2 * k + k, -2 * k * nu.c, nu.x, nu.n)
        leaf_cap = nu.scaled(Fraction(k, 2))
    else:
        deg_floor, leaf_cap = (1 - 2 * nu) * k, nu * k / 2
    conds = {
        "tree fits": (T.k, "<=", k),
        "0 < nu < 1/200": (nu, "<", Fraction(1, 200)),
        "min degree >= (1 - 2 nu) k": (H.min_degree(), ">=", deg_floor),
        "deg(v) = k": (H.degree(v), "==", k),
        "leaves per vertex <= nu k / 2": (max(leaves_at, default=0), "<=", leaf_cap),
        "root image differs from v": (root_image if root_image is not None else -1, "!=", v),
    }
    held = {}
    for name, (lhs, op, rhs) in conds.items():
        held[name] = {"<=": lhs <= rhs, "<": lhs < rhs, ">=": lhs >= rhs, "==": lhs == rhs, "!=": lhs != rhs}[op]
        if check and not held[name]:
            raise PreconditionError(name, lhs, rhs)
    if T.k > k:
        raise PreconditionError("tree fits", T.k, k)
    notes = {"hypotheses_held": all(held.values())}

    skeleton = [u for u in T.preorder() if T.degree(u) > 1 or u == T.root]
    need = [len(T.children[u]) for u in range(T.n)]
    phi: dict[int, int] = {}
    trace: dict[int, int] = {}
    used = 0
    failed_stage = None
    avoid_v = ~(1 << v)
    for step, u in enumerate(skeleton):
        p = T.parent[u]
        if p < 0:
            pool = (1 << root_image) if root_image is not None else H.vertex_mask & avoid_v
        else:
            pool = H.adj[phi[p]] & ~used
            if T.degree(u) > 1:
                pool &= avoid_v
        pool &= ~used
        free = H.vertex_mask & ~used
        # keep room for this vertex's children
        good = [x for x in bits(pool) if (H.adj[x] & free & ~(1 << x)).bit_count() >= need[u]]
        if not good:
            failed_stage = f"skeleton step {step}"
            break
        # fewest free neighbours first, so that awkward vertices are used early
        x = min(good, key=lambda x: ((H.adj[x] & free).bit_count(), x))
        phi[u] = x
        trace[u] = len(good)
        used |= 1 << x
    route = None
    if failed_stage is None:
        leaves = [u for u in range(T.n) if u not in phi]
        free_list = [x for x in range(H.n) if not used >> x & 1]
        index = {x: i for i, x in enumerate(free_list)}
        nbrs = [[index[x] for x in bits(H.adj[phi[T.parent[u]]] & ~used)] for u in leaves]
        match = bipartite_matching(len(leaves), nbrs, len(free_list))
        if all(m >= 0 for m in match):
            for i, (u, m) in enumerate(zip(leaves, match)):
                phi[u] = free_list[m]
                trace[u] = len(nbrs[i])
            route = "skeleton+matching"
        else:
            failed_stage = f"leaf matching covered {sum(m >= 0 for m in match)} of {len(leaves)}"
    if route is None:
        notes["primary_failure"] = failed_stage
        attempts = []
        if failed_stage.startswith("leaf"):
            attempts.append(("fallback-skeleton-pinned", dict(phi)))
        attempts.append(("fallback-root-pinned", {T.root: root_image} if root_image is not None else {}))
        result = None
        for name, pins in attempts:
            try:
                result = backtracking_embed(T, H, pins=pins, budget=budget)
            except BudgetExhausted:
                notes[name] = "budget exhausted"
                continue
            if result is not None:
                route = name
                phi, trace = result.mapping, result.trace
                break
            notes[name] = "not found"
        if route is None:
            raise EmbeddingFailure(f"near-complete embedding failed ({failed_stage})", "near-complete")
    notes["route"] = route
    emb = Embedding(phi, trace, route="near-complete", notes=notes)
    verify_embedding(T, H, emb, pins={T.root: root_image} if root_image is not None else None)
    return emb


# -- exact search -----------------------------------------------------------------

def _search_order(T: RootedTree, start: list[int], mode: str) -> list[int]:
    placed = list(start)
    inside = set(placed)
    if not placed:
        if mode == "degree":
            first = max(range(T.n), key=lambda u: (T.degree(u), -u))
        else:
            first = min(range(T.n), key=lambda u: (T.degree(u), u))
        placed.append(first)
        inside.add(first)
    frontier = set()
    for u in placed:
        frontier.update(w for w in T.neighbors(u) if w not in inside)
    while frontier:
        if mode == "degree":
            nxt = max(frontier, key=lambda u: (T.degree(u), -u))
        else:
            nxt = min(frontier, key=lambda u: (T.degree(u), u))
        frontier.discard(nxt)
        placed.append(nxt)
        inside.add(nxt)
        frontier.update(w for w in T.neighbors(nxt) if w not in inside)
    # components of T not touching the start (only possible when start is empty and T is a tree: never)
    return placed


def backtracking_embed(T: RootedTree, G: Graph, pins: Mapping[int, int] | None = None,
                       budget: int | None = None, domains: Mapping[int, int] | None = None,
                       order: str = "degree") -> Embedding | None:
    """Exact search for a copy of T in G respecting ``pins`` and ``domains``.

    Returns an Embedding, ``None`` when no embedding exists, or raises
    :class:`BudgetExhausted` after ``budget`` node expansions.  ``order``
    selects one of two vertex-ordering heuristics ("degree" or "reverse");
    both are exact, they only differ in search order.
    """
    pins = dict(pins or {})
    domains = dict(domains or {})
    if order not in ("degree", "reverse"):
        raise ValueError("order is 'degree' or 'reverse'")
    if T.n > G.n:
        return None
    if len(set(pins.values())) != len(pins):
        return None
    for t, x in pins.items():
        if not 0 <= x < G.n or (t in domains and not domains[t] >> x & 1):
            return None
    for p, c in T.edges():
        if p in pins and c in pins and not G.has_edge(pins[p], pins[c]):
            return None
    seq = _search_order(T, sorted(pins), order)
    tdeg = [T.degree(u) for u in range(T.n)]
    gdeg = G.degrees
    full = G.vertex_mask
    static = []
    for u in range(T.n):
        m = mask_of(x for x in range(G.n) if gdeg[x] >= tdeg[u])
        if u in domains:
            m &= domains[u]
        static.append(m)
    pos = {u: i for i, u in enumerate(seq)}
    earlier_nbrs = [[w for w in T.neighbors(u) if pos[w] < pos[u]] for u in seq]
    later_count = [sum(1 for w in T.neighbors(u) if pos[w] > pos[u]) for u in seq]

    phi = [-1] * T.n
    counts = [0] * len(seq)
    used = 0
    expansions = 0
    stack: list[int] = []  # remaining candidate mask per depth

    def candidates(i):
        u = seq[i]
        if u in pins:
            m = 1 << pins[u]
            if used >> pins[u] & 1:
                return 0
        else:
            m = static[u] & ~used
        for w in earlier_nbrs[i]:
            m &= G.adj[phi[w]]
        need = later_count[i]
        if need:
            m = mask_of(x for x in bits(m) if (G.adj[x] & ~used).bit_count() >= need)
        return m

    if not seq:
        return Embedding({}, {}, route="backtracking")
    stack.append(candidates(0))
    counts[0] = stack[0].bit_count()
    while stack:
        i = len(stack) - 1
        if phi[seq[i]] >= 0:
            used &= ~(1 << phi[seq[i]])
            phi[seq[i]] = -1
        m = stack[i]
        if not m:
            stack.pop()
            continue
        low = m & -m
        x = low.bit_length() - 1
        stack[i] = m ^ low
        expansions += 1
        if budget is not None and expansions > budget:
            raise BudgetExhausted(budget)
        phi[seq[i]] = x
        used |= low
        if i + 1 == len(seq):
            mapping = {u: phi[u] for u in range(T.n)}
            trace = {seq[j]: counts[j] for j in range(len(seq))}
            emb = Embedding(mapping, trace, route="backtracking", notes={"expansions": expansions, "order": order})
            verify_embedding(T, G, emb, pins=pins)
            return emb
        nxt = candidates(i + 1)
        counts[i + 1] = nxt.bit_count()
        stack.append(nxt)
    return None
