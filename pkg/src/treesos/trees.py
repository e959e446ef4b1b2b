"""Rooted trees, enumeration up to isomorphism, and decomposition certificates.

Trees have vertices ``0..k`` and are stored as a parent array (the root's
entry is ``-1``) with derived children lists.  Decomposition routines return
small certificate objects; each has a matching ``verify_*`` function that
re-derives everything from the tree alone, sharing no code with the
constructor beyond the tree representation itself.
"""

from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import ContractViolation, FormatError, PreconditionError
from .exact import frac


class RootedTree:
    __slots__ = ("parent", "root", "children", "k", "_depth", "_sizes")

    def __init__(self, parent: Sequence[int]):
        parent = tuple(int(p) for p in parent)
        n = len(parent)
        if n == 0:
            raise PreconditionError("a tree has at least one vertex")
        roots = [v for v, p in enumerate(parent) if p == -1]
        if len(roots) != 1:
            raise PreconditionError(f"expected exactly one root, found {len(roots)}")
        children = [[] for _ in range(n)]
        for v, p in enumerate(parent):
            if p == -1:
                continue
            if not 0 <= p < n or p == v:
                raise PreconditionError(f"bad parent {p} for vertex {v}")
            children[p].append(v)
        self.parent = parent
        self.root = roots[0]
        self.children = tuple(tuple(c) for c in children)
        self.k = n - 1
        self._depth = None
        self._sizes = None
        if len(self.preorder()) != n:
            raise PreconditionError("parent array contains a cycle")

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_edges(cls, n: int, edges, root: int = 0) -> "RootedTree":
        if len(edges) != n - 1:
            raise PreconditionError(f"a tree on {n} vertices has {n - 1} edges, got {len(edges)}")
        nbrs = [[] for _ in range(n)]
        for u, v in edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        parent = [-2] * n
        parent[root] = -1
        stack = [root]
        while stack:
            v = stack.pop()
            for u in nbrs[v]:
                if parent[u] == -2:
                    parent[u] = v
                    stack.append(u)
        if -2 in parent:
            raise PreconditionError("edge set is not connected")
        return cls(parent)

    @classmethod
    def path(cls, k: int) -> "RootedTree":
        return cls([-1] + list(range(k)))

    @classmethod
    def star(cls, k: int) -> "RootedTree":
        return cls([-1] + [0] * k)

    @classmethod
    def caterpillar(cls, spine: int, legs: int) -> "RootedTree":
        """Path of ``spine`` vertices, each carrying ``legs`` pendant leaves."""
        parent = [-1] + list(range(spine - 1))
        for s in range(spine):
            parent.extend([s] * legs)
        return cls(parent)

    @classmethod
    def spider(cls, legs: int, length: int) -> "RootedTree":
        parent = [-1]
        for _ in range(legs):
            prev = 0
            for _ in range(length):
                parent.append(prev)
                prev = len(parent) - 1
        return cls(parent)

    # -- basic queries -----------------------------------------------------
    @property
    def n(self) -> int:
        return self.k + 1

    def __len__(self):
        return self.k + 1

    def __repr__(self):
        return f"RootedTree(k={self.k}, root={self.root})"

    def __eq__(self, other):
        return isinstance(other, RootedTree) and self.parent == other.parent

    def __hash__(self):
        return hash(self.parent)

    def neighbors(self, v: int) -> list[int]:
        p = self.parent[v]
        return ([p] if p >= 0 else []) + list(self.children[v])

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (self.parent[v] >= 0)

    def max_degree(self) -> int:
        return max((self.degree(v) for v in range(self.n)), default=0)

    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in enumerate(self.parent) if p >= 0]

    def leaves(self) -> list[int]:
        return [v for v in range(self.n) if self.degree(v) <= 1]

    def preorder(self) -> list[int]:
        """DFS order from the root, children visited in stored order."""
        order = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.children[v]))
        return order

    def bfs_order(self) -> list[int]:
        order = [self.root]
        for v in order:
            order.extend(self.children[v])
        return order

    @property
    def depth(self) -> tuple[int, ...]:
        if self._depth is None:
            d = [0] * self.n
            for v in self.bfs_order()[1:]:
                d[v] = d[self.parent[v]] + 1
            self._depth = tuple(d)
        return self._depth

    @property
    def subtree_sizes(self) -> tuple[int, ...]:
        if self._sizes is None:
            s = [1] * self.n
            for v in reversed(self.bfs_order()):
                p = self.parent[v]
                if p >= 0:
                    s[p] += s[v]
            self._sizes = tuple(s)
        return self._sizes

    def descendants(self, v: int) -> list[int]:
        out = [v]
        for u in out:
            out.extend(self.children[u])
        return out

    def rerooted(self, r: int) -> "RootedTree":
        return RootedTree.from_edges(self.n, self.edges(), root=r)

    def induced_subtree(self, vertices, root: int) -> tuple["RootedTree", list[int]]:
        """Subtree on ``vertices`` (must be connected) rooted at ``root``.

        Returns the new tree and ``old``, where ``old[i]`` is the original id
        of new vertex ``i``.  New ids follow DFS order from the root.
        """
        vs = set(vertices)
        if root not in vs:
            raise PreconditionError("root outside the vertex set")
        old = []
        parent = []
        index = {}
        pushed = {root}
        stack = [(root, -1)]
        while stack:
            v, p = stack.pop()
            index[v] = len(old)
            old.append(v)
            parent.append(p)
            for u in reversed(self.neighbors(v)):
                if u in vs and u not in pushed:
                    pushed.add(u)
                    stack.append((u, index[v]))
        if len(old) != len(vs):
            raise PreconditionError("vertex set does not induce a connected subtree")
        return RootedTree(parent), old

    def to_graph(self):
        from .graph import Graph

        return Graph(self.n, self.edges())

    # -- text format -------------------------------------------------------
    def to_text(self) -> str:
        return " ".join([str(self.k), str(self.root)] + [str(p) for p in self.parent])

    @classmethod
    def from_text(cls, text: str) -> "RootedTree":
        parts = text.split()
        try:
            nums = [int(x) for x in parts]
        except ValueError:
            raise FormatError(f"non-integer token in tree text {text!r}") from None
        if len(nums) < 3:
            raise FormatError("tree text needs 'k root p0 ... pk'")
        k, root, parent = nums[0], nums[1], nums[2:]
        if len(parent) != k + 1:
            raise FormatError(f"parent array has {len(parent)} entries, expected {k + 1}")
        if not 0 <= root <= k or parent[root] != -1:
            raise FormatError("root entry of the parent array must be -1")
        try:
            return cls(parent)
        except PreconditionError as exc:
            raise FormatError(str(exc)) from None


# -- canonical forms ---------------------------------------------------------

def _rooted_code(nbrs, root) -> str:
    """AHU code of the tree rooted at ``root``."""
    parent = {root: -1}
    order = [root]
    for v in order:
        for u in nbrs[v]:
            if u != parent[v]:
                parent[u] = v
                order.append(u)
    codes = {}
    for v in reversed(order):
        kids = sorted(codes.pop(u) for u in nbrs[v] if u != parent[v])
        codes[v] = "(" + "".join(kids) + ")"
    return codes[root]


def centroids(T: RootedTree) -> list[int]:
    n = T.n
    sizes = T.subtree_sizes
    out = []
    for v in range(n):
        heaviest = n - sizes[v]
        for c in T.children[v]:
            heaviest = max(heaviest, sizes[c])
        if 2 * heaviest <= n:
            out.append(v)
    return out


def canonical_form(T: RootedTree) -> str:
    """Isomorphism invariant of the underlying free tree."""
    nbrs = [T.neighbors(v) for v in range(T.n)]
    return min(_rooted_code(nbrs, c) for c in centroids(T))


def tree_from_code(code: str) -> RootedTree:
    """Inverse of an AHU code: vertices numbered in DFS order."""
    parent = []
    stack = []
    for ch in code:
        if ch == "(":
            parent.append(stack[-1] if stack else -1)
            stack.append(len(parent) - 1)
        else:
            stack.pop()
    return RootedTree(parent)


@lru_cache(maxsize=None)
def _level(k: int, dmax: int) -> tuple[str, ...]:
    if k == 0:
        return ("()",)
    out = set()
    for code in _level(k - 1, dmax):
        T = tree_from_code(code)
        for v in range(T.n):
            if T.degree(v) < dmax:
                out.add(canonical_form(RootedTree(T.parent + (v,))))
    return tuple(sorted(out))


def enumerate_trees(k: int, delta_max: int) -> Iterator[RootedTree]:
    """One tree per isomorphism class with k edges and max degree <= delta_max.

    Trees grow by leaf addition (deleting a leaf never raises a degree, so
    pruning at delta_max is safe) and are deduplicated by centroid-rooted
    canonical codes.  Order is the sorted order of those codes.
    """
    if k < 0 or delta_max < 0:
        raise PreconditionError("k >= 0 and delta_max >= 0")
    if k >= 1 and delta_max < 1:
        return
    if k >= 2 and delta_max < 2:
        return
    for code in _level(k, delta_max):
        yield tree_from_code(code)


def random_tree(k: int, rng: random.Random, max_degree: int | None = None) -> RootedTree:
    """Uniform random labelled tree (Prüfer) or, with a degree cap, a random
    attachment tree whose vertices never exceed ``max_degree``."""
    n = k + 1
    if n <= 2:
        return RootedTree([-1] + [0] * k)
    if max_degree is None:
        seq = [rng.randrange(n) for _ in range(n - 2)]
        deg = [1] * n
        for x in seq:
            deg[x] += 1
        heap = [v for v in range(n) if deg[v] == 1]
        heapq.heapify(heap)
        edges = []
        for x in seq:
            leaf = heapq.heappop(heap)
            edges.append((leaf, x))
            deg[x] -= 1
            if deg[x] == 1:
                heapq.heappush(heap, x)
        edges.append((heapq.heappop(heap), heapq.heappop(heap)))
        return RootedTree.from_edges(n, edges, root=rng.randrange(n))
    if max_degree < 2:
        raise PreconditionError("max_degree >= 2 needed for k >= 2")
    deg = [0] * n
    open_ = [0]
    parent = [-1]
    for v in range(1, n):
        i = rng.randrange(len(open_))
        p = open_[i]
        parent.append(p)
        deg[p] += 1
        deg[v] = 1
        if deg[p] >= max_degree:
            open_[i] = open_[-1]
            open_.pop()
        open_.append(v)
    return RootedTree(parent).rerooted(rng.randrange(n))


# -- colour classes ----------------------------------------------------------

def colour_classes(T: RootedTree) -> tuple[frozenset, frozenset]:
    """Proper 2-colouring (C, D) with the root in C.

    Also checks that the smaller class has at least k / Δ(T) vertices.
    """
    depth = T.depth
    C = frozenset(v for v in range(T.n) if depth[v] % 2 == 0)
    D = frozenset(v for v in range(T.n) if depth[v] % 2 == 1)
    if T.k >= 1 and min(len(C), len(D)) * T.max_degree() < T.k:
        raise ContractViolation(f"colour classes {len(C)}, {len(D)} below k/Δ for k={T.k}")
    return C, D


# -- decomposition certificates ----------------------------------------------

@dataclass
class CutCertificate:
    """Either a cut subtree (``subtree`` and ``anchor``) or a cut set ``S``.

    ``components`` lists the vertex sets of the components that remain once
    the subtree or the cut set is deleted.
    """

    kind: str
    components: list[frozenset]
    subtree: frozenset | None = None
    anchor: int | None = None
    cut_set: frozenset | None = None
    params: dict = field(default_factory=dict)


def components_without(T: RootedTree, removed) -> list[frozenset]:
    removed = set(removed)
    seen = set(removed)
    comps = []
    for s in range(T.n):
        if s in seen:
            continue
        comp = [s]
        seen.add(s)
        for v in comp:
            for u in T.neighbors(v):
                if u not in seen:
                    seen.add(u)
                    comp.append(u)
        comps.append(frozenset(comp))
    return comps


def find_cut_subtree(T: RootedTree, gamma, check_size: bool = True) -> CutCertificate:
    """A subtree T* with γk/2 <= |T*| <= γk whose removal leaves only
    components hanging off the anchor t* in T*.

    Descend from the root into the largest child while that child's subtree
    has more than γk/2 vertices; the stopping vertex is t*.  Every child
    subtree of t* then has at most γk/2 vertices, so absorbing them largest
    first while the total stays <= γk lands in the window.
    """
    gamma = frac(gamma)
    k = T.k
    if not 0 < gamma <= 1:
        raise PreconditionError("0 < gamma <= 1", gamma)
    if check_size and k * gamma < 200:
        raise PreconditionError("k >= 200/gamma", k, 200 / gamma)
    if gamma * k < 1:
        raise PreconditionError("gamma * k >= 1", gamma * k, 1)
    sizes = T.subtree_sizes
    half = gamma * k / 2
    v = T.root
    while True:
        big = max(T.children[v], key=lambda c: (sizes[c], -c), default=None)
        if big is None or sizes[big] <= half:
            break
        v = big
    anchor = v
    chosen = [anchor]
    total = 1
    for c in sorted(T.children[anchor], key=lambda c: (-sizes[c], c)):
        if total + sizes[c] <= gamma * k:
            chosen.extend(T.descendants(c))
            total += sizes[c]
    sub = frozenset(chosen)
    return CutCertificate(
        kind="subtree",
        subtree=sub,
        anchor=anchor,
        components=components_without(T, sub),
        params={"gamma": str(gamma)},
    )


def cut_set(T: RootedTree, beta) -> CutCertificate:
    """S containing the root, |S| <= 1/β + 2, components of T - S of size <= βk."""
    beta = frac(beta)
    if not 0 < beta < 1:
        raise PreconditionError("0 < beta < 1", beta)
    if T.k < 1 / beta:
        raise PreconditionError("k >= 1/beta", T.k, 1 / beta)
    bound = beta * T.k
    acc = [1] * T.n
    S = {T.root}
    for v in reversed(T.bfs_order()):
        for c in T.children[v]:
            acc[v] += acc[c]
        if acc[v] > bound:
            S.add(v)
            acc[v] = 0
    S = frozenset(S)
    return CutCertificate(
        kind="cut-set", cut_set=S, components=components_without(T, S), params={"beta": str(beta)}
    )


def even_cut_set(T: RootedTree, beta, check_degree: bool = True) -> CutCertificate:
    """Cut set whose members all sit at even distance from the root.

    Odd-depth members of an ordinary cut set are swapped for their
    neighbourhoods; the odd vertex becomes a singleton component.
    """
    beta = frac(beta)
    if not 0 < beta < Fraction(1, 2):
        raise PreconditionError("0 < beta < 1/2", beta)
    if check_degree and T.max_degree() > beta * beta * T.k / 2:
        raise PreconditionError("max degree <= beta^2 k / 2", T.max_degree(), beta * beta * T.k / 2)
    base = cut_set(T, beta)
    depth = T.depth
    odd = {s for s in base.cut_set if depth[s] % 2}
    S = set(base.cut_set) - odd
    for s in odd:
        S.update(T.neighbors(s))
    S = frozenset(S)
    return CutCertificate(
        kind="even-cut-set", cut_set=S, components=components_without(T, S), params={"beta": str(beta)}
    )


@dataclass
class BareResult:
    kind: str  # "leaves" or "paths"
    leaves: list[int] = field(default_factory=list)
    paths: list[list[int]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.leaves) if self.kind == "leaves" else len(self.paths)


def _degree2_runs(T: RootedTree) -> list[list[int]]:
    """Maximal paths x, r_1..r_m, y with every r_i of degree 2 (m >= 1),
    including both end vertices.  Deterministic order by smallest run vertex."""
    deg = [T.degree(v) for v in range(T.n)]
    seen = set()
    runs = []
    for s in range(T.n):
        if deg[s] != 2 or s in seen:
            continue
        run = deque([s])
        seen.add(s)
        for direction in (0, 1):
            prev, cur = s, T.neighbors(s)[direction]
            while deg[cur] == 2 and cur not in seen:
                seen.add(cur)
                (run.append if direction == 0 else run.appendleft)(cur)
                prev, cur = cur, next(u for u in T.neighbors(cur) if u != prev)
            if deg[cur] != 2:
                (run.append if direction == 0 else run.appendleft)(cur)
        runs.append(list(run))
    return runs


def leaves_or_bare_paths(T: RootedTree, ell: int) -> BareResult:
    """At least |T|/(4ℓ) leaves, or that many disjoint bare paths of length ℓ."""
    if ell <= 2:
        raise PreconditionError("ell > 2", ell, 2)
    need = Fraction(T.n, 4 * ell)
    leaves = T.leaves()
    if len(leaves) >= need:
        result = BareResult("leaves", leaves=leaves)
    else:
        used = set()
        paths = []
        for run in _degree2_runs(T):
            inner = run[1:-1]
            m = len(inner)
            # run = x + inner + y where only x, y may be shared with other runs
            width = ell + 1
            plain = m // width
            extra = [run[0]] if run[0] not in used else []
            tail_free = run[-1] not in used
            if (m + len(extra) + tail_free) // width > plain:
                seq = extra + inner + ([run[-1]] if tail_free else [])
            else:
                seq = inner
            for i in range(0, len(seq) - width + 1, width):
                window = seq[i : i + width]
                paths.append(window)
                used.update(window)
        result = BareResult("paths", paths=paths)
    verify_bare(T, result, ell)
    return result


# -- independent verifiers ---------------------------------------------------

def _components_uf(T: RootedTree, removed) -> list[frozenset]:
    """Components of T - removed via union-find over the edge list."""
    removed = set(removed)
    root = list(range(T.n))

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    for p, v in T.edges():
        if p not in removed and v not in removed:
            root[find(p)] = find(v)
    groups = {}
    for v in range(T.n):
        if v not in removed:
            groups.setdefault(find(v), set()).add(v)
    return [frozenset(g) for g in groups.values()]


def _same_components(a, b) -> bool:
    return sorted(map(sorted, a)) == sorted(map(sorted, b))


def verify_cut_subtree(T: RootedTree, cert: CutCertificate, gamma) -> None:
    gamma = frac(gamma)
    sub = cert.subtree
    if cert.anchor not in sub:
        raise ContractViolation("anchor outside the subtree")
    if len(_components_uf(T, set(range(T.n)) - sub)) != 1:
        raise ContractViolation("T* is not connected")
    if not gamma * T.k / 2 <= len(sub) <= gamma * T.k:
        raise ContractViolation(f"|T*| = {len(sub)} outside [{gamma * T.k / 2}, {gamma * T.k}]")
    comps = _components_uf(T, sub)
    if not _same_components(comps, cert.components):
        raise ContractViolation("listed components differ from T - T*")
    for comp in comps:
        if not any(cert.anchor in T.neighbors(v) for v in comp):
            raise ContractViolation("a component of T - T* is not adjacent to the anchor")


def verify_cut_set(T: RootedTree, cert: CutCertificate, beta, even: bool = False) -> None:
    beta = frac(beta)
    S = cert.cut_set
    if T.root not in S:
        raise ContractViolation("root missing from the cut set")
    comps = _components_uf(T, S)
    if not _same_components(comps, cert.components):
        raise ContractViolation("listed components differ from T - S")
    for comp in comps:
        if len(comp) > beta * T.k:
            raise ContractViolation(f"component of size {len(comp)} exceeds beta*k = {beta * T.k}")
    if even:
        dist = {T.root: 0}
        queue = deque([T.root])
        while queue:
            v = queue.popleft()
            for u in T.neighbors(v):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        if any(dist[s] % 2 for s in S):
            raise ContractViolation("cut-set vertex at odd distance from the root")
        if not len(S) < beta * T.k:
            raise ContractViolation(f"|S| = {len(S)} not below beta*k = {beta * T.k}")
    elif not len(S) <= 1 / beta + 2:
        raise ContractViolation(f"|S| = {len(S)} exceeds 1/beta + 2")


def verify_bare(T: RootedTree, result: BareResult, ell: int) -> None:
    need = Fraction(T.n, 4 * ell)
    if result.count < need:
        raise ContractViolation(f"only {result.count} {result.kind}, need {need}")
    if result.kind == "leaves":
        if any(T.degree(v) > 1 for v in result.leaves) or len(set(result.leaves)) != len(result.leaves):
            raise ContractViolation("reported leaf is not a leaf")
        return
    seen = set()
    for path in result.paths:
        if len(path) != ell + 1:
            raise ContractViolation("bare path of wrong length")
        for a, b in zip(path, path[1:]):
            if b not in T.neighbors(a):
                raise ContractViolation("bare path uses a non-edge")
        if any(T.degree(v) != 2 for v in path[1:-1]):
            raise ContractViolation("bare path has an internal vertex of degree != 2")
        if seen.intersection(path):
            raise ContractViolation("bare paths are not vertex disjoint")
        seen.update(path)
