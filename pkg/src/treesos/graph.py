"""Simple undirected graphs on vertices ``0..n-1`` with bitset adjacency.

Neighbourhoods are Python ints used as bitsets, so edge queries are O(1) and
neighbourhood intersections are single ``&`` operations.  Graphs are treated
as immutable; every transformation returns a new object.  A subgraph carries
``labels``, the ids its vertices had in the graph it was cut from, so that an
embedding found in the subgraph can be pulled back to the host.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import GraphInvariantError, PreconditionError
from .exact import frac


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def bits(mask: int) -> Iterator[int]:
    """Yield the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return mask.bit_count()


class Graph:
    __slots__ = ("n", "adj", "edge_count", "labels", "_degrees")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (), labels: Sequence[int] | None = None):
        adj = [0] * n
        for u, v in edges:
            if u == v:
                raise GraphInvariantError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphInvariantError(f"edge {u}-{v} outside 0..{n - 1}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        self._set(n, adj, labels)

    def _set(self, n, adj, labels, edge_count=None):
        self.n = n
        self.adj = tuple(adj)
        self._degrees = tuple(a.bit_count() for a in self.adj)
        self.edge_count = sum(self._degrees) // 2 if edge_count is None else edge_count
        self.labels = tuple(range(n)) if labels is None else tuple(labels)

    @classmethod
    def from_adjacency(cls, adj: Sequence[int], labels=None, edge_count=None, validate=True) -> "Graph":
        g = cls.__new__(cls)
        g._set(len(adj), adj, labels, edge_count)
        if validate:
            g.validate()
        return g

    # -- invariants -------------------------------------------------------
    def validate(self) -> None:
        """Raise GraphInvariantError unless adjacency is symmetric, loop-free
        and the cached edge count equals half the degree sum."""
        full = (1 << self.n) - 1
        for v, a in enumerate(self.adj):
            if a & ~full:
                raise GraphInvariantError(f"vertex {v} adjacent to a vertex outside the graph")
            if a >> v & 1:
                raise GraphInvariantError(f"loop at vertex {v}")
            for u in bits(a):
                if not self.adj[u] >> v & 1:
                    raise GraphInvariantError(f"asymmetric adjacency between {v} and {u}")
        if 2 * self.edge_count != sum(self._degrees):
            raise GraphInvariantError(
                f"cached edge count {self.edge_count} != half degree sum {sum(self._degrees) // 2}"
            )
        if len(self.labels) != self.n:
            raise GraphInvariantError("label map has wrong length")

    # -- basic queries ----------------------------------------------------
    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Graph(n={self.n}, e={self.edge_count})"

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, self.adj))

    @property
    def vertex_mask(self) -> int:
        return (1 << self.n) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def neighbors(self, v: int) -> list[int]:
        return list(bits(self.adj[v]))

    def degree(self, v: int) -> int:
        return self._degrees[v]

    @property
    def degrees(self) -> tuple[int, ...]:
        return self._degrees

    def min_degree(self) -> int:
        return min(self._degrees, default=0)

    def max_degree(self) -> int:
        return max(self._degrees, default=0)

    def average_degree(self) -> Fraction:
        if self.n == 0:
            return Fraction(0)
        return Fraction(2 * self.edge_count, self.n)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, a in enumerate(self.adj):
            for v in bits(a >> (u + 1)):
                yield u, u + 1 + v

    def deg_into(self, v: int, mask: int) -> int:
        return (self.adj[v] & mask).bit_count()

    def e_between(self, X, Y) -> int:
        """e(X, Y): edges with one end in X and one in Y; edges inside X∩Y count twice."""
        xm = X if isinstance(X, int) else mask_of(X)
        ym = Y if isinstance(Y, int) else mask_of(Y)
        return sum((self.adj[x] & ym).bit_count() for x in bits(xm))

    def e_inside(self, X) -> int:
        """Number of edges with both ends in X."""
        xm = X if isinstance(X, int) else mask_of(X)
        return self.e_between(xm, xm) // 2

    # -- derived graphs ---------------------------------------------------
    def induced(self, vertices: Iterable[int]) -> "Graph":
        """Subgraph induced on ``vertices`` (relabelled 0.. in the given order)."""
        vs = list(vertices)
        index = {v: i for i, v in enumerate(vs)}
        if len(index) != len(vs):
            raise ValueError("repeated vertex in induced()")
        sel = mask_of(vs)
        adj = []
        for v in vs:
            a = 0
            for u in bits(self.adj[v] & sel):
                a |= 1 << index[u]
            adj.append(a)
        return Graph.from_adjacency(adj, labels=[self.labels[v] for v in vs], validate=False)

    def without_edges(self, pairs: Iterable[tuple[int, int]]) -> "Graph":
        adj = list(self.adj)
        for u, v in pairs:
            adj[u] &= ~(1 << v)
            adj[v] &= ~(1 << u)
        return Graph.from_adjacency(adj, labels=self.labels, validate=False)

    def keep_edges_where(self, keep) -> "Graph":
        """Copy retaining exactly the edges uv (u < v) with ``keep(u, v)`` true."""
        adj = [0] * self.n
        for u, v in self.edges():
            if keep(u, v):
                adj[u] |= 1 << v
                adj[v] |= 1 << u
        return Graph.from_adjacency(adj, labels=self.labels, validate=False)

    def complement(self) -> "Graph":
        full = self.vertex_mask
        return Graph.from_adjacency(
            [full & ~a & ~(1 << v) for v, a in enumerate(self.adj)], labels=self.labels, validate=False
        )

    def relabelled(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex v renamed perm[v]."""
        adj = [0] * self.n
        for u, v in self.edges():
            adj[perm[u]] |= 1 << perm[v]
            adj[perm[v]] |= 1 << perm[u]
        return Graph.from_adjacency(adj, validate=False)

    def components(self) -> list[list[int]]:
        seen = 0
        comps = []
        for s in range(self.n):
            if seen >> s & 1:
                continue
            comp = 1 << s
            frontier = comp
            while frontier:
                nxt = 0
                for v in bits(frontier):
                    nxt |= self.adj[v]
                frontier = nxt & ~comp
                comp |= frontier
            seen |= comp
            comps.append(list(bits(comp)))
        return comps

    def two_colouring(self):
        """Proper 2-colouring as a list of 0/1, or None when the graph has an odd cycle."""
        colour = [-1] * self.n
        for s in range(self.n):
            if colour[s] >= 0:
                continue
            colour[s] = 0
            stack = [s]
            while stack:
                v = stack.pop()
                for u in bits(self.adj[v]):
                    if colour[u] < 0:
                        colour[u] = 1 - colour[v]
                        stack.append(u)
                    elif colour[u] == colour[v]:
                        return None
        return colour


@dataclass(frozen=True)
class Bipartition:
    A: frozenset
    B: frozenset

    def __init__(self, A, B):
        object.__setattr__(self, "A", frozenset(A))
        object.__setattr__(self, "B", frozenset(B))

    def check(self, G: Graph) -> None:
        if self.A & self.B:
            raise PreconditionError("bipartition sides intersect")
        if self.A | self.B != frozenset(range(G.n)):
            raise PreconditionError("bipartition does not cover V(G)")

    @property
    def masks(self) -> tuple[int, int]:
        return mask_of(self.A), mask_of(self.B)

    def swapped(self) -> "Bipartition":
        return Bipartition(self.B, self.A)


# -- predicates ------------------------------------------------------------

def average_degree_exceeds(G: Graph, k: int) -> bool:
    """True iff d(G) > k - 1, i.e. 2 e(G) > (k - 1) n, in integer arithmetic."""
    if k < 1:
        raise PreconditionError("k >= 1", k, 1)
    return 2 * G.edge_count > (k - 1) * G.n


def peel_min_degree(G: Graph, threshold) -> Graph:
    """Largest induced subgraph of minimum degree >= threshold (possibly empty).

    Vertices below the threshold are removed until none remain; the result
    (the threshold-core) does not depend on the removal order.
    """
    threshold = frac(threshold)
    alive = G.vertex_mask
    deg = list(G.degrees)
    queue = [v for v in range(G.n) if deg[v] < threshold]
    removed = 0
    for v in queue:
        removed |= 1 << v
    while queue:
        v = queue.pop()
        alive &= ~(1 << v)
        for u in bits(G.adj[v] & alive):
            deg[u] -= 1
            if deg[u] < threshold and not removed >> u & 1:
                removed |= 1 << u
                queue.append(u)
    return G.induced(bits(alive))


def is_beta_bipartite(G: Graph, P: Bipartition, beta) -> bool:
    """True iff e(A) + e(B) <= beta * e(G)."""
    P.check(G)
    a, b = P.masks
    return G.e_inside(a) + G.e_inside(b) <= frac(beta) * G.edge_count


def intra_edges(G: Graph, P: Bipartition) -> int:
    a, b = P.masks
    return G.e_inside(a) + G.e_inside(b)


def best_bipartition(G: Graph, exact_limit: int = 16) -> Bipartition:
    """A bipartition with few intra-class edges.

    Exact (over all 2^(n-1) splits) for ``n <= exact_limit``, otherwise a
    deterministic local search starting from a BFS 2-colouring.
    """
    n = G.n
    if n == 0:
        return Bipartition((), ())
    if n <= exact_limit:
        best, best_mask = None, 0
        full = G.vertex_mask
        for m in range(1 << (n - 1)):
            cost = G.e_inside(m) + G.e_inside(full & ~m)
            if best is None or cost < best:
                best, best_mask = cost, m
        return Bipartition(bits(best_mask), bits(G.vertex_mask & ~best_mask))
    side = [0] * n
    seen = [False] * n
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        order = [s]
        for v in order:
            for u in bits(G.adj[v]):
                if not seen[u]:
                    seen[u] = True
                    side[u] = 1 - side[v]
                    order.append(u)
    improved = True
    while improved:
        improved = False
        masks = [mask_of(v for v in range(n) if side[v] == s) for s in (0, 1)]
        for v in range(n):
            same = G.deg_into(v, masks[side[v]])
            other = G.deg_into(v, masks[1 - side[v]])
            if same > other:
                masks[side[v]] &= ~(1 << v)
                side[v] = 1 - side[v]
                masks[side[v]] |= 1 << v
                improved = True
    return Bipartition([v for v in range(n) if side[v] == 0], [v for v in range(n) if side[v] == 1])


# -- generators ------------------------------------------------------------

def complete_graph(n: int) -> Graph:
    full = (1 << n) - 1
    return Graph.from_adjacency([full & ~(1 << v) for v in range(n)], validate=False)


def complete_bipartite(a: int, b: int) -> Graph:
    left = (1 << a) - 1
    right = ((1 << b) - 1) << a
    return Graph.from_adjacency([right] * a + [left] * b, validate=False)


def empty_graph(n: int) -> Graph:
    return Graph(n)


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def disjoint_union(graphs: Iterable[Graph]) -> Graph:
    adj = []
    offset = 0
    for g in graphs:
        adj.extend(a << offset for a in g.adj)
        offset += g.n
    return Graph.from_adjacency(adj, validate=False)


EXTREMAL_KINDS = ("clique", "balanced-bipartite", "disjoint-union-list")


def generate_extremal(kind: str, k: int, parts: Sequence | None = None) -> Graph:
    """Extremal graphs for the Erdős–Sós bound: K_k, K_{k-1,k-1}, or unions.

    For ``disjoint-union-list`` each entry of ``parts`` is either a Graph or a
    ``(kind, k)`` pair naming another extremal piece.
    """
    if k < 2:
        raise PreconditionError("k >= 2", k, 2)
    if kind == "clique":
        return complete_graph(k)
    if kind == "balanced-bipartite":
        return complete_bipartite(k - 1, k - 1)
    if kind == "disjoint-union-list":
        pieces = []
        for p in parts or ():
            if isinstance(p, Graph):
                pieces.append(p)
            else:
                pk, pkk = p
                pieces.append(generate_extremal(pk, pkk))
        return disjoint_union(pieces)
    raise ValueError(f"unknown extremal kind {kind!r}; expected one of {EXTREMAL_KINDS}")
