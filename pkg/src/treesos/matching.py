"""Maximum matchings: augmenting paths for bipartite graphs, blossoms in general."""

from __future__ import annotations

from collections import deque
from typing import Sequence


def bipartite_matching(left: int, nbrs: Sequence[Sequence[int]], right: int) -> list[int]:
    """Hopcroft–Karp.  ``nbrs[u]`` lists right vertices adjacent to left ``u``.

    Returns ``match_left`` with ``match_left[u]`` the partner of u or -1.
    """
    INF = float("inf")
    match_l = [-1] * left
    match_r = [-1] * right
    dist = [0] * left

    def bfs():
        q = deque()
        found = False
        for u in range(left):
            if match_l[u] < 0:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        while q:
            u = q.popleft()
            for w in nbrs[u]:
                m = match_r[w]
                if m < 0:
                    found = True
                elif dist[m] == INF:
                    dist[m] = dist[u] + 1
                    q.append(m)
        return found

    def dfs(u):
        # iterative version of the layered augmenting-path search
        stack = [(u, iter(nbrs[u]))]
        path = []
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                m = match_r[w]
                if m < 0:
                    path.append((v, w))
                    for a, b in path:
                        match_l[a] = b
                        match_r[b] = a
                    return True
                if dist[m] == dist[v] + 1:
                    path.append((v, w))
                    stack.append((m, iter(nbrs[m])))
                    advanced = True
                    break
            if not advanced:
                dist[v] = INF
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in range(left):
            if match_l[u] < 0:
                dfs(u)
    return match_l


def max_matching(n: int, nbrs: Sequence[Sequence[int]]) -> list[int]:
    """Edmonds' blossom algorithm on an undirected graph.

    Returns ``mate`` with ``mate[v]`` the partner of v or -1.
    """
    mate = [-1] * n

    def find_path(root):
        used = [False] * n
        parent = [-1] * n
        base = list(range(n))
        used[root] = True
        q = deque([root])

        def lca(a, b):
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if mate[a] < 0:
                    break
                a = parent[mate[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[mate[b]]

        def mark(v, b, child, blossom):
            while base[v] != b:
                blossom[base[v]] = blossom[base[mate[v]]] = True
                parent[v] = child
                child = mate[v]
                v = parent[mate[v]]

        while q:
            v = q.popleft()
            for u in nbrs[v]:
                if base[v] == base[u] or mate[v] == u:
                    continue
                if u == root or (mate[u] >= 0 and parent[mate[u]] >= 0):
                    cur = lca(v, u)
                    blossom = [False] * n
                    mark(v, cur, u, blossom)
                    mark(u, cur, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                q.append(i)
                elif parent[u] < 0:
                    parent[u] = v
                    if mate[u] < 0:
                        return u, parent
                    used[mate[u]] = True
                    q.append(mate[u])
        return -1, parent

    # greedy start
    for v in range(n):
        if mate[v] < 0:
            for u in nbrs[v]:
                if mate[u] < 0 and u != v:
                    mate[u], mate[v] = v, u
                    break
    for v in range(n):
        if mate[v] >= 0:
            continue
        end, parent = find_path(v)
        while end >= 0:
            pv = parent[end]
            nxt = mate[pv]
            mate[end], mate[pv] = pv, end
            end = nxt
    return mate


def matching_pairs(mate: Sequence[int]) -> list[tuple[int, int]]:
    return [(v, u) for v, u in enumerate(mate) if u > v]


def graph_max_matching(G) -> list[tuple[int, int]]:
    """Maximum matching of a :class:`~treesos.graph.Graph` as sorted pairs."""
    return matching_pairs(max_matching(G.n, [G.neighbors(v) for v in range(G.n)]))
