"""Text encodings: graph6, ``n m`` edge lists, and parent-array trees."""

from __future__ import annotations

from typing import Iterable, Iterator

from .errors import FormatError
from .graph import Graph


# -- graph6 -----------------------------------------------------------------

def _encode_n(n: int) -> str:
    if n < 63:
        return chr(n + 63)
    if n < 258048:
        return "~" + "".join(chr(((n >> s) & 63) + 63) for s in (12, 6, 0))
    return "~~" + "".join(chr(((n >> s) & 63) + 63) for s in (30, 24, 18, 12, 6, 0))


def to_graph6(G: Graph) -> str:
    """graph6 string of G (no header, no trailing newline)."""
    n = G.n
    out = [_encode_n(n)]
    acc = 0
    nbits = 0
    # column-wise upper triangle: x(0,1), x(0,2), x(1,2), x(0,3), ...
    for j in range(1, n):
        aj = G.adj[j]
        for i in range(j):
            acc = (acc << 1) | (aj >> i & 1)
            nbits += 1
            if nbits == 6:
                out.append(chr(acc + 63))
                acc = nbits = 0
    if nbits:
        out.append(chr((acc << (6 - nbits)) + 63))
    return "".join(out)


def from_graph6(text: str) -> Graph:
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[10:]
    if not s:
        raise FormatError("empty graph6 string")
    vals = [ord(c) - 63 for c in s]
    if any(v < 0 or v > 63 for v in vals):
        raise FormatError(f"illegal graph6 character in {s!r}")
    if vals[0] < 63:
        n, pos = vals[0], 1
    elif len(vals) > 1 and vals[1] < 63:
        if len(vals) < 4:
            raise FormatError("truncated graph6 size field")
        n = (vals[1] << 12) | (vals[2] << 6) | vals[3]
        pos = 4
    else:
        if len(vals) < 8:
            raise FormatError("truncated graph6 size field")
        n = 0
        for v in vals[2:8]:
            n = (n << 6) | v
        pos = 8
    need = (n * (n - 1) // 2 + 5) // 6
    body = vals[pos:]
    if len(body) != need:
        raise FormatError(f"graph6 body has {len(body)} bytes, expected {need} for n={n}")
    adj = [0] * n
    k = 0
    for j in range(1, n):
        for i in range(j):
            if body[k // 6] >> (5 - k % 6) & 1:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
            k += 1
    tail = n * (n - 1) // 2
    if tail % 6 and body and body[-1] & ((1 << (6 - tail % 6)) - 1):
        raise FormatError("graph6 padding bits are not zero")
    return Graph.from_adjacency(adj, validate=False)


def read_graph6_lines(lines: Iterable[str]) -> Iterator[Graph]:
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            yield from_graph6(line)
        except FormatError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None


# -- edge list --------------------------------------------------------------

def to_edgelist(G: Graph) -> str:
    lines = [f"{G.n} {G.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in G.edges())
    return "\n".join(lines) + "\n"


def from_edgelist(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise FormatError("empty edge list")
    try:
        n, m = (int(x) for x in rows[0])
        edges = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise FormatError(f"malformed edge list: {exc}") from None
    if len(edges) != m:
        raise FormatError(f"header promises {m} edges, found {len(edges)}")
    if len(set(frozenset(e) for e in edges)) != m:
        raise FormatError("repeated edge in edge list")
    try:
        return Graph(n, edges)
    except Exception as exc:
        raise FormatError(str(exc)) from None


def read_graph(text: str, fmt: str = "auto") -> Graph:
    """Parse a graph in ``graph6``, ``edgelist`` or auto-detected format."""
    if fmt == "auto":
        first = text.strip().split("\n", 1)[0].strip()
        fmt = "edgelist" if " " in first or first.isdigit() else "graph6"
    if fmt == "graph6":
        return from_graph6(text)
    if fmt == "edgelist":
        return from_edgelist(text)
    raise FormatError(f"unknown graph format {fmt!r}")


def write_graph(G: Graph, fmt: str = "graph6") -> str:
    if fmt == "graph6":
        return to_graph6(G) + "\n"
    if fmt == "edgelist":
        return to_edgelist(G)
    raise FormatError(f"unknown graph format {fmt!r}")
