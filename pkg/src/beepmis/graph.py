"""Undirected simple graphs on dense node ids ``0..n-1``."""

from __future__ import annotations

import random
from collections import deque
from functools import cached_property
from typing import Iterable

import numpy as np


class GraphError(ValueError):
    pass


class EdgeListError(GraphError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class Graph:
    """Immutable undirected graph with sorted, duplicate-free adjacency lists."""

    __slots__ = ("n", "adj", "__dict__")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise GraphError("node count must be nonnegative")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.n = n
        self.adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in nbrs)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def neighborhood(self, v: int, h: int) -> set[int]:
        return neighborhood(self, v, h)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) arrays; indptr is int64, indices int32."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adj])
        indices = np.fromiter((u for a in self.adj for u in a), dtype=np.int32,
                              count=int(indptr[-1]))
        return indptr, indices

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.n, self.adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={len(self.edges())})"


def max_degree(g: Graph) -> int:
    return g.max_degree()


def neighborhood(g: Graph, v: int, h: int) -> set[int]:
    """All nodes within hop distance ``h`` of ``v``, including ``v``."""
    if not 0 <= v < g.n:
        raise GraphError(f"invalid node id {v} for n={g.n}")
    if h < 0:
        raise GraphError("hop radius must be nonnegative")
    seen = {v}
    frontier = [v]
    for _ in range(h):
        nxt = []
        for x in frontier:
            for y in g.adj[x]:
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if not nxt:
            break
        frontier = nxt
    return seen


def eccentricity(g: Graph, v: int) -> int:
    """Largest hop distance from ``v`` to a reachable node."""
    dist = {v: 0}
    q = deque([v])
    while q:
        x = q.popleft()
        for y in g.adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return max(dist.values())


def is_connected(g: Graph) -> bool:
    return g.n == 0 or len(neighborhood(g, 0, g.n)) == g.n


def diameter(g: Graph) -> int:
    if not is_connected(g):
        raise GraphError("diameter of a disconnected graph is undefined")
    return max((eccentricity(g, v) for v in range(g.n)), default=0)


# -- generators ---------------------------------------------------------------

def gen_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"edge probability {p} outside [0, 1]")
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph(n, edges)


def gen_swat_line(delta: int) -> Graph:
    """``delta`` equidistant nodes on a line with transmission range ``delta/2``."""
    if delta < 2 or delta % 2:
        raise GraphError(f"delta must be even and >= 2, got {delta}")
    reach = delta // 2
    return Graph(delta, [(i, j) for i in range(delta)
                         for j in range(i + 1, min(delta, i + reach + 1))])


def gen_random_regular(n: int, degree: int, seed: int) -> Graph:
    import networkx as nx

    if degree >= n or (n * degree) % 2:
        raise GraphError(f"no {degree}-regular graph on {n} nodes")
    nxg = nx.random_regular_graph(degree, n, seed=seed)
    return Graph(n, nxg.edges())


def gen_grid(rows: int, cols: int) -> Graph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, edges)


def gen_path(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 nodes")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def gen_star(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def gen_complete(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def gen_empty(n: int) -> Graph:
    return Graph(n)


GENERATORS = {
    "erdos_renyi": gen_erdos_renyi,
    "swat_line": gen_swat_line,
    "random_regular": gen_random_regular,
    "grid": gen_grid,
    "path": gen_path,
    "cycle": gen_cycle,
    "star": gen_star,
    "complete": gen_complete,
    "empty": gen_empty,
}


def generate(name: str, **kwargs) -> Graph:
    try:
        fn = GENERATORS[name]
    except KeyError:
        raise GraphError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") from None
    return fn(**kwargs)


# -- edge-list format -----------------------------------------------------------
#
#   n <count>
#   <u> <v>
#   ...
#
# Blank lines and lines starting with '#' are ignored.

def save_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def load_edge_list(text: str) -> Graph:
    n = None
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise EdgeListError(lineno, "expected header 'n <count>'")
            try:
                n = int(parts[1])
            except ValueError:
                raise EdgeListError(lineno, f"bad node count {parts[1]!r}") from None
            if n < 0:
                raise EdgeListError(lineno, "node count must be nonnegative")
            continue
        if len(parts) != 2:
            raise EdgeListError(lineno, f"expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(lineno, f"non-integer node id in {line!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise EdgeListError(lineno, f"node id out of range [0, {n})")
        if u == v:
            raise EdgeListError(lineno, f"self-loop at node {u}")
        edges.add((min(u, v), max(u, v)))
    if n is None:
        raise EdgeListError(1, "missing header 'n <count>'")
    return Graph(n, sorted(edges))
