"""The AS peering graph: preferential-attachment generation, IO, shortest paths."""

from __future__ import annotations

import logging
from collections import deque
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from geoas.errors import FormatError, NoPathError, ParameterError

log = logging.getLogger(__name__)

# give up on a duplicate-producing preferential draw after this many tries
_MAX_REDRAWS = 64


class AsGraph:
    """Simple undirected graph over AS ids 0..node_count-1.

    Immutable once built; adjacency lists are kept sorted so traversal
    order (and therefore path tie-breaking) is deterministic.
    """

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]]):
        if node_count < 1:
            raise ParameterError("graph needs at least one node")
        self.node_count = int(node_count)
        edge_set: set[tuple[int, int]] = set()
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ParameterError(f"self-loop at node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ParameterError(f"edge ({u}, {v}) out of range")
            key = (u, v) if u < v else (v, u)
            if key in edge_set:
                raise ParameterError(f"duplicate edge {key}")
            edge_set.add(key)
            adj[u].append(v)
            adj[v].append(u)
        for nbrs in adj:
            nbrs.sort()
        self._edges = edge_set
        self._adj = adj

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def edges(self) -> list[tuple[int, int]]:
        return sorted(self._edges)

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edges

    def neighbors(self, v: int) -> Sequence[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self._adj], dtype=np.int64)

    def max_degree(self) -> int:
        return max(len(a) for a in self._adj)

    def is_connected(self) -> bool:
        if self.node_count == 1:
            return True
        seen = np.zeros(self.node_count, dtype=bool)
        seen[0] = True
        stack = [0]
        count = 1
        while stack:
            u = stack.pop()
            for w in self._adj[u]:
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    stack.append(w)
        return count == self.node_count

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AsGraph):
            return NotImplemented
        return (self.node_count == other.node_count
                and self._edges == other._edges)

    def __hash__(self) -> int:
        return hash((self.node_count, frozenset(self._edges)))

    def __repr__(self) -> str:
        return f"AsGraph(nodes={self.node_count}, edges={self.edge_count})"


def _preference_weights(degrees: np.ndarray, delta: float) -> np.ndarray:
    # attachment probability ~ k^(1 + delta*log10 k); degree-0 nodes never chosen
    k = degrees.astype(np.float64)
    w = np.zeros_like(k)
    pos = k > 0
    kp = k[pos]
    w[pos] = kp ** (1.0 + delta * np.log10(kp))
    return w


class _PrefSampler:
    """Draws node ids proportionally to the nonlinear preference weight.

    The cumulative table is rebuilt lazily after degree changes; within one
    generation step every added link immediately shifts the preferences.
    """

    def __init__(self, degrees: np.ndarray, delta: float):
        self.degrees = degrees
        self.delta = delta
        self._cum: np.ndarray | None = None

    def bump(self, node: int) -> None:
        self.degrees[node] += 1
        self._cum = None

    def draw(self, rng: np.random.Generator) -> int:
        if self._cum is None:
            self._cum = np.cumsum(_preference_weights(self.degrees, self.delta))
        x = rng.random() * self._cum[-1]
        idx = int(np.searchsorted(self._cum, x, side="right"))
        return min(idx, len(self._cum) - 1)

    def draw_not(self, rng: np.random.Generator, excluded: set[int]) -> int | None:
        for _ in range(_MAX_REDRAWS):
            cand = self.draw(rng)
            if cand not in excluded:
                return cand
        return None


def generate_pfp(node_count: int, p: float, q: float, delta: float = 0.048,
                 seed: int = 0, seed_size: int = 3) -> AsGraph:
    """Grow an AS graph by positive-feedback preferential attachment.

    Starts from a connected seed graph (a triangle for the default
    seed_size=3, a random recursive tree otherwise). Each growth step adds
    one node and, depending on a three-way coin, wires it to one or two
    existing hosts and adds one or two fresh host-to-peer links. Host and
    peer choices favour high-degree nodes superlinearly.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0 and p + q <= 1.0):
        raise ParameterError(f"need 0 <= p, q and p+q <= 1, got p={p} q={q}")
    if seed_size < 3:
        raise ParameterError("seed graph needs at least 3 nodes")
    if node_count < seed_size:
        raise ParameterError(
            f"node_count {node_count} smaller than seed graph ({seed_size})")

    rng = np.random.default_rng(seed)
    edges: set[tuple[int, int]] = set()
    degrees = np.zeros(node_count, dtype=np.int64)

    def add_edge(u: int, v: int) -> bool:
        key = (u, v) if u < v else (v, u)
        if u == v or key in edges:
            return False
        edges.add(key)
        sampler.bump(u)
        sampler.bump(v)
        return True

    sampler = _PrefSampler(degrees, delta)
    if seed_size == 3:
        for u, v in ((0, 1), (0, 2), (1, 2)):
            add_edge(u, v)
    else:
        for v in range(1, seed_size):
            add_edge(int(rng.integers(0, v)), v)

    def add_internal_link(host: int) -> None:
        # a fresh host-to-peer link; redraw on duplicates, give up quietly
        for _ in range(_MAX_REDRAWS):
            peer = sampler.draw(rng)
            if peer != host and add_edge(host, peer):
                return

    for new in range(seed_size, node_count):
        r = rng.random()
        if r < p:
            host = sampler.draw(rng)
            add_edge(new, host)
            add_internal_link(host)
        elif r < p + q:
            host = sampler.draw(rng)
            add_edge(new, host)
            add_internal_link(host)
            add_internal_link(host)
        else:
            host1 = sampler.draw(rng)
            add_edge(new, host1)
            host2 = sampler.draw_not(rng, {host1})
            if host2 is not None:
                add_edge(new, host2)
            add_internal_link(host1)

    return AsGraph(node_count, edges)


def save_graph(g: AsGraph, stream: IO[str],
               header: Mapping[str, object] | None = None) -> None:
    if header:
        for key, value in header.items():
            stream.write(f"# {key} {value}\n")
    stream.write(f"nodes {g.node_count}\n")
    for u, v in g.edges():
        stream.write(f"edge {u} {v}\n")


def load_graph(stream: IO[str], path: str | None = None) -> AsGraph:
    """Parse a graph file: `nodes <N>` then `edge <u> <v>` lines with u < v."""
    node_count = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "nodes":
            if node_count is not None:
                raise FormatError("duplicate 'nodes' line", path=path, line=lineno)
            try:
                node_count = int(parts[1])
            except (IndexError, ValueError):
                raise FormatError("bad 'nodes' line", path=path, line=lineno) from None
        elif parts[0] == "edge":
            if node_count is None:
                raise FormatError("'edge' before 'nodes'", path=path, line=lineno)
            try:
                u, v = int(parts[1]), int(parts[2])
            except (IndexError, ValueError):
                raise FormatError("bad 'edge' line", path=path, line=lineno) from None
            if u >= v:
                raise FormatError(f"edge ({u}, {v}) must satisfy u < v",
                                  path=path, line=lineno)
            if not (0 <= u and v < node_count):
                raise FormatError(f"edge ({u}, {v}) out of range",
                                  path=path, line=lineno)
            if (u, v) in seen:
                raise FormatError(f"duplicate edge ({u}, {v})",
                                  path=path, line=lineno)
            seen.add((u, v))
            edges.append((u, v))
        else:
            raise FormatError(f"unknown record {parts[0]!r}", path=path, line=lineno)
    if node_count is None:
        raise FormatError("missing 'nodes' line", path=path, line=1)
    g = AsGraph(node_count, edges)
    if not g.is_connected():
        log.warning("loaded graph is not connected; routing between "
                    "separate components will fail")
    return g


def bfs_parents(g: AsGraph, src: int) -> np.ndarray:
    """Parent array of the BFS tree rooted at src (-1 for src and unreachable).

    Neighbors expand in ascending id order, which fixes the tie-break for
    equal-length paths.
    """
    if not (0 <= src < g.node_count):
        raise ParameterError(f"node {src} out of range")
    parents = np.full(g.node_count, -1, dtype=np.int64)
    seen = np.zeros(g.node_count, dtype=bool)
    seen[src] = True
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if not seen[w]:
                seen[w] = True
                parents[w] = u
                queue.append(w)
    return parents


def path_from_parents(parents: np.ndarray, v1: int, v2: int) -> list[int]:
    """Rebuild the v1-to-v2 path from a bfs_parents(g, v1) array."""
    if v1 == v2:
        return [v1]
    if parents[v2] < 0:
        raise NoPathError(f"no path between AS {v1} and AS {v2}")
    path = [v2]
    node = v2
    while node != v1:
        node = int(parents[node])
        path.append(node)
    path.reverse()
    return path


def shortest_as_path(g: AsGraph, v1: int, v2: int) -> list[int]:
    """Minimal-hop path from v1 to v2, both inclusive."""
    if not (0 <= v2 < g.node_count):
        raise ParameterError(f"node {v2} out of range")
    return path_from_parents(bfs_parents(g, v1), v1, v2)
