"""Border-router interconnection graph built from the AS graph and an embedding."""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterator, Mapping

import numpy as np

from geoas import _kernels
from geoas.asgraph import AsGraph
from geoas.embedding import Embedding
from geoas.errors import ConsistencyError, FormatError


@dataclass(frozen=True)
class _Crossing:
    """Inter-AS edges for one direction of a peering, sorted by (exit, entry)."""

    exits: np.ndarray
    entries: np.ndarray
    lengths: np.ndarray
    uniq_exits: np.ndarray   # ascending
    group_starts: np.ndarray  # len(uniq_exits)+1 offsets into the sorted arrays
    fallback: bool


def _make_crossing(exits, entries, lengths, fallback):
    order = np.lexsort((entries, exits))
    exits = exits[order]
    entries = entries[order]
    lengths = lengths[order]
    uniq, starts = np.unique(exits, return_index=True)
    group_starts = np.append(starts, exits.size).astype(np.int64)
    return _Crossing(exits, entries, lengths, uniq, group_starts, fallback)


class BorderGraph:
    """Graph over embedding locations.

    Locations of one AS form a complete subgraph; those edges are implied
    by ownership and never stored. Inter-AS edges are stored explicitly
    and indexed per ordered AS pair for routing.
    """

    def __init__(self, e: Embedding, l_max: float | None):
        self.embedding = e
        self.l_max = l_max
        self._cross: dict[tuple[int, int], _Crossing] = {}
        self._pairs: list[tuple[int, int]] = []  # AS pairs, build order

    def _add_peering(self, v1: int, v2: int, locs1, locs2, lengths,
                     fallback: bool) -> None:
        locs1 = np.asarray(locs1, dtype=np.int64)
        locs2 = np.asarray(locs2, dtype=np.int64)
        lengths = np.asarray(lengths, dtype=np.float64)
        self._cross[(v1, v2)] = _make_crossing(locs1, locs2, lengths, fallback)
        self._cross[(v2, v1)] = _make_crossing(locs2, locs1, lengths, fallback)
        self._pairs.append((v1, v2) if v1 < v2 else (v2, v1))

    def crossing(self, v_from: int, v_to: int) -> _Crossing:
        try:
            return self._cross[(v_from, v_to)]
        except KeyError:
            raise ConsistencyError(
                f"no border edges between AS {v_from} and AS {v_to}") from None

    def has_peering(self, v1: int, v2: int) -> bool:
        return (v1, v2) in self._cross

    def peered_pairs(self) -> list[tuple[int, int]]:
        return sorted(self._pairs)

    @property
    def inter_edge_count(self) -> int:
        return sum(self._cross[p].exits.size for p in self._pairs)

    @property
    def fallback_edge_count(self) -> int:
        return sum(1 for p in self._pairs if self._cross[p].fallback)

    def intra_edge_count(self) -> int:
        e = self.embedding
        return sum(n * (n - 1) // 2
                   for n in (e.location_ids(v).size for v in range(e.as_count)))

    def intra_edges(self) -> Iterator[tuple[int, int, float]]:
        """All implied same-AS edges as (loc1, loc2, km), loc1 < loc2.

        Complete per AS, so this is quadratic in per-AS location counts.
        """
        e = self.embedding
        for v in range(e.as_count):
            ids = np.sort(e.location_ids(v))
            # scalar kernel: keeps the dumped lengths bitwise identical
            # across backends and equal to great_circle_distance
            for i in range(ids.size):
                lat_i = float(e.lats[ids[i]])
                lon_i = float(e.lons[ids[i]])
                for j in range(i + 1, ids.size):
                    km = _kernels.haversine_km(
                        lat_i, lon_i,
                        float(e.lats[ids[j]]), float(e.lons[ids[j]]))
                    yield int(ids[i]), int(ids[j]), km

    def inter_edges(self) -> Iterator[tuple[int, int, bool, float]]:
        """Stored cross-AS edges as (loc1, loc2, fallback, km), loc1 < loc2."""
        rows = []
        for pair in self._pairs:
            c = self._cross[pair]
            for a, b, km in zip(c.exits, c.entries, c.lengths):
                lo, hi = (int(a), int(b)) if a < b else (int(b), int(a))
                rows.append((lo, hi, c.fallback, float(km)))
        rows.sort(key=lambda r: (r[0], r[1]))
        return iter(rows)


def build_border_graph(g: AsGraph, e: Embedding, l_max: float) -> BorderGraph:
    """Wire border routers: every location pair of peered ASes closer than
    l_max becomes an edge; a peering with no such pair gets one edge
    between its closest location pair, flagged as a fallback so every AS
    edge is represented.
    """
    if e.as_count != g.node_count:
        raise ConsistencyError(
            f"embedding covers {e.as_count} ASes, graph has {g.node_count}")
    if not l_max > 0:
        raise ConsistencyError(f"l_max must be positive, got {l_max}")
    h = BorderGraph(e, l_max)
    for u, v in g.edges():
        ids_u = e.location_ids(u)
        ids_v = e.location_ids(v)
        la, lb, km = _kernels.links_under(e.lats, e.lons, ids_u, ids_v, l_max)
        if len(la):
            h._add_peering(u, v, la, lb, km, fallback=False)
        else:
            a, b, d = _kernels.closest_pair(e.lats, e.lons, ids_u, ids_v)
            h._add_peering(u, v, [a], [b], [d], fallback=True)
    return h


def save_border_graph(h: BorderGraph, stream: IO[str],
                      header: Mapping[str, object] | None = None) -> None:
    if header:
        for key, value in header.items():
            stream.write(f"# {key} {value}\n")
    for l1, l2, km in h.intra_edges():
        stream.write(f"hedge {l1} {l2} intra {km!r}\n")
    for l1, l2, fallback, km in h.inter_edges():
        kind = "fallback" if fallback else "inter"
        stream.write(f"hedge {l1} {l2} {kind} {km!r}\n")


def load_border_graph(stream: IO[str], e: Embedding,
                      path: str | None = None) -> BorderGraph:
    """Rebuild a border graph from `hedge` lines against its embedding.

    Intra lines are checked for ownership and then dropped (they are
    implied). Inter and fallback lines are grouped per AS pair; a pair
    mixing fallback with regular edges is rejected.
    """
    groups: dict[tuple[int, int], list[tuple[int, int, float, bool]]] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] != "hedge" or len(parts) != 5:
            raise FormatError("expected 'hedge <loc1> <loc2> <kind> <km>'",
                              path=path, line=lineno)
        try:
            l1, l2 = int(parts[1]), int(parts[2])
            km = float(parts[4])
        except ValueError:
            raise FormatError(f"bad numbers in {line!r}", path=path,
                              line=lineno) from None
        kind = parts[3]
        if kind not in ("intra", "inter", "fallback"):
            raise FormatError(f"unknown edge kind {kind!r}", path=path,
                              line=lineno)
        if not (0 <= l1 < e.total_locations and 0 <= l2 < e.total_locations):
            raise FormatError(f"location id out of range in {line!r}",
                              path=path, line=lineno)
        if l1 == l2:
            raise FormatError("self-loop border edge", path=path, line=lineno)
        v1, v2 = e.owner(l1), e.owner(l2)
        if kind == "intra":
            if v1 != v2:
                raise FormatError(
                    f"intra edge {l1}-{l2} spans AS {v1} and AS {v2}",
                    path=path, line=lineno)
            continue
        if v1 == v2:
            raise FormatError(
                f"{kind} edge {l1}-{l2} stays inside AS {v1}",
                path=path, line=lineno)
        key = (v1, v2) if v1 < v2 else (v2, v1)
        a, b = (l1, l2) if v1 == key[0] else (l2, l1)
        groups.setdefault(key, []).append((a, b, km, kind == "fallback"))
    h = BorderGraph(e, None)
    for (v1, v2), rows in groups.items():
        flags = {fb for _, _, _, fb in rows}
        if len(flags) > 1:
            raise FormatError(
                f"AS pair ({v1}, {v2}) mixes fallback and regular edges",
                path=path)
        h._add_peering(v1, v2,
                       [r[0] for r in rows], [r[1] for r in rows],
                       [r[2] for r in rows], fallback=flags.pop())
    return h
