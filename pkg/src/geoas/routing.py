"""Device attachment, hot-potato and distance-first routing, modeled latency."""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from geoas import _kernels
from geoas.asgraph import AsGraph, bfs_parents, path_from_parents
from geoas.bordergraph import BorderGraph
from geoas.embedding import Embedding
from geoas.errors import ConsistencyError, ParameterError
from geoas.geo import GeoPoint


@dataclass(frozen=True)
class EndDevice:
    device_id: str
    position: GeoPoint


@dataclass(frozen=True)
class Attachment:
    """Where a device enters the network; fallback marks an out-of-range attach."""

    device_id: str
    loc_id: int
    fallback: bool


@dataclass(frozen=True)
class RoutePath:
    locations: tuple[int, ...]
    leg_lengths_km: tuple[float, ...]
    total_km: float
    as_sequence: tuple[int, ...]


def attachment_candidates(x: EndDevice, e: Embedding, h_max: float) -> np.ndarray:
    """Location ids within h_max km of the device, ascending."""
    d = _kernels.haversine_many(x.position.lat_deg, x.position.lon_deg,
                                e.lats, e.lons)
    return np.nonzero(d <= h_max)[0].astype(np.int64)


def attach(x: EndDevice, e: Embedding, h_max: float,
           rng: np.random.Generator, on_empty: str = "nearest") -> Attachment:
    """Pick the device's entry location uniformly among candidates.

    A device with nothing in range either gets the globally nearest
    location (flagged) or raises, per on_empty.
    """
    if on_empty not in ("nearest", "error"):
        raise ParameterError(f"on_empty must be 'nearest' or 'error', got {on_empty!r}")
    cands = attachment_candidates(x, e, h_max)
    if cands.size:
        return Attachment(x.device_id, int(cands[rng.integers(0, cands.size)]),
                          fallback=False)
    if on_empty == "error":
        raise ConsistencyError(
            f"device {x.device_id} has no location within {h_max} km")
    d = _kernels.haversine_many(x.position.lat_deg, x.position.lon_deg,
                                e.lats, e.lons)
    return Attachment(x.device_id, int(np.argmin(d)), fallback=True)


def _direct_path(e: Embedding, src_loc: int, dst_loc: int) -> RoutePath:
    v = e.owner(src_loc)
    if src_loc == dst_loc:
        return RoutePath((src_loc,), (), 0.0, (v,))
    d = _kernels.haversine_km(float(e.lats[src_loc]), float(e.lons[src_loc]),
                              float(e.lats[dst_loc]), float(e.lons[dst_loc]))
    return RoutePath((src_loc, dst_loc), (d,), d, (v,))


def _as_route(g: AsGraph, e: Embedding, src_loc: int, dst_loc: int,
              as_path: Sequence[int] | None):
    v1, v2 = e.owner(src_loc), e.owner(dst_loc)
    if as_path is None:
        as_path = path_from_parents(bfs_parents(g, v1), v1, v2)
    elif as_path[0] != v1 or as_path[-1] != v2:
        raise ConsistencyError("as_path endpoints do not match the locations")
    return as_path


def hot_potato_route(g: AsGraph, h: BorderGraph, e: Embedding,
                     src_loc: int, dst_loc: int,
                     as_path: Sequence[int] | None = None) -> RoutePath:
    """Greedy routing: each AS exits as close to the current position as
    it can while still having a border edge into the next AS.

    Within the current AS, the exit is the location nearest the current
    one that crosses into the next AS (ties: smallest id); the crossing
    then lands on the nearest entry of that exit (ties: smallest id). A
    final leg inside the last AS reaches the destination location.
    """
    as_path = _as_route(g, e, src_loc, dst_loc, as_path)
    if len(as_path) == 1:
        return _direct_path(e, src_loc, dst_loc)
    locs = [src_loc]
    legs: list[float] = []
    total = 0.0
    cur = src_loc
    for i in range(len(as_path) - 1):
        c = h.crossing(as_path[i], as_path[i + 1])
        dex = _kernels.haversine_many(float(e.lats[cur]), float(e.lons[cur]),
                                      e.lats[c.uniq_exits], e.lons[c.uniq_exits])
        j = int(np.argmin(dex))  # first minimum; uniq_exits ascending
        exit_loc = int(c.uniq_exits[j])
        if exit_loc != cur:
            locs.append(exit_loc)
            legs.append(float(dex[j]))
            total += float(dex[j])
        lo, hi = int(c.group_starts[j]), int(c.group_starts[j + 1])
        k = lo + int(np.argmin(c.lengths[lo:hi]))  # entries ascending per group
        entry = int(c.entries[k])
        hop = float(c.lengths[k])
        locs.append(entry)
        legs.append(hop)
        total += hop
        cur = entry
    if cur != dst_loc:
        d = _kernels.haversine_km(float(e.lats[cur]), float(e.lons[cur]),
                                  float(e.lats[dst_loc]), float(e.lons[dst_loc]))
        locs.append(dst_loc)
        legs.append(d)
        total += d
    return RoutePath(tuple(locs), tuple(legs), total, tuple(as_path))


def distance_first_route(g: AsGraph, h: BorderGraph, e: Embedding,
                         src_loc: int, dst_loc: int,
                         as_path: Sequence[int] | None = None) -> RoutePath:
    """Shortest location path over the same AS sequence hot-potato uses.

    Stage-wise DP: exact minimum over all exit/entry choices, so its total
    never exceeds the greedy one.
    """
    as_path = _as_route(g, e, src_loc, dst_loc, as_path)
    if len(as_path) == 1:
        return _direct_path(e, src_loc, dst_loc)

    states = np.array([src_loc], dtype=np.int64)
    costs = np.zeros(1, dtype=np.float64)
    # per hop: (entry states, chosen exit per state, chosen prev index per state,
    #           leg into exit per state, crossing length per state)
    trace: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
    for i in range(len(as_path) - 1):
        c = h.crossing(as_path[i], as_path[i + 1])
        ne = c.uniq_exits.size
        dmat = np.empty((states.size, ne))
        for si in range(states.size):
            dmat[si] = _kernels.haversine_many(
                float(e.lats[states[si]]), float(e.lons[states[si]]),
                e.lats[c.uniq_exits], e.lons[c.uniq_exits])
        reach = costs[:, None] + dmat
        prev_for_exit = np.argmin(reach, axis=0)  # first min: earlier state wins
        exit_costs = reach[prev_for_exit, np.arange(ne)]
        exit_leg = dmat[prev_for_exit, np.arange(ne)]

        # order crossing edges by (entry, exit) so ties resolve to small ids
        order = np.lexsort((c.exits, c.entries))
        entries_o = c.entries[order]
        exits_o = c.exits[order]
        lengths_o = c.lengths[order]
        exit_idx = np.searchsorted(c.uniq_exits, exits_o)
        cand = exit_costs[exit_idx] + lengths_o
        uniq_entries, starts = np.unique(entries_o, return_index=True)
        bounds = np.append(starts, entries_o.size)
        new_costs = np.empty(uniq_entries.size)
        pick = np.empty(uniq_entries.size, dtype=np.int64)
        for t in range(uniq_entries.size):
            lo, hi = bounds[t], bounds[t + 1]
            best = lo + int(np.argmin(cand[lo:hi]))
            pick[t] = best
            new_costs[t] = cand[best]
        trace.append((uniq_entries,
                      exits_o[pick], prev_for_exit[exit_idx[pick]],
                      exit_leg[exit_idx[pick]], lengths_o[pick]))
        states = uniq_entries
        costs = new_costs

    # close with the leg to the destination location; scalar kernel in the
    # state-to-destination direction, matching the greedy router leg for leg
    dlast = np.array([_kernels.haversine_km(
        float(e.lats[s]), float(e.lons[s]),
        float(e.lats[dst_loc]), float(e.lons[dst_loc])) for s in states])
    finals = costs + dlast
    best = int(np.argmin(finals))
    total = float(finals[best])

    # walk the trace backwards to recover the location sequence
    rev: list[tuple[int, float]] = []  # (location, leg arriving at it)
    cur_state = best
    if int(states[best]) != dst_loc:
        rev.append((dst_loc, float(dlast[best])))
    for entries, exit_of, prev_of, leg_in, leg_cross in reversed(trace):
        entry = int(entries[cur_state])
        rev.append((entry, float(leg_cross[cur_state])))
        exit_loc = int(exit_of[cur_state])
        prev = int(prev_of[cur_state])
        rev.append((exit_loc, float(leg_in[cur_state])))
        cur_state = prev
    locs = [src_loc]
    legs: list[float] = []
    for loc, leg in reversed(rev):
        if loc == locs[-1]:
            continue  # zero-length hop onto the same location
        locs.append(loc)
        legs.append(leg)
    return RoutePath(tuple(locs), tuple(legs), total, tuple(as_path))


def path_latency(p: RoutePath, n_f: float = 1.62,
                 c_light: float = 299792.458) -> float:
    """Propagation time of the path in milliseconds.

    Light in fiber covers total_km at c_light/n_f km/s.
    """
    if not (n_f > 0 and c_light > 0):
        raise ParameterError("n_f and c_light must be positive")
    return p.total_km * n_f / c_light * 1000.0


class LatencyModel:
    """The composed latency function over a built (graph, embedding, borders).

    Attachments are drawn once per device in registration order from the
    model's own seeded stream and then cached, so repeated queries agree.
    """

    def __init__(self, g: AsGraph, e: Embedding, h: BorderGraph,
                 h_max: float = 200.0, n_f: float = 1.62,
                 c_light: float = 299792.458, attach_seed: int = 0,
                 access_ms: float = 0.0, on_empty: str = "nearest"):
        if e.as_count != g.node_count:
            raise ConsistencyError(
                f"embedding covers {e.as_count} ASes, graph has {g.node_count}")
        self.graph = g
        self.embedding = e
        self.borders = h
        self.h_max = h_max
        self.n_f = n_f
        self.c_light = c_light
        self.access_ms = access_ms
        self.on_empty = on_empty
        self._rng = np.random.default_rng(attach_seed)
        self._attachments: dict[str, Attachment] = {}
        self._parents: dict[int, np.ndarray] = {}

    def attach_device(self, x: EndDevice) -> Attachment:
        got = self._attachments.get(x.device_id)
        if got is None:
            got = attach(x, self.embedding, self.h_max, self._rng, self.on_empty)
            self._attachments[x.device_id] = got
        return got

    def attach_all(self, devices: Iterable[EndDevice]) -> list[Attachment]:
        return [self.attach_device(x) for x in devices]

    def fallback_attachment_count(self) -> int:
        return sum(1 for a in self._attachments.values() if a.fallback)

    def _as_path(self, v1: int, v2: int) -> list[int]:
        parents = self._parents.get(v1)
        if parents is None:
            parents = bfs_parents(self.graph, v1)
            self._parents[v1] = parents
        return path_from_parents(parents, v1, v2)

    def route(self, x1: EndDevice, x2: EndDevice,
              distance_first: bool = False) -> RoutePath:
        src = self.attach_device(x1).loc_id
        dst = self.attach_device(x2).loc_id
        e = self.embedding
        as_path = self._as_path(e.owner(src), e.owner(dst))
        fn = distance_first_route if distance_first else hot_potato_route
        return fn(self.graph, self.borders, e, src, dst, as_path)

    def latency_ms(self, x1: EndDevice, x2: EndDevice) -> float:
        """Modeled one-way propagation latency between two devices."""
        if x1.device_id == x2.device_id:
            return 0.0
        ms = path_latency(self.route(x1, x2), self.n_f, self.c_light)
        if self.access_ms:
            ms += 2.0 * self.access_ms
        return ms


def model_latency(model: LatencyModel, x1: EndDevice, x2: EndDevice) -> float:
    return model.latency_ms(x1, x2)


def latency_matrix(model: LatencyModel, devices: Sequence[EndDevice]) -> np.ndarray:
    """Dense ordered-pair latency matrix; the diagonal is 0."""
    model.attach_all(devices)
    n = len(devices)
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            if i != j:
                out[i, j] = model.latency_ms(devices[i], devices[j])
    return out


def save_latency_matrix(model: LatencyModel, devices: Sequence[EndDevice],
                        stream: IO[str]) -> None:
    model.attach_all(devices)
    for x1 in devices:
        for x2 in devices:
            if x1.device_id != x2.device_id:
                stream.write(f"lat {x1.device_id} {x2.device_id} "
                             f"{model.latency_ms(x1, x2)!r}\n")


def save_routes(model: LatencyModel, devices: Sequence[EndDevice],
                stream: IO[str]) -> None:
    model.attach_all(devices)
    for x1 in devices:
        for x2 in devices:
            if x1.device_id != x2.device_id:
                p = model.route(x1, x2)
                locs = " ".join(str(l) for l in p.locations)
                stream.write(f"route {x1.device_id} {x2.device_id} {locs}\n")