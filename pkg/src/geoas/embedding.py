"""AS-to-location assignment: counts, compactness, and the swap optimizer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence

import numpy as np

from geoas import _kernels
from geoas.asgraph import AsGraph
from geoas.errors import FormatError, ParameterError
from geoas.geo import DensityGrid, GeoPoint, sample_location


@dataclass(frozen=True)
class EmbeddingParams:
    """Knobs for sizing and optimizing an embedding.

    degree_offset: degree subtracted before scaling the location count.
    max_locations: location count the highest-degree AS gets.
    max_compactness_km: upper bound a swap must keep both ASes under.
    patience: consecutive rejected swaps before the optimizer stops.
    """

    degree_offset: int = 50
    max_locations: int = 36
    max_compactness_km: float = 2000.0
    patience: int = 5000

    def __post_init__(self) -> None:
        if self.degree_offset < 0:
            raise ParameterError("degree_offset must be >= 0")
        if self.max_locations < 1:
            raise ParameterError("max_locations must be >= 1")
        if not self.max_compactness_km > 0:
            raise ParameterError("max_compactness_km must be > 0")
        if self.patience < 1:
            raise ParameterError("patience must be >= 1")


def location_count(degree: int, max_degree: int, degree_offset: int,
                   max_locations: int) -> int:
    """Locations an AS of the given degree receives, always at least 1.

    Scales (degree - degree_offset) / max_degree up to max_locations and
    takes the ceiling; exact integer arithmetic, no float rounding.
    """
    if max_degree < 1:
        raise ParameterError("max_degree must be >= 1")
    num = (degree - degree_offset) * max_locations
    return max(-(-num // max_degree), 1)


def compactness(points: Sequence[GeoPoint]) -> float:
    """Mean edge length (km) of the MST over the complete graph on points.

    A single point is maximally compact by definition: 0 km.
    """
    if len(points) == 0:
        raise ParameterError("compactness of an empty location set")
    lats = np.array([p.lat_deg for p in points], dtype=np.float64)
    lons = np.array([p.lon_deg for p in points], dtype=np.float64)
    return _kernels.mst_mean_km(lats, lons, np.arange(len(points), dtype=np.int64))


class Embedding:
    """Maps each AS to an ordered set of location ids with coordinates.

    Location ids are dense 0..total-1 and globally unique; the reverse
    index (location to AS) is kept consistent under ownership swaps.
    """

    def __init__(self, owners: np.ndarray, lats: np.ndarray, lons: np.ndarray,
                 as_count: int | None = None):
        owners = np.asarray(owners, dtype=np.int64).copy()
        lats = np.asarray(lats, dtype=np.float64).copy()
        lons = np.asarray(lons, dtype=np.float64).copy()
        if not (owners.size == lats.size == lons.size):
            raise ParameterError("owners, lats, lons must have equal length")
        if owners.size == 0:
            raise ParameterError("embedding needs at least one location")
        if np.any(lats < -90.0) or np.any(lats > 90.0):
            raise ParameterError("latitude outside [-90, 90]")
        if np.any(lons < -180.0) or np.any(lons > 180.0):
            raise ParameterError("longitude outside [-180, 180]")
        if owners.min() < 0:
            raise ParameterError("negative AS id")
        count = int(owners.max()) + 1 if as_count is None else int(as_count)
        self._owners = owners
        self._lats = lats
        self._lons = lons
        self._as_locs: list[np.ndarray] = []
        buckets: list[list[int]] = [[] for _ in range(count)]
        for loc in range(owners.size):
            v = int(owners[loc])
            if v >= count:
                raise ParameterError(f"AS id {v} out of range")
            buckets[v].append(loc)
        for v, locs in enumerate(buckets):
            if not locs:
                raise ParameterError(f"AS {v} has no locations")
            self._as_locs.append(np.array(locs, dtype=np.int64))
        self._pos = np.empty(owners.size, dtype=np.int64)
        for v, locs in enumerate(self._as_locs):
            self._pos[locs] = np.arange(locs.size)

    @property
    def as_count(self) -> int:
        return len(self._as_locs)

    @property
    def total_locations(self) -> int:
        return self._owners.size

    @property
    def lats(self) -> np.ndarray:
        return self._lats

    @property
    def lons(self) -> np.ndarray:
        return self._lons

    def owner(self, loc_id: int) -> int:
        return int(self._owners[loc_id])

    def location_ids(self, v: int) -> np.ndarray:
        """Ordered location ids of AS v. Treat as read-only."""
        return self._as_locs[v]

    def point(self, loc_id: int) -> GeoPoint:
        return GeoPoint(float(self._lats[loc_id]), float(self._lons[loc_id]))

    def points_of(self, v: int) -> list[GeoPoint]:
        return [self.point(int(l)) for l in self._as_locs[v]]

    def compactness_of(self, v: int) -> float:
        return _kernels.mst_mean_km(self._lats, self._lons, self._as_locs[v])

    def swap_ownership(self, l1: int, l2: int) -> None:
        """Exchange which AS owns l1 and l2; counts and coordinates stay put."""
        if l1 == l2:
            return
        v1, v2 = int(self._owners[l1]), int(self._owners[l2])
        i1, i2 = int(self._pos[l1]), int(self._pos[l2])
        self._as_locs[v1][i1] = l2
        self._as_locs[v2][i2] = l1
        self._owners[l1], self._owners[l2] = v2, v1
        self._pos[l1], self._pos[l2] = i2, i1

    def copy(self) -> "Embedding":
        return Embedding(self._owners, self._lats, self._lons, self.as_count)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return (np.array_equal(self._owners, other._owners)
                and np.array_equal(self._lats, other._lats)
                and np.array_equal(self._lons, other._lons))

    def __repr__(self) -> str:
        return (f"Embedding(as_count={self.as_count}, "
                f"locations={self.total_locations})")


def initial_embedding(g: AsGraph, grid: DensityGrid, params: EmbeddingParams,
                      seed: int = 0) -> Embedding:
    """Random embedding: per-AS location counts from the degree formula,
    coordinates drawn independently from the density grid.

    Compactness bounds are not enforced here; the optimizer handles that.
    """
    rng = np.random.default_rng(seed)
    max_deg = g.max_degree()
    counts = [location_count(g.degree(v), max_deg, params.degree_offset,
                             params.max_locations)
              for v in range(g.node_count)]
    owners = np.repeat(np.arange(g.node_count, dtype=np.int64), counts)
    lats = np.empty(owners.size, dtype=np.float64)
    lons = np.empty(owners.size, dtype=np.float64)
    for i in range(owners.size):
        pt = sample_location(grid, rng)
        lats[i] = pt.lat_deg
        lons[i] = pt.lon_deg
    return Embedding(owners, lats, lons, g.node_count)


def _neighbor_segments(g: AsGraph, e: Embedding, v: int) -> tuple[np.ndarray, np.ndarray]:
    nbrs = g.neighbors(v)
    if not nbrs:
        empty = np.empty(0, dtype=np.int64)
        return empty, np.zeros(1, dtype=np.int64)
    segs = [e.location_ids(w) for w in nbrs]
    starts = np.zeros(len(segs) + 1, dtype=np.int64)
    np.cumsum([s.size for s in segs], out=starts[1:])
    return np.concatenate(segs), starts


def neighbor_cost(g: AsGraph, e: Embedding, v: int) -> float:
    """Sum over v's graph neighbors of the squared closest-pair distance (km²)."""
    nb_ids, nb_starts = _neighbor_segments(g, e, v)
    if nb_ids.size == 0:
        return 0.0
    return _kernels.neighbor_cost_sq_km(e.lats, e.lons, e.location_ids(v),
                                        nb_ids, nb_starts)


@dataclass
class OptimizeStats:
    """What the optimizer did and where it left the embedding."""

    iterations: int = 0
    accepted: int = 0
    last_accept_iteration: int = 0
    final_max_compactness_km: float = 0.0
    compactness_violations: int = 0
    # (iteration, loc_a, loc_b, cost_before, cost_after) per accepted swap
    swap_log: list[tuple[int, int, int, float, float]] = field(default_factory=list)


def optimize_embedding(g: AsGraph, emb: Embedding, params: EmbeddingParams,
                       seed: int = 0) -> tuple[Embedding, OptimizeStats]:
    """Shuffle location ownership between ASes to shorten neighbor links.

    Each iteration draws two locations; if they belong to different ASes,
    the swap is kept only when both post-swap compactness values stay
    under the bound and the two ASes' combined neighbor cost strictly
    drops. Stops after `patience` consecutive iterations without a kept
    swap, so the loop always terminates. The input embedding is not
    modified.

    Compactness of the result is reported in the stats, not guaranteed:
    an over-bound AS the optimizer never managed to fix stays over bound.
    """
    if emb.as_count != g.node_count:
        raise ParameterError(
            f"embedding has {emb.as_count} ASes, graph has {g.node_count}")
    e = emb.copy()
    rng = np.random.default_rng(seed)
    total = e.total_locations
    cmax = params.max_compactness_km
    lats, lons = e.lats, e.lons

    nb_cache: list[tuple[np.ndarray, np.ndarray] | None] = [None] * g.node_count
    cost_cache: list[float | None] = [None] * g.node_count

    def segments(v: int) -> tuple[np.ndarray, np.ndarray]:
        cached = nb_cache[v]
        if cached is None:
            cached = _neighbor_segments(g, e, v)
            nb_cache[v] = cached
        return cached

    def cost(v: int) -> float:
        val = cost_cache[v]
        if val is None:
            ids, starts = segments(v)
            val = _kernels.neighbor_cost_sq_km(lats, lons, e.location_ids(v),
                                               ids, starts) if ids.size else 0.0
            cost_cache[v] = val
        return val

    def cost_swapped(v: int, a: int, b: int) -> float:
        ids, starts = segments(v)
        if ids.size == 0:
            return 0.0
        return _kernels.neighbor_cost_sq_km(lats, lons, e.location_ids(v),
                                            ids, starts, a, b)

    stats = OptimizeStats()
    since_accept = 0
    while since_accept < params.patience:
        stats.iterations += 1
        since_accept += 1
        l1 = int(rng.integers(0, total))
        l2 = int(rng.integers(0, total))
        v1, v2 = e.owner(l1), e.owner(l2)
        if v1 == v2:
            continue
        # both ASes must stay under the compactness bound after the swap
        if not _kernels.mst_mean_km(lats, lons, e.location_ids(v1), l1, l2) < cmax:
            continue
        if not _kernels.mst_mean_km(lats, lons, e.location_ids(v2), l1, l2) < cmax:
            continue
        before = cost(v1) + cost(v2)
        after = cost_swapped(v1, l1, l2) + cost_swapped(v2, l1, l2)
        if not after < before:
            continue
        e.swap_ownership(l1, l2)
        stats.accepted += 1
        stats.last_accept_iteration = stats.iterations
        stats.swap_log.append((stats.iterations, l1, l2, before, after))
        since_accept = 0
        stale = {v1, v2}
        stale.update(g.neighbors(v1))
        stale.update(g.neighbors(v2))
        for v in stale:
            nb_cache[v] = None
            cost_cache[v] = None

    comp = np.array([e.compactness_of(v) for v in range(g.node_count)])
    stats.final_max_compactness_km = float(comp.max())
    stats.compactness_violations = int(np.sum(~(comp < cmax)))
    return e, stats


def save_embedding(e: Embedding, stream: IO[str],
                   header: Mapping[str, object] | None = None) -> None:
    if header:
        for key, value in header.items():
            stream.write(f"# {key} {value}\n")
    for loc in range(e.total_locations):
        stream.write(f"loc {loc} {e.owner(loc)} "
                     f"{float(e.lats[loc])!r} {float(e.lons[loc])!r}\n")


def load_embedding(stream: IO[str], path: str | None = None) -> Embedding:
    """Parse `loc <id> <as> <lat> <lon>` lines; location ids must be dense."""
    records: dict[int, tuple[int, float, float]] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] != "loc" or len(parts) != 5:
            raise FormatError("expected 'loc <id> <as> <lat> <lon>'",
                              path=path, line=lineno)
        try:
            loc, v = int(parts[1]), int(parts[2])
            lat, lon = float(parts[3]), float(parts[4])
        except ValueError:
            raise FormatError(f"bad numbers in {line!r}",
                              path=path, line=lineno) from None
        if loc in records:
            raise FormatError(f"duplicate location id {loc}",
                              path=path, line=lineno)
        records[loc] = (v, lat, lon)
    if not records:
        raise FormatError("empty embedding file", path=path, line=1)
    n = len(records)
    if sorted(records) != list(range(n)):
        raise FormatError("location ids are not dense from 0", path=path, line=1)
    owners = np.array([records[i][0] for i in range(n)], dtype=np.int64)
    lats = np.array([records[i][1] for i in range(n)], dtype=np.float64)
    lons = np.array([records[i][2] for i in range(n)], dtype=np.float64)
    try:
        return Embedding(owners, lats, lons)
    except ParameterError as exc:
        raise FormatError(str(exc), path=path, line=1) from None
