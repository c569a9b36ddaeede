"""Pure numpy implementations of the hot kernels.

These are the fallback used when the compiled extension is unavailable and
the reference the extension is parity-tested against. All coordinate inputs
are degrees; ids index into the flat lats/lons coordinate tables.
"""

from __future__ import annotations

import math

import numpy as np

EARTH_RADIUS_KM = 6371.0


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float,
                 radius_km: float = EARTH_RADIUS_KM) -> float:
    """Great-circle distance between two points, in km.

    Haversine form: numerically stable down to sub-meter separations,
    unlike the arccos formulation.
    """
    dphi = math.radians(lat2 - lat1) * 0.5
    dlam = math.radians(lon2 - lon1) * 0.5
    sp = math.sin(dphi)
    sl = math.sin(dlam)
    # left-associated products keep this bitwise equal to the compiled path
    a = sp * sp + math.cos(math.radians(lat1)) * math.cos(math.radians(lat2)) * sl * sl
    if a > 1.0:
        a = 1.0
    return 2.0 * radius_km * math.asin(math.sqrt(a))


def haversine_many(lat: float, lon: float, lats: np.ndarray, lons: np.ndarray,
                   radius_km: float = EARTH_RADIUS_KM) -> np.ndarray:
    """Distances from one point to many, in km."""
    dphi = np.radians(lats - lat) * 0.5
    dlam = np.radians(lons - lon) * 0.5
    sp = np.sin(dphi)
    sl = np.sin(dlam)
    a = sp * sp + math.cos(math.radians(lat)) * np.cos(np.radians(lats)) * sl * sl
    np.clip(a, 0.0, 1.0, out=a)
    return 2.0 * radius_km * np.arcsin(np.sqrt(a))


def _cross_matrix(lats, lons, ids_a, ids_b, radius_km):
    la = np.asarray(lats)[ids_a][:, None]
    lo = np.asarray(lons)[ids_a][:, None]
    lb = np.asarray(lats)[ids_b][None, :]
    lbo = np.asarray(lons)[ids_b][None, :]
    dphi = np.radians(lb - la) * 0.5
    dlam = np.radians(lbo - lo) * 0.5
    sp = np.sin(dphi)
    sl = np.sin(dlam)
    a = sp * sp + np.cos(np.radians(la)) * np.cos(np.radians(lb)) * sl * sl
    np.clip(a, 0.0, 1.0, out=a)
    return 2.0 * radius_km * np.arcsin(np.sqrt(a))


def closest_pair(lats, lons, ids_a, ids_b, radius_km: float = EARTH_RADIUS_KM):
    """Closest cross pair between two id sets.

    Returns (id_a, id_b, km); distance ties resolve to the smallest
    (id_a, id_b) pair.
    """
    dist = _cross_matrix(lats, lons, ids_a, ids_b, radius_km)
    dmin = dist.min()
    rows, cols = np.nonzero(dist == dmin)
    pairs = sorted((int(ids_a[r]), int(ids_b[c])) for r, c in zip(rows, cols))
    best_a, best_b = pairs[0]
    return best_a, best_b, float(dmin)


def links_under(lats, lons, ids_a, ids_b, limit_km: float,
                radius_km: float = EARTH_RADIUS_KM):
    """All cross pairs with distance strictly below limit_km.

    Returns (ids_a, ids_b, km) arrays in row-major pair order.
    """
    dist = _cross_matrix(lats, lons, ids_a, ids_b, radius_km)
    rows, cols = np.nonzero(dist < limit_km)
    return (
        np.asarray(ids_a)[rows].astype(np.int64),
        np.asarray(ids_b)[cols].astype(np.int64),
        dist[rows, cols].astype(np.float64),
    )


def _apply_swap(ids, swap_a, swap_b):
    if swap_a < 0 or swap_a == swap_b:
        return ids
    out = np.array(ids, copy=True)
    out[ids == swap_a] = swap_b
    out[ids == swap_b] = swap_a
    return out


def neighbor_cost_sq_km(lats, lons, own_ids, nb_ids, nb_starts,
                        swap_a: int = -1, swap_b: int = -1,
                        radius_km: float = EARTH_RADIUS_KM) -> float:
    """Sum over neighbor segments of the squared minimum cross distance.

    nb_ids holds the neighbors' location ids concatenated; nb_starts are the
    segment offsets (one segment per neighbor). When swap_a/swap_b are both
    valid ids, every occurrence of one is read as the other, which evaluates
    the cost as if ownership of the two locations had been exchanged.
    """
    own = _apply_swap(np.asarray(own_ids), swap_a, swap_b)
    nbs = _apply_swap(np.asarray(nb_ids), swap_a, swap_b)
    total = 0.0
    for s in range(len(nb_starts) - 1):
        seg = nbs[nb_starts[s]:nb_starts[s + 1]]
        if seg.size == 0:
            continue
        dmin = float(_cross_matrix(lats, lons, own, seg, radius_km).min())
        total += dmin * dmin
    return total


def mst_mean_km(lats, lons, ids, swap_a: int = -1, swap_b: int = -1,
                radius_km: float = EARTH_RADIUS_KM) -> float:
    """Mean edge length of the MST over the complete distance graph on ids.

    Prim's algorithm; O(m^2) on the complete graph. A single location (or
    empty set) yields 0.
    """
    ids = _apply_swap(np.asarray(ids), swap_a, swap_b)
    m = ids.size
    if m <= 1:
        return 0.0
    la = np.asarray(lats)[ids].astype(np.float64)
    lo = np.asarray(lons)[ids].astype(np.float64)
    in_tree = np.zeros(m, dtype=bool)
    in_tree[0] = True
    best = haversine_many(float(la[0]), float(lo[0]), la, lo, radius_km)
    total = 0.0
    for _ in range(m - 1):
        masked = np.where(in_tree, np.inf, best)
        j = int(np.argmin(masked))
        total += float(masked[j])
        in_tree[j] = True
        dist_j = haversine_many(float(la[j]), float(lo[j]), la, lo, radius_km)
        np.minimum(best, dist_j, out=best)
    return total / (m - 1)
