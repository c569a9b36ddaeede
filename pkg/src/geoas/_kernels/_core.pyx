# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled distance and placement kernels.

Signatures mirror geoas._kernels.pure; see that module for semantics.
"""

from libc.math cimport asin, cos, sin, sqrt, M_PI, INFINITY
from libc.stdint cimport int64_t
from libc.stdlib cimport free, malloc

import numpy as np

cdef double DEG = M_PI / 180.0

EARTH_RADIUS_KM = 6371.0


cdef inline double _arc(double lat1, double lon1, double lat2, double lon2) noexcept nogil:
    """Central angle between two points, radians."""
    cdef double dphi = (lat2 - lat1) * DEG * 0.5
    cdef double dlam = (lon2 - lon1) * DEG * 0.5
    cdef double sp = sin(dphi)
    cdef double sl = sin(dlam)
    cdef double a = sp * sp + cos(lat1 * DEG) * cos(lat2 * DEG) * sl * sl
    if a > 1.0:
        a = 1.0
    elif a < 0.0:
        a = 0.0
    return 2.0 * asin(sqrt(a))


cdef inline int64_t _mapped(int64_t x, int64_t a, int64_t b) noexcept nogil:
    if x == a:
        return b
    if x == b:
        return a
    return x


def haversine_km(double lat1, double lon1, double lat2, double lon2,
                 double radius_km=6371.0):
    return _arc(lat1, lon1, lat2, lon2) * radius_km


def haversine_many(double lat, double lon, lats, lons, double radius_km=6371.0):
    cdef double[::1] la = np.ascontiguousarray(lats, dtype=np.float64)
    cdef double[::1] lo = np.ascontiguousarray(lons, dtype=np.float64)
    cdef Py_ssize_t n = la.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _arc(lat, lon, la[i], lo[i]) * radius_km
    return out


def closest_pair(lats, lons, ids_a, ids_b, double radius_km=6371.0):
    cdef double[::1] la = np.ascontiguousarray(lats, dtype=np.float64)
    cdef double[::1] lo = np.ascontiguousarray(lons, dtype=np.float64)
    cdef int64_t[::1] ia = np.ascontiguousarray(ids_a, dtype=np.int64)
    cdef int64_t[::1] ib = np.ascontiguousarray(ids_b, dtype=np.int64)
    cdef Py_ssize_t na = ia.shape[0], nb = ib.shape[0]
    cdef Py_ssize_t i, j
    cdef int64_t u, v, best_a = -1, best_b = -1
    cdef double d, best = INFINITY
    cdef bint better
    with nogil:
        for i in range(na):
            u = ia[i]
            for j in range(nb):
                v = ib[j]
                d = _arc(la[u], lo[u], la[v], lo[v]) * radius_km
                better = d < best
                if d == best and (u < best_a or (u == best_a and v < best_b)):
                    better = True
                if better:
                    best = d
                    best_a = u
                    best_b = v
    return int(best_a), int(best_b), float(best)


def links_under(lats, lons, ids_a, ids_b, double limit_km,
                double radius_km=6371.0):
    cdef double[::1] la = np.ascontiguousarray(lats, dtype=np.float64)
    cdef double[::1] lo = np.ascontiguousarray(lons, dtype=np.float64)
    cdef int64_t[::1] ia = np.ascontiguousarray(ids_a, dtype=np.int64)
    cdef int64_t[::1] ib = np.ascontiguousarray(ids_b, dtype=np.int64)
    cdef Py_ssize_t na = ia.shape[0], nb = ib.shape[0]
    cdef Py_ssize_t i, j, count = 0, k = 0
    cdef double d
    # pass 1: count, pass 2: fill
    with nogil:
        for i in range(na):
            for j in range(nb):
                if _arc(la[ia[i]], lo[ia[i]], la[ib[j]], lo[ib[j]]) * radius_km < limit_km:
                    count += 1
    out_a = np.empty(count, dtype=np.int64)
    out_b = np.empty(count, dtype=np.int64)
    out_d = np.empty(count, dtype=np.float64)
    cdef int64_t[::1] oa = out_a
    cdef int64_t[::1] ob = out_b
    cdef double[::1] od = out_d
    with nogil:
        for i in range(na):
            for j in range(nb):
                d = _arc(la[ia[i]], lo[ia[i]], la[ib[j]], lo[ib[j]]) * radius_km
                if d < limit_km:
                    oa[k] = ia[i]
                    ob[k] = ib[j]
                    od[k] = d
                    k += 1
    return out_a, out_b, out_d


def neighbor_cost_sq_km(lats, lons, own_ids, nb_ids, nb_starts,
                        int64_t swap_a=-1, int64_t swap_b=-1,
                        double radius_km=6371.0):
    cdef double[::1] la = np.ascontiguousarray(lats, dtype=np.float64)
    cdef double[::1] lo = np.ascontiguousarray(lons, dtype=np.float64)
    cdef int64_t[::1] own = np.ascontiguousarray(own_ids, dtype=np.int64)
    cdef int64_t[::1] nbs = np.ascontiguousarray(nb_ids, dtype=np.int64)
    cdef int64_t[::1] starts = np.ascontiguousarray(nb_starts, dtype=np.int64)
    cdef Py_ssize_t n_own = own.shape[0]
    cdef Py_ssize_t n_seg = starts.shape[0] - 1
    cdef Py_ssize_t s, i, j
    cdef int64_t u, v
    cdef double d, dmin, total = 0.0
    if swap_a == swap_b:
        swap_a = swap_b = -1
    with nogil:
        for s in range(n_seg):
            if starts[s + 1] == starts[s]:
                continue
            dmin = INFINITY
            for i in range(n_own):
                u = _mapped(own[i], swap_a, swap_b)
                for j in range(starts[s], starts[s + 1]):
                    v = _mapped(nbs[j], swap_a, swap_b)
                    d = _arc(la[u], lo[u], la[v], lo[v]) * radius_km
                    if d < dmin:
                        dmin = d
            total += dmin * dmin
    return total


def mst_mean_km(lats, lons, ids, int64_t swap_a=-1, int64_t swap_b=-1,
                double radius_km=6371.0):
    cdef double[::1] lat_tab = np.ascontiguousarray(lats, dtype=np.float64)
    cdef double[::1] lon_tab = np.ascontiguousarray(lons, dtype=np.float64)
    cdef int64_t[::1] idv = np.ascontiguousarray(ids, dtype=np.int64)
    cdef Py_ssize_t m = idv.shape[0]
    if m <= 1:
        return 0.0
    if swap_a == swap_b:
        swap_a = swap_b = -1
    cdef double *la = <double *> malloc(m * sizeof(double))
    cdef double *lo = <double *> malloc(m * sizeof(double))
    cdef double *best = <double *> malloc(m * sizeof(double))
    cdef unsigned char *in_tree = <unsigned char *> malloc(m)
    if la == NULL or lo == NULL or best == NULL or in_tree == NULL:
        free(la); free(lo); free(best); free(in_tree)
        raise MemoryError()
    cdef Py_ssize_t i, step, j
    cdef int64_t u
    cdef double d, total = 0.0, bd
    try:
        with nogil:
            for i in range(m):
                u = _mapped(idv[i], swap_a, swap_b)
                la[i] = lat_tab[u]
                lo[i] = lon_tab[u]
                in_tree[i] = 0
            in_tree[0] = 1
            for i in range(m):
                best[i] = _arc(la[0], lo[0], la[i], lo[i]) * radius_km
            for step in range(m - 1):
                j = -1
                bd = INFINITY
                for i in range(m):
                    if not in_tree[i] and best[i] < bd:
                        bd = best[i]
                        j = i
                total += bd
                in_tree[j] = 1
                for i in range(m):
                    if not in_tree[i]:
                        d = _arc(la[j], lo[j], la[i], lo[i]) * radius_km
                        if d < best[i]:
                            best[i] = d
        return total / (m - 1)
    finally:
        free(la)
        free(lo)
        free(best)
        free(in_tree)
