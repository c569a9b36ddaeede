"""Timing comparison of the pure-numpy kernels against the compiled ones.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

The optimizer row exercises the kernels the way the swap loop does:
many small MST and neighbor-cost evaluations rather than one large call.
"""

import time

import numpy as np

from geoas._kernels import pure

try:
    from geoas._kernels import _core as compiled
except ImportError:
    compiled = None

from geoas.asgraph import generate_pfp
from geoas.embedding import EmbeddingParams, initial_embedding
from geoas.geo import DensityGrid


def timeit(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_haversine_many(mod, lats, lons):
    return lambda: mod.haversine_many(12.3, 45.6, lats, lons)


def bench_mst(mod, lats, lons, ids):
    return lambda: mod.mst_mean_km(lats, lons, ids)


def bench_neighbor_cost(mod, lats, lons, own, nb, starts):
    return lambda: mod.neighbor_cost_sq_km(lats, lons, own, nb, starts)


def bench_links_under(mod, lats, lons, ids_a, ids_b):
    return lambda: mod.links_under(lats, lons, ids_a, ids_b, 2000.0)


def bench_swap_loop(mod, lats, lons, groups, rng):
    # tentative-swap evaluation pattern: two compactness checks plus two
    # neighbor costs per candidate, on small id sets
    own = groups[0]
    nb = np.concatenate(groups[1:4])
    starts = np.cumsum([0] + [g.size for g in groups[1:4]]).astype(np.int64)

    def run():
        for _ in range(300):
            a = int(rng.integers(0, len(lats)))
            b = int(rng.integers(0, len(lats)))
            mod.mst_mean_km(lats, lons, groups[0], a, b)
            mod.mst_mean_km(lats, lons, groups[1], a, b)
            mod.neighbor_cost_sq_km(lats, lons, own, nb, starts, a, b)
    return run


def main():
    rng = np.random.default_rng(42)
    n = 20000
    lats = rng.uniform(-85.0, 85.0, n)
    lons = rng.uniform(-180.0, 180.0, n)
    ids = rng.choice(n, 4000, replace=False).astype(np.int64)
    ids_a = rng.choice(n, 300, replace=False).astype(np.int64)
    ids_b = rng.choice(n, 300, replace=False).astype(np.int64)
    groups = [rng.choice(n, m, replace=False).astype(np.int64)
              for m in (30, 25, 20, 15)]

    rows = [
        ("haversine_many (20k points)",
         bench_haversine_many(pure, lats, lons),
         bench_haversine_many(compiled, lats, lons) if compiled else None),
        ("mst_mean_km (4k locations)",
         bench_mst(pure, lats, lons, ids),
         bench_mst(compiled, lats, lons, ids) if compiled else None),
        ("neighbor_cost (30 own, 60 nb)",
         bench_neighbor_cost(pure, lats, lons, groups[0],
                             np.concatenate(groups[1:4]),
                             np.cumsum([0, 25, 20, 15]).astype(np.int64)),
         bench_neighbor_cost(compiled, lats, lons, groups[0],
                             np.concatenate(groups[1:4]),
                             np.cumsum([0, 25, 20, 15]).astype(np.int64))
         if compiled else None),
        ("links_under (300x300 pairs)",
         bench_links_under(pure, lats, lons, ids_a, ids_b),
         bench_links_under(compiled, lats, lons, ids_a, ids_b)
         if compiled else None),
        ("swap loop (300 candidates)",
         bench_swap_loop(pure, lats, lons, groups, np.random.default_rng(1)),
         bench_swap_loop(compiled, lats, lons, groups,
                         np.random.default_rng(1)) if compiled else None),
    ]

    print(f"{'kernel':34} {'pure':>10} {'compiled':>10} {'speedup':>8}")
    for name, pure_fn, comp_fn in rows:
        tp = timeit(pure_fn)
        if comp_fn is None:
            print(f"{name:34} {tp * 1e3:9.2f}ms {'n/a':>10} {'':>8}")
            continue
        tc = timeit(comp_fn)
        print(f"{name:34} {tp * 1e3:9.2f}ms {tc * 1e3:9.2f}ms "
              f"{tp / tc:7.1f}x")

    # whole-stage comparison: one optimizer-heavy embed on each backend
    print()
    g = generate_pfp(120, 0.40, 0.11, seed=5)
    params = EmbeddingParams(2, 4, 20000.0, 2000)
    grid = DensityGrid.uniform()

    import geoas.embedding as emb_mod
    from geoas import _kernels

    def embed_with(impl):
        saved = _kernels._impl
        _kernels.mst_mean_km = impl.mst_mean_km
        _kernels.neighbor_cost_sq_km = impl.neighbor_cost_sq_km
        try:
            e0 = initial_embedding(g, grid, params, seed=6)
            t0 = time.perf_counter()
            emb_mod.optimize_embedding(g, e0, params, seed=7)
            return time.perf_counter() - t0
        finally:
            _kernels.mst_mean_km = saved.mst_mean_km
            _kernels.neighbor_cost_sq_km = saved.neighbor_cost_sq_km

    tp = embed_with(pure)
    if compiled is not None:
        tc = embed_with(compiled)
        print(f"{'optimize_embedding (120 AS)':34} {tp:9.2f}s  {tc:9.2f}s "
              f"{tp / tc:7.1f}x")
    else:
        print(f"{'optimize_embedding (120 AS)':34} {tp:9.2f}s  "
              f"compiled n/a")


if __name__ == "__main__":
    main()
