"""Hot numeric kernels with a compiled core and a pure numpy fallback.

The compiled extension (geoas._kernels._core, built from _core.pyx) is
preferred when importable; otherwise the pure implementation is used.
Set GEOAS_KERNELS=pure or GEOAS_KERNELS=compiled to force a backend.
"""

import os

from . import pure as _pure

_forced = os.environ.get("GEOAS_KERNELS", "").strip().lower()

if _forced == "pure":
    _impl = _pure
elif _forced == "compiled":
    from . import _core as _impl  # ImportError here means the build is missing
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pure

BACKEND = "pure" if _impl is _pure else "compiled"

EARTH_RADIUS_KM = _impl.EARTH_RADIUS_KM
haversine_km = _impl.haversine_km
haversine_many = _impl.haversine_many
closest_pair = _impl.closest_pair
links_under = _impl.links_under
neighbor_cost_sq_km = _impl.neighbor_cost_sq_km
mst_mean_km = _impl.mst_mean_km

__all__ = [
    "BACKEND",
    "EARTH_RADIUS_KM",
    "haversine_km",
    "haversine_many",
    "closest_pair",
    "links_under",
    "neighbor_cost_sq_km",
    "mst_mean_km",
]
