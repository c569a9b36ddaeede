"""Spherical geometry primitives and density-weighted location sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from geoas import _kernels
from geoas.errors import FormatError, ParameterError

EARTH_RADIUS_KM = _kernels.EARTH_RADIUS_KM


@dataclass(frozen=True)
class GeoPoint:
    """A point on the sphere, degrees latitude and longitude."""

    lat_deg: float
    lon_deg: float

    def __post_init__(self) -> None:
        lat = float(self.lat_deg)
        lon = float(self.lon_deg)
        if not (-90.0 <= lat <= 90.0):
            raise ParameterError(f"latitude {lat} outside [-90, 90]")
        if not (-180.0 <= lon <= 180.0):
            raise ParameterError(f"longitude {lon} outside [-180, 180]")
        object.__setattr__(self, "lat_deg", lat)
        object.__setattr__(self, "lon_deg", lon)


def great_circle_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points in km (haversine, R=6371)."""
    return _kernels.haversine_km(a.lat_deg, a.lon_deg, b.lat_deg, b.lon_deg)


class DensityGrid:
    """A weighted lat/lon grid used to draw random locations.

    Rows run north to south; row 0 is the northernmost latitude band.
    Cells are chosen proportionally to their weight and the point is then
    uniform in the cell's lat/lon rectangle (uniform in degrees, not in
    surface area; a deliberate simplification).
    """

    def __init__(self, lat_bins: int, lon_bins: int,
                 bounds: tuple[float, float, float, float],
                 weights: Iterable[float]):
        if lat_bins < 1 or lon_bins < 1:
            raise ParameterError("grid must have at least one bin per axis")
        lat_min, lat_max, lon_min, lon_max = (float(x) for x in bounds)
        if not (-90.0 <= lat_min < lat_max <= 90.0):
            raise ParameterError(f"bad latitude bounds [{lat_min}, {lat_max}]")
        if not (-180.0 <= lon_min < lon_max <= 180.0):
            raise ParameterError(f"bad longitude bounds [{lon_min}, {lon_max}]")
        w = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights,
                       dtype=np.float64)
        if w.size != lat_bins * lon_bins:
            raise ParameterError(
                f"expected {lat_bins * lon_bins} weights, got {w.size}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ParameterError("grid weights must be finite and non-negative")
        if w.sum() <= 0:
            raise ParameterError("grid weights sum to zero")
        self.lat_bins = int(lat_bins)
        self.lon_bins = int(lon_bins)
        self.bounds = (lat_min, lat_max, lon_min, lon_max)
        self.weights = w.reshape(lat_bins, lon_bins)
        self._cum = np.cumsum(self.weights.ravel())

    @classmethod
    def uniform(cls, lat_bins: int = 1, lon_bins: int = 1) -> "DensityGrid":
        """Equal-weight grid covering the whole globe."""
        return cls(lat_bins, lon_bins, (-90.0, 90.0, -180.0, 180.0),
                   np.ones(lat_bins * lon_bins))

    def cell_bounds(self, row: int, col: int) -> tuple[float, float, float, float]:
        """(lat_lo, lat_hi, lon_lo, lon_hi) of one cell; row 0 is northernmost."""
        lat_min, lat_max, lon_min, lon_max = self.bounds
        dlat = (lat_max - lat_min) / self.lat_bins
        dlon = (lon_max - lon_min) / self.lon_bins
        lat_hi = lat_max - row * dlat
        lon_lo = lon_min + col * dlon
        return (lat_hi - dlat, lat_hi, lon_lo, lon_lo + dlon)

    def sample_cell(self, rng: np.random.Generator) -> tuple[int, int]:
        x = rng.random() * self._cum[-1]
        flat = int(np.searchsorted(self._cum, x, side="right"))
        if flat >= self._cum.size:  # x can round up to the total
            flat = self._cum.size - 1
        return divmod(flat, self.lon_bins)


def sample_location(grid: DensityGrid, rng: np.random.Generator) -> GeoPoint:
    """Draw a location: cell by weight, then uniform inside the cell."""
    row, col = grid.sample_cell(rng)
    lat_lo, lat_hi, lon_lo, lon_hi = grid.cell_bounds(row, col)
    lat = lat_lo + rng.random() * (lat_hi - lat_lo)
    lon = lon_lo + rng.random() * (lon_hi - lon_lo)
    return GeoPoint(lat, lon)


def save_grid(grid: DensityGrid, stream: IO[str]) -> None:
    lat_min, lat_max, lon_min, lon_max = grid.bounds
    stream.write(f"grid {grid.lat_bins} {grid.lon_bins} "
                 f"{lat_min!r} {lat_max!r} {lon_min!r} {lon_max!r}\n")
    for row in grid.weights:
        stream.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_grid(stream: IO[str], path: str | None = None) -> DensityGrid:
    """Parse a grid file: header line, then row-major north-to-south weights."""
    header = None
    header_line = 0
    values: list[float] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if parts[0] != "grid" or len(parts) != 7:
                raise FormatError("expected 'grid <lat_bins> <lon_bins> "
                                  "<lat_min> <lat_max> <lon_min> <lon_max>'",
                                  path=path, line=lineno)
            header = parts
            header_line = lineno
            continue
        try:
            values.extend(float(p) for p in parts)
        except ValueError:
            raise FormatError(f"bad weight value in {parts!r}",
                              path=path, line=lineno) from None
    if header is None:
        raise FormatError("empty grid file", path=path, line=1)
    try:
        lat_bins, lon_bins = int(header[1]), int(header[2])
        bounds = tuple(float(x) for x in header[3:7])
    except ValueError:
        raise FormatError("bad grid header numbers",
                          path=path, line=header_line) from None
    try:
        return DensityGrid(lat_bins, lon_bins, bounds, values)
    except ParameterError as exc:
        raise FormatError(str(exc), path=path, line=header_line) from None
