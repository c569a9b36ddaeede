import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geoas.errors import FormatError, ParameterError
from geoas.geo import (DensityGrid, GeoPoint, great_circle_distance,
                       load_grid, sample_location, save_grid)

QUARTER_KM = math.pi * 6371.0 / 2.0


def test_point_validates_ranges():
    GeoPoint(90.0, -180.0)
    GeoPoint(-90.0, 180.0)
    with pytest.raises(ParameterError):
        GeoPoint(90.0001, 0.0)
    with pytest.raises(ParameterError):
        GeoPoint(0.0, 180.0001)


def test_point_coerces_to_float():
    p = GeoPoint(1, 2)
    assert isinstance(p.lat_deg, float) and isinstance(p.lon_deg, float)


def test_known_distances():
    pole = GeoPoint(90.0, 0.0)
    equator = GeoPoint(0.0, 0.0)
    assert great_circle_distance(pole, equator) == pytest.approx(QUARTER_KM, abs=1e-9)
    anti = GeoPoint(0.0, 180.0)
    assert great_circle_distance(equator, anti) == pytest.approx(2 * QUARTER_KM, abs=1e-9)
    # one degree of longitude on the equator
    d = great_circle_distance(equator, GeoPoint(0.0, 1.0))
    assert d == pytest.approx(111.19492664455873, abs=1e-9)


def test_submeter_resolution():
    # ~1.1 m step in latitude must not collapse to zero
    a = GeoPoint(10.0, 20.0)
    b = GeoPoint(10.00001, 20.0)
    d = great_circle_distance(a, b)
    assert 0.0009 < d < 0.0013


coords = st.tuples(st.floats(-90, 90), st.floats(-180, 180))


@given(coords, coords)
def test_distance_symmetric_nonnegative(c1, c2):
    a, b = GeoPoint(*c1), GeoPoint(*c2)
    d = great_circle_distance(a, b)
    assert d >= 0.0
    assert d == great_circle_distance(b, a)
    assert d <= 2 * QUARTER_KM + 1e-9


@given(coords, coords, coords)
def test_triangle_inequality(c1, c2, c3):
    a, b, c = GeoPoint(*c1), GeoPoint(*c2), GeoPoint(*c3)
    dab = great_circle_distance(a, b)
    dbc = great_circle_distance(b, c)
    dac = great_circle_distance(a, c)
    assert dac <= dab + dbc + 1e-6


def test_uniform_grid_covers_globe():
    grid = DensityGrid.uniform()
    assert grid.lat_bins == 1 and grid.lon_bins == 1
    assert grid.cell_bounds(0, 0) == (-90.0, 90.0, -180.0, 180.0)


def test_grid_validation():
    with pytest.raises(ParameterError):
        DensityGrid(0, 1, (-90, 90, -180, 180), [[1.0]])
    with pytest.raises(ParameterError):
        DensityGrid(1, 1, (50, 40, -180, 180), [[1.0]])
    with pytest.raises(ParameterError):
        DensityGrid(1, 1, (-90, 90, -180, 180), [[0.0]])
    with pytest.raises(ParameterError):
        DensityGrid(1, 2, (-90, 90, -180, 180), [[1.0, -0.5]])


def test_sampling_respects_zero_weight_cells():
    # all mass in the north-west quadrant
    grid = DensityGrid(2, 2, (-90, 90, -180, 180),
                       [[1.0, 0.0], [0.0, 0.0]])
    rng = np.random.default_rng(5)
    for _ in range(200):
        p = sample_location(grid, rng)
        assert p.lat_deg >= 0.0
        assert p.lon_deg <= 0.0


def test_sampling_weight_proportions():
    grid = DensityGrid(1, 2, (-90, 90, -180, 180), [[3.0, 1.0]])
    rng = np.random.default_rng(6)
    west = sum(sample_location(grid, rng).lon_deg < 0.0 for _ in range(4000))
    assert 0.70 < west / 4000 < 0.80


def test_sampling_deterministic():
    grid = DensityGrid(3, 4, (-60, 70, -150, 160),
                       np.arange(1, 13, dtype=float).reshape(3, 4))
    a = [sample_location(grid, np.random.default_rng(9)) for _ in range(20)]
    b = [sample_location(grid, np.random.default_rng(9)) for _ in range(20)]
    assert a == b


def test_grid_roundtrip():
    grid = DensityGrid(2, 3, (-45.0, 60.0, -100.0, 120.0),
                       [[1.0, 2.0, 3.0], [4.0, 0.0, 6.0]])
    buf = io.StringIO()
    save_grid(grid, buf)
    buf.seek(0)
    back = load_grid(buf)
    assert back.lat_bins == 2 and back.lon_bins == 3
    assert back.bounds == grid.bounds
    np.testing.assert_array_equal(back.weights, grid.weights)


def test_grid_parse_errors_carry_line():
    bad = "grid 2 2 -90 90 -180 180\n1 2\n"
    with pytest.raises(FormatError) as err:
        load_grid(io.StringIO(bad), path="g.txt")
    assert "g.txt" in str(err.value)
