import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from istnsim.geometry import (EARTH_RADIUS_M, BelowHorizonError, GroundPosition, SatelliteGeometry,
                              azimuth_offset, bearing, distance_2d, distance_3d,
                              elevation_from_ground_arc, satellite_elevation, slant_range,
                              vertical_angle, vertical_angle_to_user, wrap_angle)

coord = st.floats(-1e5, 1e5, allow_nan=False)
height = st.floats(0, 200, allow_nan=False)
points = st.builds(GroundPosition, coord, coord, height)


def test_ground_position_validation():
    with pytest.raises(ValueError):
        GroundPosition(0, 0, -1)
    with pytest.raises(ValueError):
        GroundPosition(math.nan, 0)
    with pytest.raises(ValueError):
        GroundPosition(0, math.inf)


def test_satellite_geometry_validation():
    with pytest.raises(ValueError):
        SatelliteGeometry(0.0, GroundPosition(0, 0))
    with pytest.raises(ValueError):
        SatelliteGeometry(550e3, GroundPosition(0, 0), earth_radius=6.371e6)


def test_distance_examples():
    a, b = GroundPosition(0, 0, 10), GroundPosition(3, 4, 10)
    assert distance_2d(a, b) == 5.0
    assert distance_3d(a, GroundPosition(0, 0, 1.5)) == pytest.approx(8.5)
    assert distance_3d(GroundPosition(0, 0, 10), GroundPosition(30, 40, 10)) == pytest.approx(50.0)


@given(points, points)
def test_distance_3d_symmetric(a, b):
    assert distance_3d(a, b) == distance_3d(b, a)


@given(points, points, points)
def test_distance_3d_triangle(a, b, c):
    assert distance_3d(a, c) <= distance_3d(a, b) + distance_3d(b, c) + 1e-6


def test_slant_range_golden():
    assert slant_range(550e3, 90.0) == pytest.approx(550e3, rel=1e-9)
    # horizon: sqrt(h^2 + 2 h R)
    expected = math.sqrt(550e3**2 + 2 * 550e3 * EARTH_RADIUS_M)
    assert slant_range(550e3, 0.0) == pytest.approx(expected, rel=1e-12)
    assert slant_range(550e3, 0.0) / 1e3 == pytest.approx(2705.235, abs=0.01)


def test_slant_range_rejects_bad_elevation():
    for bad in (-0.1, 90.1, math.nan):
        with pytest.raises(ValueError):
            slant_range(550e3, bad)


def test_slant_range_law_of_cosines():
    # independent oracle: triangle Earth centre, user, satellite
    rng = np.random.default_rng(0)
    for _ in range(200):
        h = rng.uniform(3e5, 2e6)
        el = rng.uniform(0, 90)
        d = slant_range(h, el)
        r = EARTH_RADIUS_M
        lhs = (r + h) ** 2
        rhs = r**2 + d**2 - 2 * r * d * math.cos(math.radians(90 + el))
        assert lhs == pytest.approx(rhs, rel=1e-12)


@given(st.floats(2e5, 2e6), st.floats(0, 89.9), st.floats(0.01, 10))
def test_slant_range_decreasing(h, el, step):
    hi = min(el + step, 90.0)
    assert slant_range(h, hi) < slant_range(h, el)


def test_slant_range_vectorised():
    el = np.array([0.0, 30.0, 90.0])
    out = slant_range(550e3, el)
    assert out.shape == (3,)
    assert out[2] == pytest.approx(550e3)


def test_elevation_nadir_limit():
    sat = SatelliteGeometry(550e3, GroundPosition(0, 0))
    assert satellite_elevation(GroundPosition(0, 0), sat) == pytest.approx(90.0, abs=1e-6)
    assert elevation_from_ground_arc(1e-6, 550e3) == pytest.approx(90.0, abs=1e-6)


def test_elevation_consistent_with_slant_range():
    # the slant range for the computed elevation must match direct 3D distance on the sphere
    r, h = EARTH_RADIUS_M, 550e3
    for arc in (0.0, 1e5, 5e5, 1.5e6):
        g = arc / r
        user = np.array([r * math.sin(g), r * math.cos(g)])
        direct = np.linalg.norm(np.array([0.0, r + h]) - user)
        el = elevation_from_ground_arc(arc, h)
        assert slant_range(h, el) == pytest.approx(direct, rel=1e-9)


def test_below_horizon_raises():
    sat = SatelliteGeometry(550e3, GroundPosition(0, 0))
    with pytest.raises(BelowHorizonError):
        satellite_elevation(GroundPosition(4e6, 0), sat)


def test_vertical_angle():
    assert vertical_angle(8.5, 8.5) == pytest.approx(45.0)
    assert vertical_angle(8.5, 0.0) == 90.0
    assert vertical_angle_to_user(GroundPosition(0, 0, 10), GroundPosition(0, 0, 1.5)) == 90.0
    out = vertical_angle(np.array([10.0, 10.0]), np.array([0.0, 10.0]))
    assert out.tolist() == pytest.approx([90.0, 45.0])


@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_wrap_range(x):
    w = wrap_angle(x)
    assert -180.0 < w <= 180.0
    assert math.isclose(math.cos(math.radians(w)), math.cos(math.radians(x)), abs_tol=1e-6)


@given(st.floats(-720, 720, allow_nan=False))
def test_azimuth_offset_self_is_zero(x):
    assert azimuth_offset(x, x) == 0.0


def test_azimuth_offset_examples():
    assert azimuth_offset(0, 180) == 180.0
    assert azimuth_offset(0, -180) == 180.0
    assert azimuth_offset(120, -120) == 120.0
    assert azimuth_offset(-120, 120) == -120.0
    assert bearing(GroundPosition(0, 0), GroundPosition(0, 5)) == pytest.approx(90.0)
