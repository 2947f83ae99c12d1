import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from istnsim.antenna import (NO_COVERAGE, Downtilt, SatelliteBeam, SectorPattern, azimuth_gain,
                             beam_gain, elevation_gain, gain_3d, satellite_gain)
from istnsim.geometry import GroundPosition, SatelliteGeometry

P = SectorPattern()
angles = st.floats(-180, 180, allow_nan=False)
tilts = st.floats(0, 14, allow_nan=False)


def test_defaults():
    assert (P.max_gain, P.front_back_ratio, P.sidelobe_atten, P.azimuth_hpbw, P.elevation_hpbw) == \
        (14.0, 20.0, 20.0, 70.0, 65.0)


def test_gain_3d_peak_is_max_gain():
    assert gain_3d(P, 0.0, 7.0, 7.0) == 14.0
    assert gain_3d(P, 0.0, 3.0, Downtilt(1.0, 2.0)) == 14.0


def test_half_power_points():
    # 3 dB down at half the beamwidth
    assert azimuth_gain(P, 35.0) == pytest.approx(14.0 - 3.0)
    assert elevation_gain(P, 7.0 + 32.5, 7.0) == pytest.approx(-3.0)


def test_back_lobe_floor():
    assert azimuth_gain(P, 180.0) == pytest.approx(14.0 - 20.0)
    assert elevation_gain(P, 90.0, 0.0) == pytest.approx(-20.0)


def test_validation():
    with pytest.raises(ValueError):
        SectorPattern(azimuth_hpbw=0)
    with pytest.raises(ValueError):
        SectorPattern(elevation_hpbw=180)
    with pytest.raises(ValueError):
        Downtilt(10.0, 5.0)
    with pytest.raises(ValueError):
        SatelliteBeam(footprint_radius=0)


@given(angles)
def test_azimuth_even(a):
    assert azimuth_gain(P, a) == azimuth_gain(P, -a)


@given(angles, st.floats(-90, 90), tilts)
def test_caps_and_maxima(a, b, t):
    assert P.max_gain - P.front_back_ratio <= azimuth_gain(P, a) <= azimuth_gain(P, 0.0)
    assert -P.sidelobe_atten <= elevation_gain(P, b, t) <= elevation_gain(P, t, t)


@given(st.floats(0, 180), st.floats(0, 180), st.floats(-90, 90), tilts)
def test_gain_3d_non_increasing_in_abs_alpha(a1, a2, b, t):
    lo, hi = sorted((a1, a2))
    assert gain_3d(P, hi, b, t) <= gain_3d(P, lo, b, t)


@given(tilts)
def test_elevation_argmax_at_tilt(t):
    grid = np.linspace(-90, 90, 18001)
    g = elevation_gain(P, grid, t)
    assert elevation_gain(P, t, t) == 0.0
    assert np.all(g[np.abs(grid - t) > 1e-6] < 0.0)


def test_vectorised_shapes():
    a = np.zeros((4, 3))
    assert gain_3d(P, a, 7.0, np.full(3, 7.0)).shape == (4, 3)


def test_satellite_beam_edge_inclusive():
    beam = SatelliteBeam()
    sat = SatelliteGeometry(550e3, GroundPosition(0, 0))
    assert satellite_gain(beam, GroundPosition(500e3, 0), sat) == 40.0
    assert satellite_gain(beam, GroundPosition(500e3 + 1, 0), sat) == NO_COVERAGE
    assert beam_gain(beam, np.array([0.0, 6e5])).tolist() == [40.0, -np.inf]
