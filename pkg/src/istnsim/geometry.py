"""Positions, distances and angles for terrestrial and satellite links.

Terrestrial links live on a flat ground plane. Satellite links account for
Earth curvature through the elevation angle. Angles cross module boundaries
in degrees; radians are only used internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_M = 6_378_000.0


class BelowHorizonError(ValueError):
    """Raised when a satellite is not visible from a ground position."""


@dataclass(frozen=True)
class GroundPosition:
    x: float
    y: float
    altitude: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.altitude)):
            raise ValueError(f"non-finite coordinate in {self!r}")
        if self.altitude < 0:
            raise ValueError(f"altitude must be >= 0, got {self.altitude}")


@dataclass(frozen=True)
class SatelliteGeometry:
    altitude: float
    nadir: GroundPosition
    earth_radius: float = EARTH_RADIUS_M

    def __post_init__(self):
        if not self.altitude > 0:
            raise ValueError(f"satellite altitude must be > 0, got {self.altitude}")
        if self.earth_radius != EARTH_RADIUS_M:
            raise ValueError("earth radius is fixed at 6 378 000 m")


def distance_2d(a: GroundPosition, b: GroundPosition) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def distance_3d(gnb: GroundPosition, user: GroundPosition) -> float:
    return math.sqrt((gnb.altitude - user.altitude) ** 2 + distance_2d(gnb, user) ** 2)


def slant_range(altitude, elevation_deg, earth_radius=EARTH_RADIUS_M):
    """User-to-satellite distance in meters for a given elevation angle.

    Works elementwise on arrays. Elevation must lie in [0, 90] degrees.
    """
    elev = np.asarray(elevation_deg, dtype=float)
    if np.any(elev < 0) or np.any(elev > 90) or np.any(np.isnan(elev)):
        raise ValueError(f"elevation must be within [0, 90] degrees, got {elevation_deg}")
    s = np.sin(np.radians(elev))
    rs = earth_radius * s
    d = np.sqrt(rs**2 + altitude**2 + 2.0 * altitude * earth_radius) - rs
    return float(d) if d.ndim == 0 else d


def elevation_from_ground_arc(arc_m, altitude, earth_radius=EARTH_RADIUS_M):
    """Elevation angle (degrees) seen at ground distance ``arc_m`` from the nadir.

    Elementwise; may return negative values for points beyond the horizon.
    """
    gamma = np.asarray(arc_m, dtype=float) / earth_radius
    ratio = earth_radius / (earth_radius + altitude)
    # arctan2 keeps the nadir limit (gamma -> 0) at exactly 90 degrees
    elev = np.degrees(np.arctan2(np.cos(gamma) - ratio, np.sin(gamma)))
    return float(elev) if elev.ndim == 0 else elev


def satellite_elevation(user: GroundPosition, sat: SatelliteGeometry) -> float:
    """Elevation of ``sat`` seen from ``user``, from the central angle to the nadir point.

    The planar ground distance to the nadir point is taken as the arc length.

    Raises
    ------
    BelowHorizonError
        If the satellite sits below the local horizon.
    """
    arc = distance_2d(user, sat.nadir)
    elev = elevation_from_ground_arc(arc, sat.altitude, sat.earth_radius)
    if elev < 0:
        raise BelowHorizonError(f"satellite below horizon (elevation {elev:.3f} deg)")
    return elev


def vertical_angle(height_diff, d2d):
    """Downward-looking angle in degrees; 90 when the user is directly beneath the mast."""
    height_diff = np.asarray(height_diff, dtype=float)
    d2d = np.asarray(d2d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ang = np.degrees(np.arctan(height_diff / d2d))
    ang = np.where(d2d > 0, ang, 90.0)
    return float(ang) if ang.ndim == 0 else ang


def vertical_angle_to_user(gnb: GroundPosition, user: GroundPosition) -> float:
    return vertical_angle(gnb.altitude - user.altitude, distance_2d(gnb, user))


def wrap_angle(deg):
    """Wrap degrees into (-180, 180]."""
    w = 180.0 - np.mod(180.0 - np.asarray(deg, dtype=float), 360.0)
    return float(w) if w.ndim == 0 else w


def azimuth_offset(boresight_deg, bearing_deg):
    """Horizontal offset of a user bearing from a sector boresight, in (-180, 180]."""
    return wrap_angle(np.asarray(bearing_deg, dtype=float) - np.asarray(boresight_deg, dtype=float))


def bearing(origin: GroundPosition, target: GroundPosition) -> float:
    """Bearing from the x-axis, degrees."""
    return math.degrees(math.atan2(target.y - origin.y, target.x - origin.x))
