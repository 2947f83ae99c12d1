"""3GPP sector antenna pattern and a flat-top satellite beam.

Gains are in dB. The sector pattern is the sum of an azimuth cut (capped by
the front-to-back ratio) and an elevation cut around the downtilt (capped by
the side-lobe attenuation). No extra floor is applied to the sum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import GroundPosition, SatelliteGeometry, distance_2d

NO_COVERAGE = -np.inf


@dataclass(frozen=True)
class SectorPattern:
    max_gain: float = 14.0
    front_back_ratio: float = 20.0
    sidelobe_atten: float = 20.0
    azimuth_hpbw: float = 70.0
    elevation_hpbw: float = 65.0

    def __post_init__(self):
        for name in ("max_gain", "front_back_ratio", "sidelobe_atten"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("azimuth_hpbw", "elevation_hpbw"):
            if not 0 < getattr(self, name) < 180:
                raise ValueError(f"{name} must lie in (0, 180) degrees")


@dataclass(frozen=True)
class Downtilt:
    mech: float = 0.0
    elec: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.mech + self.elec <= 14.0:
            raise ValueError(f"total downtilt must lie in [0, 14] degrees, got {self.mech + self.elec}")

    @property
    def total(self) -> float:
        return self.mech + self.elec


@dataclass(frozen=True)
class SatelliteBeam:
    gain: float = 40.0
    footprint_radius: float = 500_000.0

    def __post_init__(self):
        if not np.isfinite(self.gain):
            raise ValueError("satellite gain must be finite")
        if not self.footprint_radius > 0:
            raise ValueError("footprint radius must be positive")


def _tilt_deg(tilt):
    return tilt.total if isinstance(tilt, Downtilt) else tilt


def azimuth_gain(p: SectorPattern, alpha):
    g = p.max_gain - np.minimum(12.0 * (np.asarray(alpha, dtype=float) / p.azimuth_hpbw) ** 2,
                                p.front_back_ratio)
    return float(g) if g.ndim == 0 else g


def elevation_gain(p: SectorPattern, beta, tilt):
    """Elevation cut relative to the total downtilt. ``tilt`` is a Downtilt or degrees."""
    off = np.asarray(beta, dtype=float) - np.asarray(_tilt_deg(tilt), dtype=float)
    g = -np.minimum(12.0 * (off / p.elevation_hpbw) ** 2, p.sidelobe_atten)
    return float(g) if g.ndim == 0 else g


def gain_3d(p: SectorPattern, alpha, beta, tilt):
    return azimuth_gain(p, alpha) + elevation_gain(p, beta, tilt)


def satellite_gain(beam: SatelliteBeam, user: GroundPosition, sat: SatelliteGeometry) -> float:
    """Boresight gain inside the footprint (edge inclusive), ``NO_COVERAGE`` outside."""
    return beam_gain(beam, distance_2d(user, sat.nadir))


def beam_gain(beam: SatelliteBeam, ground_dist):
    d = np.asarray(ground_dist, dtype=float)
    g = np.where(d <= beam.footprint_radius, beam.gain, NO_COVERAGE)
    return float(g) if g.ndim == 0 else g
