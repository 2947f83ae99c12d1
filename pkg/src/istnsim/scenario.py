"""The simulated world: gNB sites, LEO satellites, users and their demands.

A :class:`Scenario` is immutable. Helpers here build hexagonal layouts, drop
users, draw traffic demands and switch sites off.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .antenna import Downtilt, SatelliteBeam, SectorPattern
from .channel import RadioConstants
from .geometry import GroundPosition, SatelliteGeometry

SECTORS_PER_SITE = 3
DEFAULT_BORESIGHTS = (0.0, 120.0, -120.0)


@dataclass(frozen=True)
class ControlLimits:
    power_min: float = 0.0
    power_max: float = 37.0
    tilt_min: float = 0.0
    tilt_max: float = 14.0

    def __post_init__(self):
        if not (self.power_min <= self.power_max and self.tilt_min <= self.tilt_max):
            raise ValueError("control limits must satisfy min <= max")


@dataclass(frozen=True)
class SectorConfig:
    tx_power: float = 30.0
    downtilt: Downtilt = Downtilt(0.0, 7.0)
    boresight: float = 0.0
    rsrp_threshold: float = -115.0


@dataclass(frozen=True)
class Gnb:
    position: GroundPosition
    sectors: tuple[SectorConfig, ...]

    def __post_init__(self):
        if len(self.sectors) != SECTORS_PER_SITE:
            raise ValueError(f"a gNB has exactly {SECTORS_PER_SITE} sectors")


@dataclass(frozen=True)
class Leo:
    geometry: SatelliteGeometry
    beam: SatelliteBeam = SatelliteBeam()
    tx_power: float = 40.0
    rsrp_threshold: float = -125.0


@dataclass(frozen=True)
class User:
    position: GroundPosition
    demand: float


@dataclass(frozen=True)
class Scenario:
    gnbs: tuple[Gnb, ...]
    leos: tuple[Leo, ...]
    users: tuple[User, ...]
    active: tuple[bool, ...]
    constants: RadioConstants = RadioConstants()
    pattern: SectorPattern = SectorPattern()
    limits: ControlLimits = ControlLimits()
    capacity_cell: int = 50
    capacity_satellite: int = 200
    min_served: int = 0
    penalty_lambda: float = 0.5
    demand_range: tuple[float, float] = (0.5, 2.0)
    user_height: float = 1.5
    region: tuple[float, float, float, float] = (-750.0, -750.0, 750.0, 750.0)
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.active) != len(self.gnbs):
            raise ValueError("outage mask length must equal the number of gNBs")
        lo, hi = self.demand_range
        if not 0 <= lo <= hi:
            raise ValueError("demand range must satisfy 0 <= min <= max")
        for u in self.users:
            if not lo <= u.demand <= hi:
                raise ValueError(f"user demand {u.demand} outside [{lo}, {hi}]")
        total_cap = (SECTORS_PER_SITE * len(self.gnbs) * self.capacity_cell
                     + len(self.leos) * self.capacity_satellite)
        if not 0 <= self.min_served <= total_cap:
            raise ValueError("min_served must lie within [0, total capacity]")
        lim = self.limits
        for g in self.gnbs:
            for s in g.sectors:
                if not lim.power_min <= s.tx_power <= lim.power_max:
                    raise ValueError(f"sector power {s.tx_power} outside limits")
                if not lim.tilt_min <= s.downtilt.total <= lim.tilt_max:
                    raise ValueError(f"sector tilt {s.downtilt.total} outside limits")

    # array views used by the vectorised link budget
    @cached_property
    def gnb_xy(self) -> np.ndarray:
        return np.array([(g.position.x, g.position.y) for g in self.gnbs], dtype=float).reshape(-1, 2)

    @cached_property
    def gnb_height(self) -> np.ndarray:
        return np.array([g.position.altitude for g in self.gnbs], dtype=float)

    @cached_property
    def boresights(self) -> np.ndarray:
        return np.array([[s.boresight for s in g.sectors] for g in self.gnbs],
                        dtype=float).reshape(-1, SECTORS_PER_SITE)

    @cached_property
    def sector_thresholds(self) -> np.ndarray:
        return np.array([[s.rsrp_threshold for s in g.sectors] for g in self.gnbs],
                        dtype=float).reshape(-1, SECTORS_PER_SITE)

    @cached_property
    def mech_tilt(self) -> np.ndarray:
        return np.array([[s.downtilt.mech for s in g.sectors] for g in self.gnbs],
                        dtype=float).reshape(-1, SECTORS_PER_SITE)

    @cached_property
    def user_xy(self) -> np.ndarray:
        return np.array([(u.position.x, u.position.y) for u in self.users], dtype=float).reshape(-1, 2)

    @cached_property
    def user_heights(self) -> np.ndarray:
        return np.array([u.position.altitude for u in self.users], dtype=float)

    @cached_property
    def demands(self) -> np.ndarray:
        return np.array([u.demand for u in self.users], dtype=float)

    @property
    def active_ids(self) -> list[int]:
        return [m for m, a in enumerate(self.active) if a]

    def initial_controls(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-sector (power, total tilt) arrays of shape (M, 3) from the sector configs."""
        power = np.array([[s.tx_power for s in g.sectors] for g in self.gnbs], dtype=float)
        tilt = np.array([[s.downtilt.total for s in g.sectors] for g in self.gnbs], dtype=float)
        return power.reshape(-1, SECTORS_PER_SITE), tilt.reshape(-1, SECTORS_PER_SITE)

    def with_users(self, users: Sequence[User]) -> "Scenario":
        return dataclasses.replace(self, users=tuple(users))


def build_hex_layout(rings: int, isd: float) -> np.ndarray:
    """Site coordinates (N, 2): center first, then each ring counter-clockwise from east."""
    if rings < 0 or not isd > 0:
        raise ValueError("rings must be >= 0 and isd > 0")
    pts = [(0.0, 0.0)]
    for k in range(1, rings + 1):
        for side in range(6):
            a = math.radians(60.0 * side)
            step = math.radians(60.0 * side + 120.0)
            cx, cy = k * isd * math.cos(a), k * isd * math.sin(a)
            for t in range(k):
                pts.append((cx + t * isd * math.cos(step), cy + t * isd * math.sin(step)))
    return np.array(pts)


def layout_region(sites: np.ndarray, isd: float) -> tuple[float, float, float, float]:
    """Bounding box of the sites, padded by half an inter-site distance."""
    pad = isd / 2.0
    lo = sites.min(axis=0) - pad
    hi = sites.max(axis=0) + pad
    return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def drop_users(count: int, region, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. uniform (x, y) positions inside ``region`` = (xmin, ymin, xmax, ymax)."""
    if count < 0:
        raise ValueError("count must be >= 0")
    xmin, ymin, xmax, ymax = region
    return np.column_stack([rng.uniform(xmin, xmax, count), rng.uniform(ymin, ymax, count)])


def sample_demands(count: int, r_min: float, r_max: float, rng: np.random.Generator) -> np.ndarray:
    if not 0 <= r_min <= r_max:
        raise ValueError("demand bounds must satisfy 0 <= r_min <= r_max")
    return rng.uniform(r_min, r_max, count)


def make_users(xy: np.ndarray, demands: np.ndarray, height: float) -> tuple[User, ...]:
    return tuple(User(GroundPosition(float(x), float(y), height), float(d))
                 for (x, y), d in zip(xy, demands))


def redraw_users(scenario: Scenario, rng: np.random.Generator) -> Scenario:
    """Fresh user drop and demands with the same count, region and demand range."""
    n = len(scenario.users)
    xy = drop_users(n, scenario.region, rng)
    dem = sample_demands(n, *scenario.demand_range, rng)
    return scenario.with_users(make_users(xy, dem, scenario.user_height))


def apply_outage(scenario: Scenario, gnb_ids) -> Scenario:
    """Switch the listed gNBs off; already-failed sites stay off."""
    ids = set(int(i) for i in gnb_ids)
    bad = [i for i in ids if not 0 <= i < len(scenario.gnbs)]
    if bad:
        raise ValueError(f"unknown gNB id(s): {sorted(bad)}")
    active = tuple(a and m not in ids for m, a in enumerate(scenario.active))
    return dataclasses.replace(scenario, active=active)


def default_sectors(power=30.0, tilt=7.0, mech_tilt=0.0, rsrp_threshold=-115.0,
                    boresights=DEFAULT_BORESIGHTS) -> tuple[SectorConfig, ...]:
    return tuple(SectorConfig(power, Downtilt(mech_tilt, tilt - mech_tilt), b, rsrp_threshold)
                 for b in boresights)


def default_leo_nadirs(count: int, spread: float = 200_000.0) -> list[tuple[float, float]]:
    """First nadir over the origin, the rest evenly spaced on a circle of radius ``spread``."""
    out = [(0.0, 0.0)]
    for k in range(1, count):
        a = 2 * math.pi * (k - 1) / max(count - 1, 1)
        out.append((spread * math.cos(a), spread * math.sin(a)))
    return out[:count]


def hex_scenario(rings: int = 2, isd: float = 500.0, n_users: int = 1000, n_leos: int = 5,
                 outage=(), seed: int = 0, gnb_height: float = 10.0, user_height: float = 1.5,
                 demand_range=(0.5, 2.0), min_served_fraction: float = 0.6,
                 sector: SectorConfig | None = None, **kwargs) -> Scenario:
    """Convenience builder for the standard hexagonal deployment."""
    sites = build_hex_layout(rings, isd)
    region = layout_region(sites, isd)
    rng = np.random.default_rng(seed)
    xy = drop_users(n_users, region, rng)
    dem = sample_demands(n_users, *demand_range, rng)
    sec = default_sectors() if sector is None else tuple(
        dataclasses.replace(sector, boresight=b) for b in DEFAULT_BORESIGHTS)
    gnbs = tuple(Gnb(GroundPosition(float(x), float(y), gnb_height), sec) for x, y in sites)
    leos = tuple(Leo(SatelliteGeometry(550_000.0, GroundPosition(x, y)))
                 for x, y in default_leo_nadirs(n_leos))
    scn = Scenario(gnbs=gnbs, leos=leos, users=make_users(xy, dem, user_height),
                   active=(True,) * len(gnbs), demand_range=tuple(demand_range),
                   user_height=user_height, region=region, rng_seed=seed,
                   min_served=int(math.floor(min_served_fraction * n_users)), **kwargs)
    return apply_outage(scn, outage)
