"""YAML run configuration: scenario, environment and training sections.

Parsing is strict. Unknown keys, wrong types and invalid values raise
:class:`ConfigError` carrying the file name, line and dotted field path.
"""
from __future__ import annotations

import dataclasses
import math
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .agents.dqn import TrainConfig
from .antenna import Downtilt, SatelliteBeam, SectorPattern
from .channel import RadioConstants
from .env import EnvConfig
from .geometry import GroundPosition, SatelliteGeometry
from .scenario import (DEFAULT_BORESIGHTS, ControlLimits, Gnb, Leo, Scenario, SectorConfig,
                       apply_outage, build_hex_layout, default_leo_nadirs, drop_users,
                       layout_region, make_users, sample_demands)


class ConfigError(ValueError):
    pass


@dataclass
class LayoutSpec:
    rings: int = 2
    isd: float = 500.0
    height: float = 10.0


@dataclass
class SectorSpec:
    tx_power: float = 30.0
    mech_tilt: float = 0.0
    elec_tilt: float = 7.0
    boresight: float = 0.0
    rsrp_threshold: float = -115.0


@dataclass
class GnbSpec:
    x: float = 0.0
    y: float = 0.0
    height: float = 10.0
    sectors: list[SectorSpec] | None = None


@dataclass
class SectorDefaults:
    tx_power: float = 30.0
    tilt: float = 7.0
    mech_tilt: float = 0.0
    rsrp_threshold: float = -115.0


@dataclass
class SatelliteSpec:
    x: float = 0.0
    y: float = 0.0
    altitude: float = 550_000.0
    tx_power: float = 40.0
    gain: float = 40.0
    footprint_radius: float = 500_000.0
    rsrp_threshold: float = -125.0


@dataclass
class UsersSpec:
    count: int = 1000
    height: float = 1.5
    demand_min: float = 0.5
    demand_max: float = 2.0
    region: list[float] | None = None
    positions: list[list[float]] | None = None
    demands: list[float] | None = None


@dataclass
class AssociationSpec:
    capacity_cell: int = 50
    capacity_satellite: int = 200
    min_served: int | None = None
    min_served_fraction: float = 0.6
    penalty_lambda: float = 0.5


@dataclass
class ScenarioSpec:
    seed: int = 0
    layout: LayoutSpec | None = None
    gnbs: list[GnbSpec] | None = None
    outage: list[int] = field(default_factory=list)
    sector: SectorDefaults = field(default_factory=SectorDefaults)
    limits: ControlLimits = field(default_factory=ControlLimits)
    antenna: SectorPattern = field(default_factory=SectorPattern)
    satellites: list[SatelliteSpec] | None = None
    users: UsersSpec = field(default_factory=UsersSpec)
    radio: RadioConstants = field(default_factory=RadioConstants)
    association: AssociationSpec = field(default_factory=AssociationSpec)


@dataclass
class RunConfig:
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    env: EnvConfig = field(default_factory=EnvConfig)
    training: TrainConfig = field(default_factory=TrainConfig)


# --- strict conversion from YAML nodes -------------------------------------------------

def _where(node, source, path):
    line = node.start_mark.line + 1 if node is not None else "?"
    return f"{source}:{line}: {path or '<root>'}"


def _scalar(node, source, path):
    if not isinstance(node, yaml.ScalarNode):
        raise ConfigError(f"{_where(node, source, path)}: expected a scalar value")
    return yaml.safe_load(yaml.serialize(node))


def _convert(tp, node, source, path):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin in (typing.Union, types.UnionType):
        if isinstance(node, yaml.ScalarNode) and node.tag.endswith(":null"):
            if type(None) in args:
                return None
        inner = [a for a in args if a is not type(None)]
        return _convert(inner[0], node, source, path)
    if dataclasses.is_dataclass(tp):
        return _dataclass(tp, node, source, path)
    if origin in (list, tuple):
        if not isinstance(node, yaml.SequenceNode):
            raise ConfigError(f"{_where(node, source, path)}: expected a list")
        item_tp = args[0] if args else typing.Any
        items = [_convert(item_tp, n, source, f"{path}[{i}]") for i, n in enumerate(node.value)]
        return tuple(items) if origin is tuple else items
    value = _scalar(node, source, path)
    if tp is typing.Any:
        return value
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{_where(node, source, path)}: expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{_where(node, source, path)}: expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{_where(node, source, path)}: expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{_where(node, source, path)}: expected a string, got {value!r}")
        return value
    raise ConfigError(f"{_where(node, source, path)}: unsupported field type {tp}")


def _dataclass(cls, node, source, path):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"{_where(node, source, path)}: expected a mapping")
    hints = typing.get_type_hints(cls)
    init_fields = {f.name for f in dataclasses.fields(cls) if f.init}
    kwargs = {}
    for key_node, val_node in node.value:
        key = key_node.value
        sub = f"{path}.{key}" if path else key
        if key not in init_fields:
            raise ConfigError(f"{_where(key_node, source, sub)}: unknown key "
                              f"(allowed: {', '.join(sorted(init_fields))})")
        if key in kwargs:
            raise ConfigError(f"{_where(key_node, source, sub)}: duplicate key")
        kwargs[key] = _convert(hints[key], val_node, source, sub)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{_where(node, source, path)}: {exc}") from exc


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: invalid YAML: {exc}") from exc
    if root is None:
        return RunConfig()
    cfg = _dataclass(RunConfig, root, source, "")
    # validate the world eagerly so errors surface at load time
    try:
        build_scenario(cfg.scenario)
    except ValueError as exc:
        raise ConfigError(f"{source}: scenario: {exc}") from exc
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


# --- ScenarioSpec <-> Scenario ---------------------------------------------------------

def build_scenario(spec: ScenarioSpec) -> Scenario:
    if spec.layout is not None and spec.gnbs is not None:
        raise ValueError("give either 'layout' (generated) or 'gnbs' (explicit), not both")
    sd = spec.sector
    if spec.gnbs is None:
        lay = spec.layout if spec.layout is not None else LayoutSpec()
        sites = build_hex_layout(lay.rings, lay.isd)
        sectors = tuple(SectorConfig(sd.tx_power, Downtilt(sd.mech_tilt, sd.tilt - sd.mech_tilt),
                                     b, sd.rsrp_threshold) for b in DEFAULT_BORESIGHTS)
        gnbs = tuple(Gnb(GroundPosition(float(x), float(y), lay.height), sectors) for x, y in sites)
        pad_isd = lay.isd
    else:
        gnbs = []
        for g in spec.gnbs:
            if g.sectors is None:
                secs = tuple(SectorConfig(sd.tx_power, Downtilt(sd.mech_tilt, sd.tilt - sd.mech_tilt),
                                          b, sd.rsrp_threshold) for b in DEFAULT_BORESIGHTS)
            else:
                secs = tuple(SectorConfig(s.tx_power, Downtilt(s.mech_tilt, s.elec_tilt),
                                          s.boresight, s.rsrp_threshold) for s in g.sectors)
            gnbs.append(Gnb(GroundPosition(g.x, g.y, g.height), secs))
        gnbs = tuple(gnbs)
        sites = np.array([(g.position.x, g.position.y) for g in gnbs]).reshape(-1, 2)
        pad_isd = _nearest_spacing(sites)

    sats = spec.satellites
    if sats is None:
        sats = [SatelliteSpec(x=x, y=y) for x, y in default_leo_nadirs(5)]
    leos = tuple(Leo(SatelliteGeometry(s.altitude, GroundPosition(s.x, s.y)),
                     SatelliteBeam(s.gain, s.footprint_radius), s.tx_power, s.rsrp_threshold)
                 for s in sats)

    us = spec.users
    region = tuple(float(v) for v in us.region) if us.region is not None else (
        layout_region(sites, pad_isd) if len(sites) else (0.0, 0.0, 0.0, 0.0))
    if len(region) != 4:
        raise ValueError("users.region must be [xmin, ymin, xmax, ymax]")
    rng = np.random.default_rng(spec.seed)
    if us.positions is not None:
        xy = np.array(us.positions, dtype=float).reshape(-1, 2)
    else:
        xy = drop_users(us.count, region, rng)
    if us.demands is not None:
        dem = np.array(us.demands, dtype=float)
    else:
        dem = sample_demands(len(xy), us.demand_min, us.demand_max, rng)
    if len(dem) != len(xy):
        raise ValueError("users.positions and users.demands differ in length")

    a = spec.association
    min_served = a.min_served if a.min_served is not None else int(
        math.floor(a.min_served_fraction * len(xy)))
    scn = Scenario(gnbs=gnbs, leos=leos, users=make_users(xy, dem, us.height),
                   active=(True,) * len(gnbs), constants=spec.radio, pattern=spec.antenna,
                   limits=spec.limits, capacity_cell=a.capacity_cell,
                   capacity_satellite=a.capacity_satellite, min_served=min_served,
                   penalty_lambda=a.penalty_lambda, demand_range=(us.demand_min, us.demand_max),
                   user_height=us.height, region=region, rng_seed=spec.seed)
    return apply_outage(scn, spec.outage)


def _nearest_spacing(sites):
    if len(sites) < 2:
        return 500.0
    d = np.hypot(*(sites[:, None, :] - sites[None, :, :]).transpose(2, 0, 1))
    return float(d[d > 0].min())


def scenario_to_spec(scn: Scenario) -> ScenarioSpec:
    """Fully explicit ScenarioSpec (every site, sector and user listed) that rebuilds ``scn``."""
    gnbs = [GnbSpec(x=g.position.x, y=g.position.y, height=g.position.altitude,
                    sectors=[SectorSpec(s.tx_power, s.downtilt.mech, s.downtilt.elec, s.boresight,
                                        s.rsrp_threshold) for s in g.sectors])
            for g in scn.gnbs]
    sats = [SatelliteSpec(l.geometry.nadir.x, l.geometry.nadir.y, l.geometry.altitude, l.tx_power,
                          l.beam.gain, l.beam.footprint_radius, l.rsrp_threshold) for l in scn.leos]
    users = UsersSpec(count=len(scn.users), height=scn.user_height,
                      demand_min=scn.demand_range[0], demand_max=scn.demand_range[1],
                      region=list(scn.region),
                      positions=[[u.position.x, u.position.y] for u in scn.users],
                      demands=[u.demand for u in scn.users])
    return ScenarioSpec(seed=scn.rng_seed, layout=None, gnbs=gnbs,
                        outage=[m for m, a in enumerate(scn.active) if not a],
                        limits=scn.limits, antenna=scn.pattern, satellites=sats, users=users,
                        radio=scn.constants,
                        association=AssociationSpec(scn.capacity_cell, scn.capacity_satellite,
                                                    scn.min_served, 0.6, scn.penalty_lambda))


def _plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.init}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def expand_config(cfg: RunConfig) -> RunConfig:
    """Copy of ``cfg`` with implicit defaults (layout, satellites) written out."""
    sc = cfg.scenario
    layout = sc.layout if sc.layout is not None or sc.gnbs is not None else LayoutSpec()
    sats = sc.satellites
    if sats is None:
        sats = [SatelliteSpec(x=x, y=y) for x, y in default_leo_nadirs(5)]
    return dataclasses.replace(cfg, scenario=dataclasses.replace(sc, layout=layout, satellites=sats))


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(_plain(cfg), sort_keys=False, default_flow_style=None, width=100)


def save_scenario(scn: Scenario, path, env: EnvConfig | None = None,
                  training: TrainConfig | None = None) -> None:
    cfg = RunConfig(scenario_to_spec(scn), env or EnvConfig(), training or TrainConfig())
    Path(path).write_text(dump_config(cfg))


def load_scenario(path) -> Scenario:
    return build_scenario(load_config(path).scenario)
