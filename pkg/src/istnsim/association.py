"""Link budgets for every (user, server) pair, eligibility flags and user association.

Servers are indexed sector-major: server ``3*m + i`` is sector ``i`` of gNB
``m``; the satellites follow, so server ``3*M + s`` is LEO ``s``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import channel
from .antenna import beam_gain, gain_3d
from .channel import LinkBudgetReport, dbm_to_mw, mw_to_dbm
from .geometry import azimuth_offset, elevation_from_ground_arc, slant_range, vertical_angle
from .scenario import SECTORS_PER_SITE, Scenario


@dataclass(frozen=True)
class Eligibility:
    report: LinkBudgetReport
    kappa: np.ndarray          # (U, K) RSRP at or above the server threshold
    zeta_rate_ok: np.ndarray   # (U, K) approximate rate meets the user demand
    is_leo: np.ndarray         # (K,)
    server_active: np.ndarray  # (K,)
    capacity: np.ndarray       # (K,)
    demands: np.ndarray        # (U,)

    @property
    def rates(self) -> np.ndarray:
        return self.report.rate_approx

    @property
    def best_rsrp(self) -> np.ndarray:
        """Strongest RSRP per user over every server, dBm."""
        if self.report.rsrp.shape[1] == 0:
            return np.full(self.report.rsrp.shape[0], -np.inf)
        return self.report.rsrp.max(axis=1)


@dataclass(frozen=True)
class AssociationOutcome:
    kappa: np.ndarray
    zeta_rate_ok: np.ndarray
    pi: np.ndarray             # (U, K) served indicator
    server_of: np.ndarray      # (U,) server index, -1 when unserved
    per_server_load: np.ndarray
    served_rate: np.ndarray    # (U,) approximate rate of the serving link, 0 when unserved
    is_leo: np.ndarray
    objective: float
    served_count: int
    leo_served_count: int
    feasible: bool             # at least min_served users served


def _pair_budget(rx_mw, interf_mw, covered, constants):
    """Shared tail of the TN and LEO link budgets (fading-free)."""
    noise = constants.noise_mw
    phi = constants.residual_interference
    nu = phi * interf_mw + noise
    sinr = rx_mw / nu
    if constants.rssi_mode == "total":
        rssi_mw = rx_mw + phi * interf_mw + noise
    else:
        rssi_mw = rx_mw
    rssi = np.where(covered, mw_to_dbm(rssi_mw), -np.inf)
    rsrp = rssi - channel.rsrp_offset_db(constants.num_resource_blocks)
    r_exact = np.log2(1.0 + sinr)
    r_approx = np.log2(1.0 + math.exp(-constants.euler_constant) * rx_mw / nu)
    return rssi, rsrp, sinr, r_exact, r_approx


def _interference(rx_mw, tx_mw, model):
    """Per-pair interferer power: everything from the other servers of the same tier."""
    if model == "received":
        total = rx_mw.sum(axis=1, keepdims=True)
        return np.maximum(total - rx_mw, 0.0)
    total = tx_mw.sum()
    return np.broadcast_to(np.maximum(total - tx_mw, 0.0), rx_mw.shape)


def terrestrial_budget(scn: Scenario, power: np.ndarray, tilt: np.ndarray):
    """Fading-free budget from every sector to every user, arrays of shape (U, 3M)."""
    c = scn.constants
    uxy, uh = scn.user_xy, scn.user_heights
    n_u, n_m = len(uxy), len(scn.gnbs)
    active = np.repeat(np.asarray(scn.active, dtype=bool), SECTORS_PER_SITE)
    if n_m == 0:
        empty = np.zeros((n_u, 0))
        return dict(tx=np.zeros(0), path_gain=empty, gain=empty, rx_dbm=empty, active=active)
    dx = uxy[:, None, 0] - scn.gnb_xy[None, :, 0]
    dy = uxy[:, None, 1] - scn.gnb_xy[None, :, 1]
    d2d = np.hypot(dx, dy)
    dh = scn.gnb_height[None, :] - uh[:, None]
    d3d = np.sqrt(d2d**2 + dh**2)
    bearing = np.degrees(np.arctan2(dy, dx))
    alpha = azimuth_offset(scn.boresights[None], bearing[..., None])
    beta = vertical_angle(dh, d2d)
    gain = gain_3d(scn.pattern, alpha, beta[..., None], tilt[None])
    path_gain = np.broadcast_to(-10.0 * c.pathloss_exponent * np.log10(d3d)[..., None], gain.shape)
    rx = power[None] + path_gain + gain + c.user_gain_dbi
    shape = (n_u, n_m * SECTORS_PER_SITE)
    tx = np.where(active, power.reshape(-1), -np.inf)
    rx = np.where(active[None, :], rx.reshape(shape), -np.inf)
    return dict(tx=tx, path_gain=path_gain.reshape(shape), gain=gain.reshape(shape),
                rx_dbm=rx, active=active)


def satellite_budget(scn: Scenario):
    c = scn.constants
    uxy = scn.user_xy
    n_u, n_s = len(uxy), len(scn.leos)
    if n_s == 0:
        empty = np.zeros((n_u, 0))
        return dict(tx=np.zeros(0), path_gain=empty, gain=empty, rx_dbm=empty)
    nadir = np.array([(l.geometry.nadir.x, l.geometry.nadir.y) for l in scn.leos])
    alt = np.array([l.geometry.altitude for l in scn.leos])
    arc = np.hypot(uxy[:, None, 0] - nadir[None, :, 0], uxy[:, None, 1] - nadir[None, :, 1])
    elev = elevation_from_ground_arc(arc, alt[None, :])
    visible = elev >= 0
    d = slant_range(alt[None, :], np.clip(elev, 0.0, 90.0))
    path_gain = -channel.fspl_db(c.carrier_freq_ntn, d)
    gain = np.stack([beam_gain(l.beam, arc[:, s]) for s, l in enumerate(scn.leos)], axis=1)
    gain = np.where(visible, gain, -np.inf)
    tx = np.array([l.tx_power for l in scn.leos])
    rx = tx[None, :] + path_gain + gain + c.user_gain_dbi
    return dict(tx=tx, path_gain=path_gain, gain=gain, rx_dbm=rx)


def eligibility(scn: Scenario, power: np.ndarray, tilt: np.ndarray) -> Eligibility:
    """Full link budget plus RSRP (kappa) and rate (zeta) pass flags.

    Parameters
    ----------
    scn : Scenario
    power, tilt : ndarray, shape (M, 3)
        Sector transmit powers (dBm) and total downtilts (degrees).
    """
    c = scn.constants
    tn = terrestrial_budget(scn, np.asarray(power, float), np.asarray(tilt, float))
    sat = satellite_budget(scn)
    parts = []
    for b in (tn, sat):
        rx_mw = dbm_to_mw(b["rx_dbm"])
        tx_mw = dbm_to_mw(b["tx"])
        interf = _interference(rx_mw, tx_mw, c.interference_model)
        covered = np.isfinite(b["rx_dbm"])
        parts.append((b, rx_mw, interf, covered) + _pair_budget(rx_mw, interf, covered, c))

    def cat(i):
        return np.concatenate([p[i] for p in parts], axis=1)

    n_u = len(scn.users)
    k_tn, k_s = tn["rx_dbm"].shape[1], sat["rx_dbm"].shape[1]
    report = LinkBudgetReport(
        tx_power=np.concatenate([tn["tx"], sat["tx"]]),
        path_gain=np.concatenate([tn["path_gain"], sat["path_gain"]], axis=1),
        tx_gain=np.concatenate([tn["gain"], sat["gain"]], axis=1),
        rx_gain=c.user_gain_dbi,
        fading_power=np.ones((n_u, k_tn + k_s)),
        rssi=cat(4), rsrp=cat(5), sinr_linear=cat(6), rate_exact=cat(7), rate_approx=cat(8),
        rssi_mode=c.rssi_mode,
    )
    covered = cat(3)
    thresholds = np.concatenate([scn.sector_thresholds.reshape(-1),
                                 [l.rsrp_threshold for l in scn.leos]])
    kappa = covered & (report.rsrp >= thresholds[None, :])
    demands = scn.demands
    zeta = covered & (report.rate_approx >= demands[:, None])
    is_leo = np.r_[np.zeros(k_tn, bool), np.ones(k_s, bool)]
    capacity = np.r_[np.full(k_tn, scn.capacity_cell), np.full(k_s, scn.capacity_satellite)]
    server_active = np.r_[tn["active"], np.ones(k_s, bool)]
    return Eligibility(report, kappa, zeta, is_leo, server_active, capacity.astype(int), demands)


def pair_weights(elig: Eligibility, penalty_lambda: float) -> np.ndarray:
    """Objective contribution of serving each user through each server."""
    return elig.rates - penalty_lambda * elig.is_leo[None, :]


def _outcome(elig: Eligibility, server_of: np.ndarray, penalty_lambda: float,
             min_served: int) -> AssociationOutcome:
    n_u, n_k = elig.kappa.shape
    pi = np.zeros((n_u, n_k), dtype=bool)
    served = server_of >= 0
    pi[np.nonzero(served)[0], server_of[served]] = True
    load = pi.sum(axis=0)
    served_rate = np.where(served, elig.rates[np.arange(n_u), np.maximum(server_of, 0)], 0.0)
    leo_count = int(pi[:, elig.is_leo].sum())
    return AssociationOutcome(
        kappa=elig.kappa, zeta_rate_ok=elig.zeta_rate_ok, pi=pi, server_of=server_of,
        per_server_load=load, served_rate=served_rate, is_leo=elig.is_leo,
        objective=float(served_rate.sum()) - penalty_lambda * leo_count,
        served_count=int(served.sum()), leo_served_count=leo_count,
        feasible=bool(served.sum() >= min_served))


def objective_value(outcome: AssociationOutcome, penalty_lambda: float) -> float:
    """Served throughput minus ``penalty_lambda`` per satellite-served user."""
    return float(outcome.served_rate.sum()) - penalty_lambda * outcome.leo_served_count


def associate(elig: Eligibility, min_served: int = 0, penalty_lambda: float = 0.5,
              method: str = "greedy") -> AssociationOutcome:
    """Assign each user to at most one eligible server under per-server capacities.

    ``method="greedy"`` visits users by best achievable rate (descending, ties
    by index) and gives each the best terrestrial server with room, else the
    best satellite, else nothing. ``method="optimal"`` instead maximises the
    penalised throughput exactly, serving at least ``min_served`` users
    whenever that is achievable. Either way, serving fewer than ``min_served``
    users is flagged through ``feasible`` rather than raised.
    """
    if method == "optimal":
        server_of = _optimal_assignment(elig, min_served, penalty_lambda)
    elif method == "greedy":
        server_of = _greedy_assignment(elig)
    else:
        raise ValueError(f"unknown association method {method!r}")
    return _outcome(elig, server_of, penalty_lambda, min_served)


def _optimal_assignment(elig, min_served, penalty_lambda):
    ok = elig.kappa & elig.zeta_rate_ok & elig.server_active[None, :]
    n_u = ok.shape[0]
    server_of = np.full(n_u, -1, dtype=int)
    cand = np.nonzero(ok.any(axis=1))[0]
    if len(cand) == 0:
        return server_of
    sub = ok[cand]
    w = pair_weights(elig, penalty_lambda)[cand]
    # one column per usable capacity slot; capacity beyond the eligible count is never used
    slots = np.repeat(np.arange(ok.shape[1]), np.minimum(elig.capacity, sub.sum(axis=0)))
    body = np.where(sub[:, slots], w[:, slots], -np.inf)
    n_c = len(cand)
    need = min_served
    for n_dummy in (n_c - need, n_c):
        if n_dummy < 0:
            continue
        mat = np.concatenate([body, np.zeros((n_c, n_dummy))], axis=1)
        try:
            rows, cols = linear_sum_assignment(mat, maximize=True)
        except ValueError:
            continue
        if len(rows) < n_c:
            continue
        for r, col in zip(rows, cols):
            if col < len(slots):
                server_of[cand[r]] = slots[col]
        return server_of
    return server_of


def _greedy_assignment(elig):
    ok = elig.kappa & elig.zeta_rate_ok & elig.server_active[None, :]
    rates = np.where(ok, elig.rates, -np.inf)
    n_u = ok.shape[0]
    best = rates.max(axis=1) if rates.shape[1] else np.full(n_u, -np.inf)
    order = sorted(range(n_u), key=lambda u: (-best[u], u))
    remaining = elig.capacity.copy()
    server_of = np.full(n_u, -1, dtype=int)
    for u in order:
        if not np.isfinite(best[u]):
            continue
        for tier in (~elig.is_leo, elig.is_leo):
            r = np.where(tier & (remaining > 0), rates[u], -np.inf)
            if r.size and np.isfinite(r.max()):
                k = int(np.argmax(r))
                server_of[u] = k
                remaining[k] -= 1
                break
    return server_of
