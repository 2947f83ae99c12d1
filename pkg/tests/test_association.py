import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from istnsim.antenna import gain_3d
from istnsim.association import associate, eligibility, objective_value
from istnsim.channel import fspl_db, rsrp_offset_db
from istnsim.geometry import (azimuth_offset, bearing, distance_3d, elevation_from_ground_arc,
                              slant_range, vertical_angle_to_user)
from istnsim.scenario import apply_outage, hex_scenario, redraw_users
from oracles import exhaustive_objective as exhaustive
from oracles import make_elig, random_instance


def check_constraints(elig, out):
    pi = out.pi
    assert np.all(pi.sum(axis=1) <= 1)                                # one server per user
    assert np.all(pi.sum(axis=0) <= elig.capacity)                    # capacity
    assert np.all(~pi | (elig.kappa & elig.zeta_rate_ok))             # served => both checks pass
    assert not np.any(pi[:, ~elig.server_active])                     # inactive servers unused
    assert np.array_equal(out.per_server_load, pi.sum(axis=0))
    assert out.served_count == int(pi.sum())
    assert out.leo_served_count == int(pi[:, elig.is_leo].sum())
    for u, k in enumerate(out.server_of):
        assert (k >= 0) == pi[u].any() and (k < 0 or pi[u, k])


def test_greedy_spec_example():
    elig = make_elig([[3.0], [2.0]], capacity=[1])
    out = associate(elig)
    assert out.server_of.tolist() == [0, -1]
    assert out.objective == pytest.approx(exhaustive(elig, 0, 0.5))


def test_satellite_only_user():
    elig = make_elig([[1.0, 2.0]], ok=[[False, True]], is_leo=[False, True])
    for m in ("greedy", "optimal"):
        out = associate(elig, method=m)
        assert out.server_of.tolist() == [1] and out.leo_served_count == 1


def test_nobody_eligible():
    elig = make_elig(np.ones((3, 2)), ok=np.zeros((3, 2)))
    for m in ("greedy", "optimal"):
        out = associate(elig, min_served=2, method=m)
        assert out.objective == 0.0 and out.served_count == 0 and not out.feasible


def test_terrestrial_first():
    elig = make_elig([[1.0, 4.0]], is_leo=[False, True])
    assert associate(elig).server_of.tolist() == [0]


def test_objective_value_example():
    elig = make_elig([[2.0, 0.0], [0.0, 1.5]], ok=[[True, False], [False, True]],
                     is_leo=[False, True])
    out = associate(elig, penalty_lambda=0.5)
    assert objective_value(out, 0.5) == pytest.approx(3.0)
    assert objective_value(out, 0.0) == pytest.approx(3.5)
    assert out.objective == pytest.approx(3.0)


@given(st.floats(0, 10), st.floats(0, 10))
def test_objective_monotone_in_lambda(l1, l2):
    with_leo = associate(make_elig([[2.0, 1.5]], ok=[[False, True]], is_leo=[False, True]))
    no_leo = associate(make_elig([[2.0]]))
    lo, hi = sorted((l1, l2))
    if hi - lo > 1e-9:
        assert objective_value(with_leo, hi) < objective_value(with_leo, lo)
    assert objective_value(no_leo, hi) == objective_value(no_leo, lo)


def test_unknown_method():
    with pytest.raises(ValueError):
        associate(make_elig([[1.0]]), method="best")


def test_optimal_matches_exhaustive():
    rng = np.random.default_rng(11)
    for _ in range(300):
        elig = random_instance(rng)
        lam = float(rng.choice([0.0, 0.5, 3.0]))
        pmin = int(rng.integers(0, 4))
        out = associate(elig, pmin, lam, method="optimal")
        check_constraints(elig, out)
        assert out.objective == pytest.approx(exhaustive(elig, pmin, lam), abs=1e-9)


def test_greedy_is_not_always_optimal():
    # user 0 is best everywhere, so greedy gives it cell 0 and user 1 is left out
    elig = make_elig([[5.0, 4.0], [3.0, 0.0]], ok=[[True, True], [True, False]], capacity=[1, 1])
    g = associate(elig, method="greedy")
    o = associate(elig, method="optimal")
    assert g.objective == pytest.approx(5.0)
    assert o.objective == pytest.approx(exhaustive(elig, 0, 0.5)) == pytest.approx(7.0)


def test_constraints_random_instances():
    rng = np.random.default_rng(5)
    for _ in range(300):
        elig = random_instance(rng, max_users=30, max_servers=8, max_cap=5)
        for m in ("greedy", "optimal"):
            check_constraints(elig, associate(elig, int(rng.integers(0, 10)), 0.5, method=m))


def test_constraints_on_scenarios(small_scenario):
    rng = np.random.default_rng(2)
    for i in range(5):
        scn = apply_outage(redraw_users(small_scenario, rng), rng.choice(7, size=i, replace=False))
        scn = dataclasses.replace(scn, capacity_cell=3, capacity_satellite=4)
        p = rng.uniform(0, 37, (7, 3))
        t = rng.uniform(0, 14, (7, 3))
        elig = eligibility(scn, p, t)
        off = np.repeat(~np.asarray(scn.active), 3)
        assert not elig.kappa[:, :21][:, off].any()
        check_constraints(elig, associate(elig, scn.min_served, scn.penalty_lambda))


def _pair_oracle(scn, u, m, i, power, tilt):
    g = scn.gnbs[m]
    user = scn.users[u].position
    alpha = azimuth_offset(g.sectors[i].boresight, bearing(g.position, user))
    beta = vertical_angle_to_user(g.position, user)
    gain = gain_3d(scn.pattern, alpha, beta, tilt)
    return power - 35.0 * math.log10(distance_3d(g.position, user)) + gain


def test_link_budget_matches_scalar_oracle(small_scenario):
    scn = small_scenario
    rng = np.random.default_rng(0)
    p = rng.uniform(0, 37, (7, 3))
    t = rng.uniform(0, 14, (7, 3))
    elig = eligibility(scn, p, t)
    rep = elig.report
    off = rsrp_offset_db(100)
    for u in range(0, 60, 7):
        for m in range(1, 7):
            for i in range(3):
                k = 3 * m + i
                expect = _pair_oracle(scn, u, m, i, p[m, i], t[m, i])
                assert rep.rssi[u, k] == pytest.approx(expect, abs=1e-9)   # signal-only RSSI
                assert rep.rsrp[u, k] == pytest.approx(expect - off, abs=1e-9)
        # the switched-off centre site radiates nothing
        assert np.all(np.isneginf(rep.rssi[u, :3])) and not elig.kappa[u, :3].any()
        # satellite link: 40 dBm + 40 dBi - FSPL(slant range)
        arc = math.hypot(*scn.user_xy[u])
        d = slant_range(550e3, elevation_from_ground_arc(arc, 550e3))
        assert rep.rssi[u, 21] == pytest.approx(40 + 40 - fspl_db(24.25, d), abs=1e-9)


def test_rsrp_threshold_inclusive(small_scenario):
    p, t = small_scenario.initial_controls()
    rsrp = eligibility(small_scenario, p, t).report.rsrp
    u, k = 0, int(np.argmax(np.where(np.isfinite(rsrp[0, :21]), rsrp[0, :21], -np.inf)))
    m, i = divmod(k, 3)
    sectors = list(small_scenario.gnbs[m].sectors)
    sectors[i] = dataclasses.replace(sectors[i], rsrp_threshold=float(rsrp[u, k]))
    gnbs = list(small_scenario.gnbs)
    gnbs[m] = dataclasses.replace(gnbs[m], sectors=tuple(sectors))
    scn = dataclasses.replace(small_scenario, gnbs=tuple(gnbs))
    assert eligibility(scn, p, t).kappa[u, k]


def test_beyond_footprint_not_eligible():
    scn = hex_scenario(rings=0, isd=500, n_users=4, n_leos=1)
    far = scn.with_users(tuple(dataclasses.replace(u, position=dataclasses.replace(
        u.position, x=600e3)) for u in scn.users))
    elig = eligibility(far, *far.initial_controls())
    assert not elig.kappa[:, 3].any() and not elig.zeta_rate_ok[:, 3].any()


def test_total_mode_rsrp_above_signal_mode(small_scenario):
    p, t = small_scenario.initial_controls()
    sig = eligibility(small_scenario, p, t).report
    tot_scn = dataclasses.replace(small_scenario, constants=dataclasses.replace(
        small_scenario.constants, rssi_mode="total"))
    tot = eligibility(tot_scn, p, t).report
    fin = np.isfinite(sig.rsrp)
    assert np.all(tot.rsrp[fin] > sig.rsrp[fin])
    assert tot.rssi_mode == "total" and sig.rssi_mode == "signal"
    assert np.all(tot.rsrp[fin] <= tot.rssi[fin])
    assert np.all(tot.sinr_linear >= 0) and np.all(tot.rate_approx >= 0)
