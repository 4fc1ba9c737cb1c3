import math
from dataclasses import replace

import numpy as np
import pytest

from pelagic.channel import ergodic_rate, noise_power, path_loss
from pelagic.planner.baselines import baseline_shore, baseline_terrestrial, shore_rates, terrestrial_repair
from pelagic.planner.model import ConstraintSet
from pelagic.planner.trajectory import plan_trajectory
from pelagic.scenario.model import Scenario, VesselTrack, flagship

from _plans import audit_plan, flagship_plan
from test_planner import short_scenario


def test_shore_worst_slot_is_farthest():
    sc = flagship()
    res = shore_rates(sc)
    d = np.linalg.norm(sc.vessel_track.positions(sc.slot_mid_times())[:, :2], axis=1)
    assert np.argmin(res.rates) == np.argmax(d)
    assert baseline_shore(sc) == res.rates.min()


def test_shore_snr_by_hand():
    sc = flagship()
    link = sc.links["direct"]
    v = sc.vessel_track.positions(sc.slot_mid_times()[:1])[0]
    tbs = np.asarray(sc.tbs_position)
    d = float(np.linalg.norm(v - tbs))
    horizon = 4120.0 * (math.sqrt(tbs[2]) + math.sqrt(v[2]))
    ground = float(np.hypot(*(v[:2] - tbs[:2])))
    excess = 2.0 * max(0.0, ground - horizon) / 1000.0
    snr = sc.tbs_power_dbm + link.gains_db - float(path_loss(d, link)) - excess - float(noise_power(link))
    assert shore_rates(sc).snr_db[0] == pytest.approx(snr, abs=1e-9)


def test_horizon_costs_twenty_db_per_ten_km():
    near = Scenario(vessel_track=VesselTrack.straight((6.0e4, 0, 10.0), (6.001e4, 0, 10.0), 1.0))
    far = Scenario(vessel_track=VesselTrack.straight((7.0e4, 0, 10.0), (7.001e4, 0, 10.0), 1.0))
    gap = shore_rates(near).snr_db[0] - shore_rates(far).snr_db[0]
    loss = 15.0 * math.log10(7.0e4 / 6.0e4)
    assert gap == pytest.approx(20.0 + loss, abs=0.01)


def test_shore_independent_of_uav_levels():
    sc = flagship()
    assert baseline_shore(sc.with_levels(22.0, 1.5e3, -55.0)) == baseline_shore(sc.with_levels(40.0, 3e4, -40.0))


def test_terrestrial_equals_planner_when_nothing_binds():
    sc = short_scenario(energy_j=1e8, interference_limit_dbm=30.0)
    prop = plan_trajectory(sc)
    terr = baseline_terrestrial(sc)
    assert terr.min_rate == pytest.approx(prop.min_rate, abs=1e-6)


def test_terrestrial_respects_tight_limits_and_loses():
    sc = short_scenario(energy_j=5.0, interference_limit_dbm=-60.0)
    terr = baseline_terrestrial(sc)
    assert audit_plan(terr, sc) == []
    assert terr.energy_used_j <= 5.0
    assert terr.min_rate <= plan_trajectory(sc).min_rate + 1e-9
    assert terr.init.startswith("terrestrial/")


def test_repair_scales_energy_down():
    sc = short_scenario(energy_j=1.0)
    cons = ConstraintSet.from_scenario(sc)
    loose = replace(cons, interference_enabled=False, energy_enabled=False)
    raw = plan_trajectory(sc, loose)
    assert raw.energy_used_j > 1.0
    fixed = terrestrial_repair(raw, sc, cons)
    assert fixed.energy_used_j <= 1.0
    assert fixed.waypoints is raw.waypoints


def test_flagship_proposed_beats_baselines():
    sc, prop = flagship_plan(34.0, 1.5e3, -55.0)
    assert prop.min_rate >= baseline_terrestrial(sc).min_rate - 1e-9
    assert prop.min_rate > baseline_shore(sc)
