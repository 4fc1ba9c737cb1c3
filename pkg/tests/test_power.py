import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pelagic.channel import ergodic_rate
from pelagic.planner.model import ConstraintSet, SlotChannels, max_min_rate, power_ceiling_mw, slot_caps
from pelagic.planner.power import allocate_channels, allocate_power
from pelagic.scenario.model import flagship

K_ACC, K_BH = 10.0, 15.0


def channels(gain, itf_offset_db, bh_snr):
    return SlotChannels(
        access_gain=np.asarray(gain, dtype=float),
        backhaul_snr=np.asarray(bh_snr, dtype=float),
        interference_gain_db=np.asarray(itf_offset_db, dtype=float),
        access_k=K_ACC,
        backhaul_k=K_BH,
    )


def random_instance(rng, n=3):
    ch = channels(10.0 ** rng.uniform(-3.0, 0.5, n), rng.uniform(-100.0, -70.0, n), 10.0 ** rng.uniform(1.0, 3.0, n))
    cons = ConstraintSet(p_max_dbm=float(rng.uniform(20, 40)), energy_j=float(10.0 ** rng.uniform(0, 2.5)),
                         interference_limit_dbm=float(rng.uniform(-60, -40)), slot_s=10.0)
    return ch, cons


def exhaustive_grid(ch, cons, n_levels=50):
    """Best min rate over every level vector, built without the package allocator.

    Each slot gets `n_levels` powers evenly spaced from 0 to its own
    ceiling, so rounding any feasible allocation down stays feasible.
    """
    p_max = 10.0 ** (cons.p_max_dbm / 10.0)
    cap = np.minimum(p_max, 10.0 ** ((cons.interference_limit_dbm - ch.interference_gain_db) / 10.0))
    levels = cap[:, None] * np.linspace(0.0, 1.0, n_levels)[None]
    bh = ergodic_rate(ch.backhaul_snr, K_BH).min()
    n = len(ch.access_gain)
    rate = np.minimum(ergodic_rate(ch.access_gain[:, None] * levels, K_ACC), bh)
    grids = np.meshgrid(*([np.arange(n_levels)] * n), indexing="ij")
    idx = np.stack([gr.ravel() for gr in grids], axis=1)
    rows = np.arange(n)
    value = rate[rows, idx].min(axis=1)
    energy = levels[rows, idx].sum(axis=1) / 1000.0 * cons.slot_s
    value = np.where(energy <= cons.energy_j * (1 + 1e-12), value, -np.inf)
    return float(value.max()), levels, rate


def grid_step(alloc, levels, rate):
    """Rate gap between each slot's optimal power rounded down and one level higher."""
    p = 10.0 ** (alloc.powers_dbm / 10.0)
    rows = np.arange(len(p))
    k = np.array([np.searchsorted(levels[n], p[n] * (1 + 1e-12), side="right") - 1 for n in rows])
    k = np.clip(k, 0, levels.shape[1] - 2)
    return float(np.max(rate[rows, k + 1] - rate[rows, k]))


def test_allocator_matches_exhaustive_power_grid():
    rng = np.random.default_rng(3)
    for _ in range(100):
        ch, cons = random_instance(rng)
        alloc = allocate_channels(ch, cons)
        best, levels, rate = exhaustive_grid(ch, cons)
        assert best <= alloc.min_rate + 1e-6
        assert alloc.min_rate - best <= grid_step(alloc, levels, rate) + 1e-6


@settings(max_examples=80)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_allocation_is_feasible_and_equalised(seed, n):
    ch, cons = random_instance(np.random.default_rng(seed), n)
    alloc = allocate_channels(ch, cons)
    p_mw = 10.0 ** (alloc.powers_dbm / 10.0)
    assert np.all(p_mw <= power_ceiling_mw(ch, cons) * (1 + 1e-9))
    assert alloc.energy_used_j <= cons.energy_j * (1 + 1e-9)
    assert np.all(alloc.access_rate <= alloc.backhaul_rate + 1e-9)
    assert np.all(alloc.access_rate >= alloc.min_rate - 1e-9)
    assert alloc.min_rate == pytest.approx(float(max_min_rate(ch, cons)), abs=1e-6)


def test_single_slot_power_ceiling_binds():
    ch = channels([0.01], [-200.0], [1e6])
    cons = ConstraintSet(p_max_dbm=30.0, energy_j=1e6, interference_limit_dbm=0.0, slot_s=10.0)
    alloc = allocate_channels(ch, cons)
    assert alloc.powers_dbm[0] == pytest.approx(30.0, abs=1e-4)
    assert alloc.min_rate == pytest.approx(float(ergodic_rate(10.0, K_ACC)), abs=1e-6)


def test_identical_slots_split_energy_equally():
    ch = channels([0.1, 0.1], [-200.0, -200.0], [1e6, 1e6])
    cons = ConstraintSet(p_max_dbm=40.0, energy_j=20.0, interference_limit_dbm=0.0, slot_s=10.0)
    alloc = allocate_channels(ch, cons)
    assert alloc.powers_dbm == pytest.approx([30.0, 30.0], abs=1e-4)
    assert alloc.energy_used_j == pytest.approx(20.0, rel=1e-5)


def test_backhaul_caps_rate():
    ch = channels([1.0, 1.0], [-200.0, -200.0], [3.0, 1e6])
    cons = ConstraintSet(p_max_dbm=40.0, energy_j=1e6, interference_limit_dbm=0.0, slot_s=10.0)
    alloc = allocate_channels(ch, cons)
    assert alloc.min_rate == pytest.approx(float(ergodic_rate(3.0, K_BH)), abs=1e-6)
    assert np.all(alloc.access_rate <= alloc.backhaul_rate + 1e-9)


def test_disabled_constraints_relax_the_optimum():
    ch, cons = random_instance(np.random.default_rng(11))
    base = allocate_channels(ch, cons).min_rate
    for flag in ("interference_enabled", "energy_enabled", "backhaul_enabled"):
        loose = ConstraintSet(**{**cons.__dict__, flag: False})
        assert allocate_channels(ch, loose).min_rate >= base - 1e-9


def test_allocate_power_on_flagship_waypoints():
    sc = flagship()
    v = sc.vessel_track.positions(np.arange(sc.n_slots + 1) * sc.slot_s)
    q = np.column_stack([v[:, 0], v[:, 1], np.full(len(v), 3000.0)])
    alloc = allocate_power(q, sc)
    assert len(alloc.powers_dbm) == sc.n_slots
    assert alloc.energy_used_j <= sc.energy_j * (1 + 1e-9)


# -- slot caps -----------------------------------------------------------------

def _above_sat(sc, distance):
    sat = np.asarray(sc.sat_user_position)
    return sat + np.array([math.sqrt(distance**2 - (1000.0 - sat[2]) ** 2), 0.0, 1000.0 - sat[2]])


def test_slot_caps_examples():
    sc = flagship()
    assert sc.links["interference"].gains_db == 38.0
    caps = slot_caps(_above_sat(sc, 2600.0), sc.with_levels(interference_limit_dbm=-40.0))
    assert caps.p_cap_interference_dbm == pytest.approx(38.7, abs=1e-9)
    caps = slot_caps(_above_sat(sc, 5000.0), sc.with_levels(interference_limit_dbm=-55.0))
    assert caps.p_cap_interference_dbm == pytest.approx(28.0, abs=0.05)


def test_slot_caps_vectorised():
    sc = flagship()
    pts = np.array([_above_sat(sc, 2600.0), _above_sat(sc, 5000.0)])
    caps = slot_caps(pts, sc)
    assert caps.p_cap_interference_dbm.shape == (2,)
    assert caps.p_cap_interference_dbm[0] == slot_caps(pts[0], sc).p_cap_interference_dbm
    assert np.all(caps.backhaul_rate > 0)


def test_slot_cap_shifts_with_limit():
    sc = flagship()
    pos = [5.0e4, 3.0e3, 3500.0]
    tight = slot_caps(pos, sc.with_levels(interference_limit_dbm=-55.0)).p_cap_interference_dbm
    loose = slot_caps(pos, sc.with_levels(interference_limit_dbm=-40.0)).p_cap_interference_dbm
    assert loose - tight == pytest.approx(15.0, abs=1e-12)


def test_slot_caps_rejects_ground_level():
    with pytest.raises(ValueError):
        slot_caps([0.0, 0.0, 0.0], flagship())
