import math

import numpy as np
import pytest

from pelagic.planner.io import PLAN_HEADER, parse_plan, plan_to_csv, read_plan, write_plan
from pelagic.planner.trajectory import evaluate_init
from test_planner import short_scenario


@pytest.fixture(scope="module")
def plan():
    return evaluate_init(short_scenario(interference_limit_dbm=-55.0))


def test_layout(plan):
    lines = plan_to_csv(plan).splitlines()
    assert lines[0] == ",".join(PLAN_HEADER)
    assert len(lines) == plan.n_slots + 3
    assert lines[-2].endswith(",,,,")
    assert lines[-1].startswith("#summary,min_rate=")


def test_round_trip_is_exact(plan, tmp_path):
    table = read_plan(write_plan(plan, tmp_path / "plan.csv"))
    assert np.array_equal(table.positions, plan.waypoints[:-1])
    assert np.array_equal(table.final_position, plan.waypoints[-1])
    assert np.array_equal(table.powers_dbm, plan.powers_dbm)
    assert np.array_equal(table.access_rate, plan.access_rate)
    assert table.min_rate == plan.min_rate and table.energy_used_j == plan.energy_used_j
    assert table.t_s[1] - table.t_s[0] == plan.slot_s
    assert table.slot.tolist() == list(range(plan.n_slots))


def test_zero_power_round_trips(plan):
    from dataclasses import replace

    silent = replace(plan, powers_dbm=np.full(plan.n_slots, -math.inf))
    assert np.all(np.isneginf(parse_plan(plan_to_csv(silent)).powers_dbm))


@pytest.mark.parametrize("text", ["", "a,b\n1,2\n", ",".join(PLAN_HEADER) + "\n"])
def test_malformed(text):
    with pytest.raises(ValueError):
        parse_plan(text)
