"""Plan export: one CSV row per slot plus a trailing summary line."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pelagic.planner.trajectory import TrajectoryPlan

PLAN_HEADER = ["slot", "t_s", "x", "y", "z", "power_dbm", "access_rate", "backhaul_rate", "interference_dbm"]
SUMMARY_TAG = "#summary"


@dataclass(frozen=True)
class PlanTable:
    """A plan as read back from CSV. Positions are the slot start waypoints."""

    slot: np.ndarray
    t_s: np.ndarray
    positions: np.ndarray
    powers_dbm: np.ndarray
    access_rate: np.ndarray
    backhaul_rate: np.ndarray
    interference_dbm: np.ndarray
    min_rate: float
    energy_used_j: float
    final_position: np.ndarray


def _fmt(v: float) -> str:
    return repr(float(v))


def plan_to_csv(plan: TrajectoryPlan) -> str:
    """Rows for slots ``0..N-1`` then one row for the end waypoint with blank metrics."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PLAN_HEADER)
    q = plan.waypoints
    for n in range(plan.n_slots):
        writer.writerow([n, _fmt(plan.t0 + n * plan.slot_s), *map(_fmt, q[n]),
                         _fmt(plan.powers_dbm[n]), _fmt(plan.access_rate[n]),
                         _fmt(plan.backhaul_rate[n]), _fmt(plan.interference_dbm[n])])
    n = plan.n_slots
    writer.writerow([n, _fmt(plan.t0 + n * plan.slot_s), *map(_fmt, q[n]), "", "", "", ""])
    buf.write(f"{SUMMARY_TAG},min_rate={_fmt(plan.min_rate)},energy_used_j={_fmt(plan.energy_used_j)}\n")
    return buf.getvalue()


def write_plan(plan: TrajectoryPlan, path) -> Path:
    path = Path(path)
    path.write_text(plan_to_csv(plan), encoding="utf-8")
    return path


def parse_plan(text: str) -> PlanTable:
    lines = text.splitlines()
    if not lines or lines[0].split(",") != PLAN_HEADER:
        raise ValueError(f"expected plan header {','.join(PLAN_HEADER)}")
    summary = {}
    rows = []
    for line in csv.reader(lines[1:]):
        if not line:
            continue
        if line[0] == SUMMARY_TAG:
            summary = dict(item.split("=", 1) for item in line[1:])
            continue
        rows.append(line)
    if not rows or "min_rate" not in summary or "energy_used_j" not in summary:
        raise ValueError("plan CSV lacks rows or its summary line")
    *slots, last = rows
    arr = np.array([[float(v) for v in r] for r in slots]).reshape(-1, len(PLAN_HEADER))
    return PlanTable(
        slot=arr[:, 0].astype(int),
        t_s=arr[:, 1],
        positions=arr[:, 2:5],
        powers_dbm=arr[:, 5],
        access_rate=arr[:, 6],
        backhaul_rate=arr[:, 7],
        interference_dbm=arr[:, 8],
        min_rate=float(summary["min_rate"]),
        energy_used_j=float(summary["energy_used_j"]),
        final_position=np.array([float(v) for v in last[2:5]]),
    )


def read_plan(path) -> PlanTable:
    return parse_plan(Path(path).read_text(encoding="utf-8"))
