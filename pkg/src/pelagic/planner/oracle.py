"""Brute-force optima for tiny instances, used to check the planner.

Powers come from a finite level set and waypoints from per-step
candidate lists. For a fixed trajectory the best level assignment is found
exactly by sweeping the candidate thresholds: a max-min value t is
achievable iff every slot has an allowed level reaching t and the
cheapest such levels fit the energy budget. This returns the same optimum
as enumerating every level vector (checked in the tests) at a fraction of
the cost.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from pelagic.channel import ergodic_rate
from pelagic.planner.model import ConstraintSet, SlotChannels, power_ceiling_mw, slot_channels
from pelagic.platform import kinematics_check
from pelagic.scenario.model import Scenario, VesselTrack

MAX_SLOTS = 4
MAX_CANDIDATES = 8
MAX_LEVELS = 64
_REL = 1e-12


class OracleSizeError(ValueError):
    """The requested enumeration exceeds the oracle's size guard."""


@dataclass(frozen=True)
class GridAllocation:
    min_rate: float
    levels: np.ndarray  # level index per slot, -1 when nothing is feasible
    powers_mw: np.ndarray


@dataclass(frozen=True)
class OracleResult:
    min_rate: float
    waypoints: Optional[np.ndarray]
    powers_mw: Optional[np.ndarray]
    feasible_trajectories: int
    total_trajectories: int

    @property
    def powers_dbm(self) -> Optional[np.ndarray]:
        if self.powers_mw is None:
            return None
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.powers_mw)


def power_levels_mw(p_max_dbm: float, n_levels: int) -> np.ndarray:
    """``n_levels`` powers evenly spaced in mW from 0 to P_max inclusive."""
    if n_levels < 2:
        raise ValueError("need at least two levels")
    return np.linspace(0.0, 10.0 ** (p_max_dbm / 10.0), n_levels)


def _slot_values(ch: SlotChannels, constraints: ConstraintSet, levels_mw: np.ndarray):
    """Delivered rate of each (slot, level) pair, ``-inf`` for disallowed levels."""
    g = np.asarray(ch.access_gain, dtype=float)
    ceiling = power_ceiling_mw(ch, constraints)
    rates = np.asarray(ergodic_rate(np.outer(g, levels_mw), ch.access_k), dtype=float).reshape(len(g), -1)
    if constraints.backhaul_enabled:
        backhaul = np.atleast_1d(ergodic_rate(ch.backhaul_snr, ch.backhaul_k))
        rates = np.minimum(rates, backhaul[:, None])
    allowed = levels_mw[None, :] <= ceiling[:, None] * (1 + _REL)
    return np.where(allowed, rates, -np.inf)


def _energy_ok(p_mw: np.ndarray, constraints: ConstraintSet) -> bool:
    if not constraints.energy_enabled:
        return True
    return math.fsum((p_mw / 1000.0).tolist()) * constraints.slot_s <= constraints.energy_j * (1 + _REL)


def grid_allocate(ch: SlotChannels, constraints: ConstraintSet, levels_mw: Sequence[float]) -> GridAllocation:
    """Optimal max-min assignment of power levels (exact threshold sweep)."""
    levels = np.sort(np.asarray(levels_mw, dtype=float))
    if len(levels) > MAX_LEVELS:
        raise OracleSizeError(f"{len(levels)} power levels exceed the limit of {MAX_LEVELS}")
    values = _slot_values(ch, constraints, levels)
    n = values.shape[0]
    best = GridAllocation(-math.inf, np.full(n, -1), np.zeros(n))
    thresholds = np.unique(values[np.isfinite(values)])
    # feasibility is monotone in t: scan from the top and stop at the first hit
    for t in thresholds[::-1]:
        reach = values >= t
        if not reach.any(axis=1).all():
            continue
        # cheapest level reaching t; rates are non-decreasing in power, so argmax finds it
        idx = np.argmax(reach, axis=1)
        p = levels[idx]
        if _energy_ok(p, constraints):
            rate = float(values[np.arange(n), idx].min())
            return GridAllocation(rate, idx, p)
    return best


def grid_allocate_enumerate(ch: SlotChannels, constraints: ConstraintSet,
                            levels_mw: Sequence[float]) -> GridAllocation:
    """Same optimum as :func:`grid_allocate` by trying every level vector."""
    levels = np.sort(np.asarray(levels_mw, dtype=float))
    values = _slot_values(ch, constraints, levels)
    n = values.shape[0]
    best_rate, best_idx = -math.inf, np.full(n, -1)
    for combo in itertools.product(range(len(levels)), repeat=n):
        idx = np.array(combo)
        rate = float(values[np.arange(n), idx].min())
        if rate > best_rate and _energy_ok(levels[idx], constraints):
            best_rate, best_idx = rate, idx
    powers = levels[best_idx] if best_idx.min() >= 0 else np.zeros(n)
    return GridAllocation(best_rate, best_idx, powers)


def oracle_exhaustive(
    scenario: Scenario,
    candidates: Sequence[Sequence[Sequence[float]]],
    levels_mw: Sequence[float],
    constraints: Optional[ConstraintSet] = None,
    start=None,
) -> OracleResult:
    """Best trajectory and power levels over a small discrete search space.

    ``candidates[n]`` lists the allowed positions of waypoint ``n + 1``;
    waypoint 0 is `start`, by default above the vessel's start at minimum
    altitude as in the planner. Trajectories failing the kinematic check
    are skipped.
    """
    n_slots = scenario.n_slots
    if n_slots > MAX_SLOTS:
        raise OracleSizeError(f"{n_slots} slots exceed the limit of {MAX_SLOTS}")
    if len(candidates) != n_slots:
        raise ValueError(f"need candidate lists for {n_slots} waypoints, got {len(candidates)}")
    cands = [np.asarray(c, dtype=float).reshape(-1, 3) for c in candidates]
    if any(len(c) > MAX_CANDIDATES for c in cands):
        raise OracleSizeError(f"more than {MAX_CANDIDATES} candidates for a waypoint")
    if any(len(c) == 0 for c in cands):
        raise ValueError("every waypoint needs at least one candidate")
    if len(levels_mw) > MAX_LEVELS:
        raise OracleSizeError(f"{len(levels_mw)} power levels exceed the limit of {MAX_LEVELS}")
    if constraints is None:
        constraints = ConstraintSet.from_scenario(scenario)
    if start is None:
        v0 = scenario.vessel_track.positions([scenario.vessel_track.t_start])[0]
        start = (v0[0], v0[1], scenario.uav_limits.alt_min)
    start = np.asarray(start, dtype=float)

    best_rate, best_q, best_p = -math.inf, None, None
    feasible = total = 0
    for combo in itertools.product(*[range(len(c)) for c in cands]):
        total += 1
        q = np.vstack([start] + [cands[n][k] for n, k in enumerate(combo)])
        if not kinematics_check(q, scenario.slot_s, scenario.uav_limits).ok:
            continue
        feasible += 1
        alloc = grid_allocate(slot_channels(q, scenario), constraints, levels_mw)
        if alloc.min_rate > best_rate:
            best_rate, best_q, best_p = alloc.min_rate, q, alloc.powers_mw
    return OracleResult(best_rate, best_q, best_p, feasible, total)


def miniature() -> tuple[Scenario, list[np.ndarray]]:
    """Three-slot, five-candidate cut of the lane case where E and I both bind.

    The vessel sails 300 m at 10 m/s. The satellite user sits 150 m ahead
    and 400 m abeam of it, P_max is 20 dBm, E is 1.5 J and I is -60 dBm.
    Odd waypoints sit on a 250 m ring around the drifting centre (two
    raised by 120 m), even ones on a 60 m ring at up to +200 m.
    """
    track = VesselTrack.straight((5.0e4, 0.0, 10.0), (5.03e4, 0.0, 10.0), 10.0)
    scenario = Scenario(
        vessel_track=track,
        sat_user_position=(5.015e4, 400.0, 10.0),
        p_max_dbm=20.0,
        energy_j=1.5,
        interference_limit_dbm=-60.0,
    )
    start = np.array([5.0e4, 0.0, scenario.uav_limits.alt_min])
    angles = np.radians(72.0 * np.arange(5))
    candidates = []
    for n in range(1, 4):
        centre = start + np.array([100.0 * n, 0.0, 0.0])
        if n % 2:
            a = angles + 0.3 * n
            pts = np.column_stack([250 * np.cos(a), 250 * np.sin(a), 120.0 * (np.arange(5) % 2)])
        else:
            pts = np.column_stack([60 * np.cos(angles), 60 * np.sin(angles), 100.0 * (np.arange(5) % 3)])
        candidates.append(centre + pts)
    return scenario, candidates
