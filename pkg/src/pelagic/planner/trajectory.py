"""Joint trajectory and power planning by pattern search.

A trajectory is described by a *centre path* and a *weave*. The centre
path follows the vessel plus an offset ``(dx, dy)`` and an altitude ``z``
that are piecewise linear between knots spaced ``knot_every`` slots
apart. A fixed-wing aircraft cannot hold station over a 10 m/s vessel when
its stall speed is 20 m/s, so whenever the centre moves slower than the
cruise speed the aircraft adds an alternating cross-track velocity that
tops its speed up to exactly ``v_cruise``: a racetrack whose legs last one
slot and whose turns are the reversals between them. A reversal changes
velocity by at most ``2 * v_cruise``, which the acceleration bound must
allow.

Each candidate trajectory is scored with the exact max-min power
allocation (closed form), so the search always sees the jointly optimal
power for the trajectory it is evaluating.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from pelagic.planner.model import ConstraintSet, max_min_rate, slot_channels
from pelagic.planner.power import allocate_channels
from pelagic.platform import KinematicsReport, energy_used, kinematics_check, kinematics_ok_batch
from pelagic.scenario.model import Scenario

log = logging.getLogger(__name__)

Init = Literal["overhead-loiter", "straight-chase"]
INITS = ("overhead-loiter", "straight-chase")


class PlanInfeasible(RuntimeError):
    """No kinematically feasible trajectory could be constructed."""

    def __init__(self, message: str, report: Optional[KinematicsReport] = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class TrajectoryPlan:
    waypoints: np.ndarray
    powers_dbm: np.ndarray
    access_rate: np.ndarray
    backhaul_rate: np.ndarray
    interference_dbm: np.ndarray
    min_rate: float
    energy_used_j: float
    slot_s: float
    t0: float = 0.0
    history: tuple = field(default=(), compare=False)
    outer_history: tuple = field(default=(), compare=False)
    init: str = ""

    @property
    def n_slots(self) -> int:
        return len(self.powers_dbm)

    @property
    def average_power_dbm(self) -> float:
        watts = self.energy_used_j / (self.slot_s * self.n_slots)
        return 10.0 * math.log10(watts * 1000.0) if watts > 0 else -math.inf


@dataclass(frozen=True)
class SearchSettings:
    knot_every: int = 10
    mesh_start_m: float = 2048.0
    mesh_min_m: float = 1.0
    tol: float = 1e-3
    max_outer: int = 50
    max_polls: int = 4000
    cruise_margin: float = 0.01
    tail_moves: bool = True


class Weave:
    """Maps knot offsets to waypoints for one scenario.

    Knots have shape ``(..., M+1, 3)`` holding ``(dx, dy, z)``; knot 0 is
    pinned to the vessel's start at minimum altitude.
    """

    def __init__(self, scenario: Scenario, settings: SearchSettings = SearchSettings()):
        lim = scenario.uav_limits
        self.scenario = scenario
        self.slot_s = scenario.slot_s
        n = scenario.n_slots
        self.v_cruise = lim.v_min * (1.0 + settings.cruise_margin)
        if self.v_cruise > lim.v_max:
            self.v_cruise = lim.v_max
        m = max(1, math.ceil(n / settings.knot_every))
        self.knot_idx = np.unique(np.round(np.linspace(0, n, m + 1)).astype(int))
        steps = np.arange(n + 1)
        eye = np.eye(len(self.knot_idx))
        # row k interpolates waypoint k from the knots
        self.interp = np.stack([np.interp(steps, self.knot_idx, eye[j]) for j in range(len(self.knot_idx))], axis=1)
        self.vessel_xy = scenario.vessel_track.positions(scenario.waypoint_times())[:, :2]
        heading = self.vessel_xy[-1] - self.vessel_xy[0]
        norm = np.linalg.norm(heading)
        self.lane_dir = heading / norm if norm > 0 else np.array([1.0, 0.0])
        self.lane_normal = np.array([-self.lane_dir[1], self.lane_dir[0]])
        self.sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)

    @property
    def n_knots(self) -> int:
        return len(self.knot_idx)

    def loiter_knots(self) -> np.ndarray:
        knots = np.zeros((self.n_knots, 3))
        knots[:, 2] = self.scenario.uav_limits.alt_min
        return knots

    def chase_knots(self) -> np.ndarray:
        t = self.knot_idx * self.slot_s
        knots = self.loiter_knots()
        target = self.vessel_xy[0] + np.outer(t * self.v_cruise, self.lane_dir)
        knots[:, :2] = target - self.vessel_xy[self.knot_idx]
        return knots

    def project(self, knots: np.ndarray) -> np.ndarray:
        lim = self.scenario.uav_limits
        out = knots.copy()
        out[..., 2] = np.clip(out[..., 2], lim.alt_min, lim.alt_max)
        out[..., 0, :2] = 0.0
        out[..., 0, 2] = lim.alt_min
        return out

    def waypoints(self, knots: np.ndarray) -> np.ndarray:
        offsets = np.einsum("kj,...jd->...kd", self.interp, knots)
        centre = np.concatenate([self.vessel_xy + offsets[..., :2], offsets[..., 2:]], axis=-1)
        vc = np.diff(centre, axis=-2) / self.slot_s
        speed = np.linalg.norm(vc, axis=-1)
        omega = np.sqrt(np.maximum(self.v_cruise**2 - speed**2, 0.0))
        h = vc[..., :2]
        hn = np.linalg.norm(h, axis=-1, keepdims=True)
        perp = np.stack([-h[..., 1], h[..., 0]], axis=-1) / np.where(hn > 1e-9, hn, 1.0)
        perp = np.where(hn > 1e-9, perp, self.lane_normal)
        # horizontal and normal to the horizontal velocity, hence normal to vc
        weave = np.concatenate([perp, np.zeros(perp.shape[:-1] + (1,))], axis=-1)
        v = vc + (self.sign * omega)[..., None] * weave
        start = centre[..., :1, :]
        return np.concatenate([start, start + np.cumsum(v * self.slot_s, axis=-2)], axis=-2)


def _moves(weave: Weave, settings: SearchSettings) -> np.ndarray:
    """Unit perturbations, shape ``(P, M+1, 3)``, in tie-break order."""
    m = weave.n_knots
    moves = []
    kinds = ("hat", "tail") if settings.tail_moves else ("hat",)
    for kind in kinds:
        for j in range(1, m):
            for d in range(3):
                for sign in (1.0, -1.0):
                    move = np.zeros((m, 3))
                    if kind == "hat":
                        move[j, d] = sign
                    else:
                        move[j:, d] = sign
                    moves.append(move)
    return np.array(moves)


class _Objective:
    def __init__(self, weave: Weave, constraints: ConstraintSet):
        self.weave = weave
        self.scenario = weave.scenario
        self.constraints = constraints
        self.evaluations = 0

    def __call__(self, knots: np.ndarray) -> np.ndarray:
        """Max-min rate of each candidate; ``-inf`` where kinematically infeasible."""
        q = self.weave.waypoints(knots)
        ok = kinematics_ok_batch(q, self.scenario.slot_s, self.scenario.uav_limits)
        rate = np.asarray(max_min_rate(slot_channels(q, self.scenario), self.constraints), dtype=float)
        self.evaluations += rate.size
        return np.where(ok, rate, -np.inf)


def initial_waypoints(scenario: Scenario, init: Init = "overhead-loiter",
                      settings: SearchSettings = SearchSettings()) -> np.ndarray:
    weave = Weave(scenario, settings)
    return weave.waypoints(_init_knots(weave, init))


def _init_knots(weave: Weave, init: str) -> np.ndarray:
    if init == "overhead-loiter":
        return weave.loiter_knots()
    if init == "straight-chase":
        return weave.chase_knots()
    raise ValueError(f"unknown init {init!r}; choose from {INITS}")


def _check_initial(weave: Weave, knots: np.ndarray, init: str) -> None:
    scenario = weave.scenario
    lim = scenario.uav_limits
    reversal = 2.0 * weave.v_cruise / scenario.slot_s
    if reversal > lim.a_max * (1 + 1e-9):
        raise PlanInfeasible(
            f"acceleration bound a_max={lim.a_max} m/s^2 cannot absorb a loiter reversal at "
            f"v_min={lim.v_min} m/s with {scenario.slot_s} s slots (needs {reversal:.3g} m/s^2)"
        )
    report = kinematics_check(weave.waypoints(knots), scenario.slot_s, lim)
    if not report.ok:
        raise PlanInfeasible(f"{init} initialization infeasible: {report.violation}", report)


def plan_trajectory(
    scenario: Scenario,
    constraints: Optional[ConstraintSet] = None,
    init: Init = "overhead-loiter",
    settings: SearchSettings = SearchSettings(),
) -> TrajectoryPlan:
    """Maximize the minimum ergodic access rate over trajectory and power.

    Starting from the `init` pattern, each outer iteration runs a complete
    coarse-to-fine pattern search over the knots: at each mesh size all
    perturbations are scored, the best strict improvement is taken (ties go
    to the lowest perturbation index), and the mesh halves when nothing
    improves. Outer iterations stop once one gains less than ``settings.tol``
    bps/Hz or after ``settings.max_outer`` rounds. Power is re-optimized
    exactly for every candidate; the returned powers come from the
    bisection allocator.
    """
    if constraints is None:
        constraints = ConstraintSet.from_scenario(scenario)
    weave = Weave(scenario, settings)
    knots = weave.project(_init_knots(weave, init))
    _check_initial(weave, knots, init)

    objective = _Objective(weave, constraints)
    moves = _moves(weave, settings)
    best = float(objective(knots[None])[0])
    history = [best]
    outer_history = [best]
    polls = 0

    for outer in range(settings.max_outer):
        start = best
        step = settings.mesh_start_m
        while step >= settings.mesh_min_m and polls < settings.max_polls:
            while polls < settings.max_polls:
                polls += 1
                candidates = weave.project(knots[None] + step * moves)
                rate = objective(candidates)
                k = int(np.argmax(rate))  # first index among equals
                if not rate[k] > best:
                    break
                knots = candidates[k]
                best = float(rate[k])
                history.append(best)
            step /= 2.0
        outer_history.append(best)
        log.debug("outer %d: min rate %.6f (%d polls)", outer, best, polls)
        if best - start < settings.tol:
            break

    return _finish(weave, knots, constraints, init, history, outer_history)


def plan_from_waypoints(waypoints, scenario: Scenario, constraints: Optional[ConstraintSet] = None,
                        init: str = "", history=(), outer_history=()) -> TrajectoryPlan:
    """Allocate power along given waypoints and package the result as a plan."""
    if constraints is None:
        constraints = ConstraintSet.from_scenario(scenario)
    q = np.asarray(waypoints, dtype=float)
    alloc = allocate_channels(slot_channels(q, scenario), constraints)
    return TrajectoryPlan(
        waypoints=q,
        powers_dbm=alloc.powers_dbm,
        access_rate=alloc.access_rate,
        backhaul_rate=alloc.backhaul_rate,
        interference_dbm=alloc.interference_dbm,
        min_rate=alloc.min_rate,
        energy_used_j=energy_used(alloc.powers_dbm, constraints.slot_s),
        slot_s=constraints.slot_s,
        t0=scenario.vessel_track.t_start,
        history=tuple(history),
        outer_history=tuple(outer_history),
        init=init,
    )


def _finish(weave, knots, constraints, init, history, outer_history) -> TrajectoryPlan:
    scenario = weave.scenario
    q = weave.waypoints(knots)
    report = kinematics_check(q, scenario.slot_s, scenario.uav_limits)
    if not report.ok:  # the search only accepts screened candidates
        raise PlanInfeasible(f"planner produced an infeasible trajectory: {report.violation}", report)
    return plan_from_waypoints(q, scenario, constraints, init, history, outer_history)


def evaluate_init(scenario: Scenario, constraints: Optional[ConstraintSet] = None,
                  init: Init = "straight-chase", settings: SearchSettings = SearchSettings()) -> TrajectoryPlan:
    """Plan for an initialization pattern with optimal power and no trajectory search."""
    weave = Weave(scenario, settings)
    knots = weave.project(_init_knots(weave, init))
    _check_initial(weave, knots, init)
    if constraints is None:
        constraints = ConstraintSet.from_scenario(scenario)
    return _finish(weave, knots, constraints, init, (), ())
