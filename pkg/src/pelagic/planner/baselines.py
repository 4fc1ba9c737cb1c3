"""Reference schemes the joint planner is compared against."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from pelagic.channel import ergodic_rate, horizon_excess, noise_power, path_loss
from pelagic.planner.model import ConstraintSet, power_ceiling_mw, slot_channels
from pelagic.planner.trajectory import Init, SearchSettings, TrajectoryPlan, plan_trajectory
from pelagic.platform import energy_used
from pelagic.scenario.model import Scenario


@dataclass(frozen=True)
class ShoreResult:
    min_rate: float
    rates: np.ndarray  # per slot
    snr_db: np.ndarray


def shore_rates(scenario: Scenario) -> ShoreResult:
    """Ergodic rate of the direct TBS-to-vessel link at every slot mid-time."""
    link = scenario.links["direct"]
    tbs = np.asarray(scenario.tbs_position)
    vessel = scenario.vessel_track.positions(scenario.slot_mid_times())
    d = np.linalg.norm(vessel - tbs, axis=-1)
    ground = np.linalg.norm(vessel[:, :2] - tbs[:2], axis=-1)
    excess = horizon_excess(tbs[2], vessel[:, 2], ground, link)
    snr_db = scenario.tbs_power_dbm + link.gains_db - path_loss(d, link) - excess - noise_power(link)
    rates = np.atleast_1d(ergodic_rate(10.0 ** (snr_db / 10.0), link.rician_k))
    return ShoreResult(float(rates.min()), rates, np.atleast_1d(snr_db))


def baseline_shore(scenario: Scenario) -> float:
    """Worst-slot rate when the vessel is served straight from the shore."""
    return shore_rates(scenario).min_rate


def terrestrial_repair(plan: TrajectoryPlan, scenario: Scenario, constraints: ConstraintSet) -> TrajectoryPlan:
    """Make an unconstrained plan respect P_max, the interference cap and E.

    Each slot's power is clipped to its ceiling; if the clipped profile
    still spends more than E, all powers are scaled down by one common
    factor. Rates are then recomputed on the unchanged trajectory.
    """
    ch = slot_channels(plan.waypoints, scenario)
    strict = replace(constraints, interference_enabled=True)
    with np.errstate(divide="ignore"):
        p_mw = np.where(np.isneginf(plan.powers_dbm), 0.0, 10.0 ** (plan.powers_dbm / 10.0))
    p_mw = np.minimum(p_mw, power_ceiling_mw(ch, strict))
    used = math.fsum((p_mw / 1000.0).tolist()) * constraints.slot_s
    if used > constraints.energy_j:
        # the tiny margin keeps the recomputed energy under E after rounding
        p_mw = p_mw * (constraints.energy_j / used) * (1.0 - 1e-12)
    with np.errstate(divide="ignore"):
        powers = 10.0 * np.log10(p_mw)
    access = np.atleast_1d(ergodic_rate(p_mw * ch.access_gain, ch.access_k))
    backhaul = np.atleast_1d(ergodic_rate(ch.backhaul_snr, ch.backhaul_k))
    delivered = np.minimum(access, backhaul) if constraints.backhaul_enabled else access
    with np.errstate(divide="ignore"):
        interference = powers + ch.interference_gain_db
    return replace(
        plan,
        powers_dbm=powers,
        access_rate=access,
        backhaul_rate=backhaul,
        interference_dbm=interference,
        min_rate=float(delivered.min()),
        energy_used_j=energy_used(powers, constraints.slot_s),
        init=f"terrestrial/{plan.init}",
    )


def baseline_terrestrial(
    scenario: Scenario,
    constraints: Optional[ConstraintSet] = None,
    init: Init = "overhead-loiter",
    settings: SearchSettings = SearchSettings(),
    unconstrained_plan: Optional[TrajectoryPlan] = None,
) -> TrajectoryPlan:
    """Plan as if interference and energy did not matter, then repair.

    `unconstrained_plan` may be passed to reuse a plan already computed
    with interference and energy disabled (it depends only on P_max).
    """
    if constraints is None:
        constraints = ConstraintSet.from_scenario(scenario)
    if unconstrained_plan is None:
        loose = replace(constraints, interference_enabled=False, energy_enabled=False)
        unconstrained_plan = plan_trajectory(scenario, loose, init, settings)
    return terrestrial_repair(unconstrained_plan, scenario, constraints)
