"""Max-min transmit power allocation for a fixed trajectory."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pelagic.channel import ergodic_rate, invert_ergodic_rate
from pelagic.planner.model import ConstraintSet, SlotChannels, power_ceiling_mw, slot_channels
from pelagic.scenario.model import Scenario

RATE_TOL = 1e-6
_REL = 1e-12
# tight enough that the rate reached overshoots the target by ~1e-12, well
# inside the 1e-9 allowance for access rate above backhaul rate
_INVERT_RTOL = 1e-12


@dataclass(frozen=True)
class PowerAllocation:
    powers_dbm: np.ndarray
    min_rate: float
    access_rate: np.ndarray
    backhaul_rate: np.ndarray
    interference_dbm: np.ndarray
    energy_used_j: float


def _to_dbm(p_mw: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(p_mw)


def required_powers_mw(rate: float, ch: SlotChannels) -> np.ndarray:
    """Per-slot power (mW) giving every slot exactly `rate` bps/Hz."""
    return invert_ergodic_rate(rate, ch.access_k, rtol=_INVERT_RTOL) / ch.access_gain


def allocate_channels(ch: SlotChannels, constraints: ConstraintSet, tol: float = RATE_TOL) -> PowerAllocation:
    """Bisection on the common target rate for one trajectory's channels.

    A target r is feasible when the equal-rate powers ``s(r) / g_n`` fit
    under every slot's power ceiling, their total energy fits E, and r
    does not exceed any slot's backhaul rate. Feasibility is monotone in
    r, so the supremum is bracketed to within `tol`.
    """
    g = np.asarray(ch.access_gain, dtype=float)
    if g.ndim != 1:
        raise ValueError("allocate one trajectory at a time")
    ceiling = power_ceiling_mw(ch, constraints)
    backhaul = ergodic_rate(ch.backhaul_snr, ch.backhaul_k)
    backhaul = np.atleast_1d(backhaul)

    def feasible(r: float) -> bool:
        if constraints.backhaul_enabled and r > backhaul.min():
            return False
        p = required_powers_mw(r, ch)
        if np.any(p > ceiling * (1 + _REL)):
            return False
        if constraints.energy_enabled:
            energy = math.fsum((p / 1000.0).tolist()) * constraints.slot_s
            if energy > constraints.energy_j * (1 + _REL):
                return False
        return True

    hi = float(ergodic_rate(np.min(g * ceiling), ch.access_k))
    if constraints.backhaul_enabled:
        hi = min(hi, float(backhaul.min()))
    lo = 0.0
    if feasible(hi):
        lo = hi
    else:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid

    p_mw = required_powers_mw(lo, ch) if lo > 0 else np.zeros_like(g)
    p_mw = np.minimum(p_mw, ceiling)
    powers = _to_dbm(p_mw)
    access = np.atleast_1d(ergodic_rate(p_mw * g, ch.access_k))
    with np.errstate(divide="ignore"):
        interference = powers + ch.interference_gain_db
    energy = math.fsum((p_mw / 1000.0).tolist()) * constraints.slot_s
    return PowerAllocation(
        powers_dbm=powers,
        min_rate=lo,
        access_rate=access,
        backhaul_rate=backhaul,
        interference_dbm=interference,
        energy_used_j=energy,
    )


def allocate_power(waypoints, scenario: Scenario, constraints: ConstraintSet | None = None,
                   tol: float = RATE_TOL) -> PowerAllocation:
    """Globally optimal max-min power allocation along fixed `waypoints`."""
    if constraints is None:
        constraints = ConstraintSet.from_scenario(scenario)
    return allocate_channels(slot_channels(waypoints, scenario), constraints, tol)
