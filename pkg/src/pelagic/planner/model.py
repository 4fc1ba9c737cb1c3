"""Per-slot link geometry for a UAV trajectory over a scenario.

Slot n spans waypoints ``q[n]`` and ``q[n+1]``; its channels are evaluated
at the segment midpoint against the vessel position at the slot's
mid-time. Every function here accepts a leading batch axis on the
waypoint array, so the planner can score many candidate trajectories in
one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pelagic.channel import ergodic_rate, horizon_excess, noise_power, path_loss, radiomap_lookup_many
from pelagic.scenario.model import Scenario


@dataclass(frozen=True)
class ConstraintSet:
    """Constraint levels of one planning run.

    The ``*_enabled`` switches drop a constraint entirely; levels stay
    finite either way.
    """

    p_max_dbm: float
    energy_j: float
    interference_limit_dbm: float
    slot_s: float
    backhaul_enabled: bool = True
    interference_enabled: bool = True
    energy_enabled: bool = True

    def __post_init__(self):
        for name in ("p_max_dbm", "energy_j", "interference_limit_dbm", "slot_s"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.slot_s > 0:
            raise ValueError("slot_s must be positive")
        if not self.energy_j > 0:
            raise ValueError("energy_j must be positive")

    @classmethod
    def from_scenario(cls, scenario: Scenario, **overrides) -> "ConstraintSet":
        fields = dict(
            p_max_dbm=scenario.p_max_dbm,
            energy_j=scenario.energy_j,
            interference_limit_dbm=scenario.interference_limit_dbm,
            slot_s=scenario.slot_s,
        )
        fields.update(overrides)
        return cls(**fields)

    @property
    def p_max_mw(self) -> float:
        return 10.0 ** (self.p_max_dbm / 10.0)


def slot_positions(waypoints) -> np.ndarray:
    q = np.asarray(waypoints, dtype=float)
    return 0.5 * (q[..., 1:, :] + q[..., :-1, :])


@dataclass(frozen=True)
class SlotChannels:
    """Large-scale channel state of every slot (arrays shaped ``(..., N)``)."""

    access_gain: np.ndarray  # mean access SNR per mW of UAV power
    backhaul_snr: np.ndarray  # mean TBS->UAV SNR at the fixed TBS power
    interference_gain_db: np.ndarray  # UAV power (dBm) -> received interference (dBm) offset
    access_k: float
    backhaul_k: float

    @property
    def cap_offset_db(self) -> np.ndarray:
        # power cap (dBm) = interference limit (dBm) + offset
        return -self.interference_gain_db


def _excess(params, a, b, radio_map=None):
    ground = np.linalg.norm(a[..., :2] - b[..., :2], axis=-1)
    out = horizon_excess(a[..., 2], b[..., 2], ground, params)
    if radio_map is not None:
        low = np.where((a[..., 2] <= b[..., 2])[..., None], a, b)
        out = out + radiomap_lookup_many(radio_map, low[..., :2])
    return out


def slot_channels(waypoints, scenario: Scenario) -> SlotChannels:
    pos = slot_positions(waypoints)
    vessel = scenario.vessel_track.positions(scenario.slot_mid_times())
    vessel = np.broadcast_to(vessel, pos.shape)
    tbs = np.broadcast_to(np.asarray(scenario.tbs_position), pos.shape)
    sat = np.asarray(scenario.sat_user_position)
    links = scenario.links

    acc = links["access"]
    d_acc = np.linalg.norm(pos - vessel, axis=-1)
    acc_db = acc.gains_db - path_loss(d_acc, acc) - _excess(acc, pos, vessel, scenario.radio_map) - noise_power(acc)

    bh = links["backhaul"]
    d_bh = np.linalg.norm(pos - tbs, axis=-1)
    bh_db = scenario.tbs_power_dbm + bh.gains_db - path_loss(d_bh, bh) - _excess(bh, tbs, pos) - noise_power(bh)

    itf = links["interference"]
    d_sat = np.linalg.norm(pos - sat, axis=-1)
    itf_db = itf.gains_db - path_loss(d_sat, itf)

    return SlotChannels(
        access_gain=10.0 ** (acc_db / 10.0),
        backhaul_snr=10.0 ** (bh_db / 10.0),
        interference_gain_db=itf_db,
        access_k=acc.rician_k,
        backhaul_k=bh.rician_k,
    )


@dataclass(frozen=True)
class SlotCaps:
    p_cap_interference_dbm: np.ndarray | float
    backhaul_rate: np.ndarray | float


def slot_caps(position, scenario: Scenario) -> SlotCaps:
    """Interference power cap and backhaul rate for UAV position(s).

    ``position`` is one 3-D point or an ``(N, 3)`` array; the cap is
    ``I - (G_uav + G_sat) + L(d_uav->sat)``.
    """
    p = np.asarray(position, dtype=float)
    if np.any(p[..., 2] <= 0):
        raise ValueError("UAV altitude must be positive")
    links = scenario.links
    itf = links["interference"]
    d_sat = np.linalg.norm(p - np.asarray(scenario.sat_user_position), axis=-1)
    cap = scenario.interference_limit_dbm - itf.gains_db + path_loss(d_sat, itf)

    bh = links["backhaul"]
    tbs = np.asarray(scenario.tbs_position)
    d_bh = np.linalg.norm(p - tbs, axis=-1)
    excess = horizon_excess(tbs[2], p[..., 2], np.linalg.norm(p[..., :2] - tbs[:2], axis=-1), bh)
    snr_db = scenario.tbs_power_dbm + bh.gains_db - path_loss(d_bh, bh) - excess - noise_power(bh)
    rate = ergodic_rate(10.0 ** (np.asarray(snr_db) / 10.0), bh.rician_k)
    if np.ndim(cap) == 0:
        return SlotCaps(float(cap), float(rate))
    return SlotCaps(cap, rate)


def power_ceiling_mw(ch: SlotChannels, constraints: ConstraintSet) -> np.ndarray:
    """Per-slot maximum UAV power (mW) from P_max and the interference limit."""
    ceiling = np.full(ch.access_gain.shape, constraints.p_max_mw)
    if constraints.interference_enabled:
        cap_dbm = constraints.interference_limit_dbm + ch.cap_offset_db
        ceiling = np.minimum(ceiling, 10.0 ** (cap_dbm / 10.0))
    return ceiling


def max_min_rate(ch: SlotChannels, constraints: ConstraintSet) -> np.ndarray | float:
    """Optimal max-min rate of a fixed trajectory, in closed form.

    At the optimum every slot gets the same access SNR s; the binding s is
    the smallest of the per-slot power ceilings (``g_n * P_n``) and the
    energy budget (``1000 E / (T_slot * sum 1/g_n)``), and the rate is
    additionally capped by the worst slot's backhaul rate.
    """
    g = ch.access_gain
    snr = np.min(g * power_ceiling_mw(ch, constraints), axis=-1)
    if constraints.energy_enabled:
        snr = np.minimum(snr, 1000.0 * constraints.energy_j / (constraints.slot_s * np.sum(1.0 / g, axis=-1)))
    rate = ergodic_rate(snr, ch.access_k)
    if constraints.backhaul_enabled:
        rate = np.minimum(rate, ergodic_rate(np.min(ch.backhaul_snr, axis=-1), ch.backhaul_k))
    return rate

