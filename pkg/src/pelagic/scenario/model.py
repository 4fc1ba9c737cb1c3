"""World geometry for planning runs, in a local Cartesian frame (metres)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from pelagic.channel import ChannelParams, RadioMap

LOCAL_FRAME = "local_m"
GEO_FRAME = "latlon_deg"


class FrameError(TypeError):
    """Raised when data from one coordinate frame is fed to an operation for another."""


def require_frame(obj, expected: str) -> None:
    frame = getattr(obj, "frame", None)
    if frame != expected:
        raise FrameError(f"expected {expected!r} data, got {frame!r} ({type(obj).__name__})")


class TrackRangeError(ValueError):
    """Query time lies outside the span of a track."""


@dataclass(frozen=True)
class UAVLimits:
    v_min: float = 20.0
    v_max: float = 36.0
    a_max: float = 5.0
    alt_min: float = 2600.0
    alt_max: float = 5000.0

    def __post_init__(self):
        if not 0 < self.v_min <= self.v_max:
            raise ValueError(f"need 0 < v_min <= v_max, got {self.v_min}, {self.v_max}")
        if self.a_max < 0:
            raise ValueError("a_max must be >= 0")
        if not 0 < self.alt_min <= self.alt_max:
            raise ValueError("need 0 < alt_min <= alt_max")


@dataclass(frozen=True)
class VesselTrack:
    """Piecewise-linear vessel motion: ``waypoints`` is a tuple of ``(t_s, (x, y, z))``."""

    waypoints: tuple
    speed: float
    frame: str = field(default=LOCAL_FRAME, compare=False)

    def __post_init__(self):
        wps = tuple((float(t), tuple(float(c) for c in p)) for t, p in self.waypoints)
        if len(wps) < 2:
            raise ValueError("a track needs at least two waypoints")
        times = [t for t, _ in wps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("track times must be strictly increasing")
        if any(len(p) != 3 for _, p in wps):
            raise ValueError("track positions must be 3-D")
        if len({p[2] for _, p in wps}) != 1:
            raise ValueError("track altitude must be constant")
        object.__setattr__(self, "waypoints", wps)

    @classmethod
    def straight(cls, start, end, speed: float, t0: float = 0.0) -> "VesselTrack":
        if not speed > 0:
            raise ValueError("speed must be positive")
        length = math.dist(start, end)
        return cls(((t0, tuple(start)), (t0 + length / speed, tuple(end))), speed)

    @property
    def t_start(self) -> float:
        return self.waypoints[0][0]

    @property
    def t_end(self) -> float:
        return self.waypoints[-1][0]

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def positions(self, times) -> np.ndarray:
        """Positions at an array of times, shape ``(len(times), 3)``."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(t < self.t_start) or np.any(t > self.t_end):
            raise TrackRangeError(f"time outside track span [{self.t_start}, {self.t_end}]")
        knots = np.array([w[0] for w in self.waypoints])
        pts = np.array([w[1] for w in self.waypoints])
        return np.stack([np.interp(t, knots, pts[:, k]) for k in range(3)], axis=-1)


def vessel_position(track: VesselTrack, t: float) -> np.ndarray:
    require_frame(track, LOCAL_FRAME)
    return track.positions([t])[0]


def default_links() -> dict[str, ChannelParams]:
    """Per-link-class channel parameters with the maritime defaults.

    Shore links (backhaul, direct) carry the beyond-horizon penalty; the
    access and interference links do not.
    """
    base = ChannelParams()
    return {
        "access": base.with_(tx_gain_dbi=8.0, rx_gain_dbi=8.0),
        "backhaul": base.with_(tx_gain_dbi=12.0, rx_gain_dbi=8.0, horizon_excess_db_per_km=2.0),
        "direct": base.with_(tx_gain_dbi=12.0, rx_gain_dbi=8.0, horizon_excess_db_per_km=2.0),
        "interference": base.with_(tx_gain_dbi=8.0, rx_gain_dbi=30.0),
    }


FLAGSHIP_VESSEL = VesselTrack.straight((5.0e4, 0.0, 10.0), (6.8e4, 0.0, 10.0), 10.0)


@dataclass(frozen=True)
class Scenario:
    tbs_position: tuple = (0.0, 0.0, 100.0)
    sat_user_position: tuple = (5.9e4, 5.0e3, 10.0)
    vessel_track: VesselTrack = FLAGSHIP_VESSEL
    uav_limits: UAVLimits = UAVLimits()
    p_max_dbm: float = 40.0
    energy_j: float = 3.0e4
    interference_limit_dbm: float = -40.0
    tbs_power_dbm: float = 40.0
    slot_s: float = 10.0
    links: dict = field(default_factory=default_links)
    radio_map: Optional[RadioMap] = None
    frame: str = field(default=LOCAL_FRAME, compare=False)

    def __post_init__(self):
        for name in ("tbs_position", "sat_user_position"):
            value = tuple(float(c) for c in getattr(self, name))
            if len(value) != 3:
                raise ValueError(f"{name} must be 3-D")
            object.__setattr__(self, name, value)
        if not self.slot_s > 0:
            raise ValueError("slot_s must be positive")
        if not self.energy_j > 0:
            raise ValueError("energy_j must be positive")
        for name in ("p_max_dbm", "interference_limit_dbm", "tbs_power_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        missing = {"access", "backhaul", "direct", "interference"} - set(self.links)
        if missing:
            raise ValueError(f"missing link classes: {sorted(missing)}")
        require_frame(self.vessel_track, LOCAL_FRAME)
        n = self.vessel_track.duration / self.slot_s
        if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
            raise ValueError(
                f"service duration {self.vessel_track.duration} s is not a whole number of {self.slot_s} s slots"
            )

    @property
    def n_slots(self) -> int:
        return int(round(self.vessel_track.duration / self.slot_s))

    def waypoint_times(self) -> np.ndarray:
        t = self.vessel_track.t_start + self.slot_s * np.arange(self.n_slots + 1)
        return np.minimum(t, self.vessel_track.t_end)

    def slot_mid_times(self) -> np.ndarray:
        return self.vessel_track.t_start + self.slot_s * (np.arange(self.n_slots) + 0.5)

    def with_levels(self, p_max_dbm=None, energy_j=None, interference_limit_dbm=None) -> "Scenario":
        changes = {}
        if p_max_dbm is not None:
            changes["p_max_dbm"] = float(p_max_dbm)
        if energy_j is not None:
            changes["energy_j"] = float(energy_j)
        if interference_limit_dbm is not None:
            changes["interference_limit_dbm"] = float(interference_limit_dbm)
        return replace(self, **changes)

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)


def flagship(**overrides) -> Scenario:
    """The 18 km lane-following case: 180 slots of 10 s at the default levels."""
    return Scenario(**overrides)
