"""UAV capability envelopes, kinematic feasibility and communication energy."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from typing import Literal, Optional, Sequence

import numpy as np

from pelagic.scenario.model import UAVLimits

Drive = Literal["electric", "oil", "hybrid"]
RangeChoice = Literal["midpoint", "optimistic", "pessimistic"]

_NULL = {"/", ""}


def parse_figure(text: str) -> Optional[tuple[float, float]]:
    """Parse a catalogue figure: ``'/'`` -> None, ``'7'`` -> (7, 7), ``'4-8'`` -> (4, 8)."""
    text = text.strip()
    if text in _NULL:
        return None
    if "-" in text[1:]:
        lo, hi = text.split("-", 1)
        bounds = (float(lo), float(hi))
    else:
        bounds = (float(text), float(text))
    if bounds[0] > bounds[1]:
        raise ValueError(f"inverted range {text!r}")
    return bounds


def _pick(bounds: Optional[tuple[float, float]], choice: RangeChoice) -> Optional[float]:
    if bounds is None:
        return None
    lo, hi = bounds
    if choice == "optimistic":
        return hi
    if choice == "pessimistic":
        return lo
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class UAVSpec:
    model: str
    max_flight_h: float
    drive: Drive
    cruise_kmh: Optional[float] = None
    max_kmh: Optional[float] = None
    wind_resist_ms: Optional[float] = None
    company: str = ""
    kind: str = ""

    def __post_init__(self):
        if not self.max_flight_h > 0:
            raise ValueError(f"{self.model}: max_flight_h must be positive")
        if self.drive not in ("electric", "oil", "hybrid"):
            raise ValueError(f"{self.model}: unknown drive {self.drive!r}")
        if self.cruise_kmh is not None and self.max_kmh is not None and self.cruise_kmh > self.max_kmh:
            raise ValueError(f"{self.model}: cruise speed exceeds maximum speed")


def load_catalogue(choice: RangeChoice = "midpoint") -> list[UAVSpec]:
    """Commercial UAV products shipped with the package.

    Range entries such as ``70-90`` are reduced with `choice`; the default
    midpoint is the neutral reading, ``optimistic`` takes upper endpoints.
    """
    text = resources.files("pelagic").joinpath("data/uav_products.csv").read_text(encoding="utf-8")
    specs = []
    for row in csv.DictReader(text.splitlines()):
        specs.append(
            UAVSpec(
                model=row["model"],
                company=row["company"],
                kind=row["type"],
                wind_resist_ms=_pick(parse_figure(row["wind_resistance_ms"]), choice),
                cruise_kmh=_pick(parse_figure(row["cruise_kmh"]), choice),
                max_kmh=_pick(parse_figure(row["max_kmh"]), choice),
                max_flight_h=_pick(parse_figure(row["max_flight_h"]), choice),
                drive=row["drive"],
            )
        )
    return specs


@dataclass(frozen=True)
class EnduranceResult:
    model: str
    feasible: bool
    range_km: Optional[float]
    indeterminate: bool = False


def endurance_feasible(spec: UAVSpec, round_trip_km: float) -> EnduranceResult:
    """Can `spec` fly `round_trip_km` on one charge/tank?

    Range is speed times maximum flight time, using cruise speed when it is
    published and maximum speed otherwise. Without any speed figure the
    result is indeterminate and reported as not feasible.
    """
    if round_trip_km < 0:
        raise ValueError("round_trip_km must be >= 0")
    speed = spec.cruise_kmh if spec.cruise_kmh is not None else spec.max_kmh
    if speed is None:
        return EnduranceResult(spec.model, round_trip_km == 0, None, indeterminate=True)
    range_km = speed * spec.max_flight_h
    return EnduranceResult(spec.model, range_km >= round_trip_km, range_km)


@dataclass(frozen=True)
class EnergyBudget:
    total_j: float
    used_j: float = 0.0

    def __post_init__(self):
        if not 0 <= self.used_j <= self.total_j:
            raise ValueError(f"need 0 <= used ({self.used_j}) <= total ({self.total_j})")

    @property
    def remaining_j(self) -> float:
        return self.total_j - self.used_j

    def spend(self, joules: float) -> "EnergyBudget":
        return EnergyBudget(self.total_j, self.used_j + joules)


def energy_used(powers_dbm: Sequence[float], slot_s: float) -> float:
    """Transmit energy (J) of per-slot powers in dBm; ``-inf`` means off."""
    if not slot_s > 0:
        raise ValueError("slot_s must be positive")
    p = np.asarray(powers_dbm, dtype=float)
    watts = np.where(np.isneginf(p), 0.0, 10.0 ** ((p - 30.0) / 10.0))
    return math.fsum(watts.tolist()) * slot_s


@dataclass(frozen=True)
class Violation:
    kind: str  # "speed_min", "speed_max", "acceleration", "altitude_min", "altitude_max"
    index: int
    value: float
    bound: float

    def __str__(self):
        unit = {"acceleration": "m/s^2"}.get(self.kind, "m" if self.kind.startswith("altitude") else "m/s")
        where = "waypoint" if self.kind.startswith("altitude") else "slot"
        return f"{self.kind} violated at {where} {self.index}: {self.value:.6g} {unit} (bound {self.bound:.6g})"


@dataclass(frozen=True)
class KinematicsReport:
    ok: bool
    violation: Optional[Violation] = None
    max_speed: float = 0.0
    min_speed: float = 0.0
    max_accel: float = 0.0

    def __bool__(self):
        return self.ok


def _rates(q: np.ndarray, slot_s: float):
    v = np.diff(q, axis=-2) / slot_s
    speed = np.linalg.norm(v, axis=-1)
    accel = np.linalg.norm(np.diff(v, axis=-2), axis=-1) / slot_s
    return speed, accel


def kinematics_check(waypoints, slot_s: float, limits: UAVLimits = UAVLimits(), tol: float = 1e-9) -> KinematicsReport:
    """Check finite-difference speed, acceleration and altitude bounds.

    Speed on slot n is ``|q[n+1] - q[n]| / slot_s``; acceleration between
    slots n and n+1 is ``|v[n+1] - v[n]| / slot_s``. The first violation in
    slot order is reported (speed, then acceleration, then altitude).
    """
    q = np.asarray(waypoints, dtype=float)
    if q.ndim != 2 or q.shape[1] != 3 or len(q) < 2:
        raise ValueError("need at least two 3-D waypoints")
    if not slot_s > 0:
        raise ValueError("slot_s must be positive")
    speed, accel = _rates(q, slot_s)

    candidates = []
    low = np.nonzero(speed < limits.v_min * (1 - tol))[0]
    if low.size:
        candidates.append(Violation("speed_min", int(low[0]), float(speed[low[0]]), limits.v_min))
    high = np.nonzero(speed > limits.v_max * (1 + tol))[0]
    if high.size:
        candidates.append(Violation("speed_max", int(high[0]), float(speed[high[0]]), limits.v_max))
    fast = np.nonzero(accel > limits.a_max * (1 + tol) + tol)[0]
    if fast.size:
        candidates.append(Violation("acceleration", int(fast[0]), float(accel[fast[0]]), limits.a_max))
    z = q[:, 2]
    below = np.nonzero(z < limits.alt_min - tol * limits.alt_min)[0]
    if below.size:
        candidates.append(Violation("altitude_min", int(below[0]), float(z[below[0]]), limits.alt_min))
    above = np.nonzero(z > limits.alt_max + tol * limits.alt_max)[0]
    if above.size:
        candidates.append(Violation("altitude_max", int(above[0]), float(z[above[0]]), limits.alt_max))

    stats = dict(
        max_speed=float(speed.max()),
        min_speed=float(speed.min()),
        max_accel=float(accel.max()) if accel.size else 0.0,
    )
    if not candidates:
        return KinematicsReport(True, None, **stats)
    first = min(candidates, key=lambda v: v.index)
    return KinematicsReport(False, first, **stats)


def kinematics_ok_batch(waypoints: np.ndarray, slot_s: float, limits: UAVLimits, tol: float = 1e-9) -> np.ndarray:
    """Boolean mask over a batch of trajectories shaped ``(C, N+1, 3)``."""
    q = np.asarray(waypoints, dtype=float)
    speed, accel = _rates(q, slot_s)
    z = q[..., 2]
    ok = np.all(speed >= limits.v_min * (1 - tol), axis=-1)
    ok &= np.all(speed <= limits.v_max * (1 + tol), axis=-1)
    if accel.shape[-1]:
        ok &= np.all(accel <= limits.a_max * (1 + tol) + tol, axis=-1)
    ok &= np.all(z >= limits.alt_min * (1 - tol), axis=-1)
    ok &= np.all(z <= limits.alt_max * (1 + tol), axis=-1)
    return ok
