"""Scenario definitions as TOML, with unit-suffixed keys and strict validation.

Every field defaults to the flagship case, so an empty file is a valid
scenario. Unknown keys are rejected rather than ignored.
"""

from __future__ import annotations

import dataclasses
import math
import sys
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from pelagic.channel import ChannelParams, read_radiomap
from pelagic.scenario.model import FLAGSHIP_VESSEL, Scenario, UAVLimits, VesselTrack, default_links


class ConfigError(ValueError):
    """Malformed, out-of-range or unknown configuration content."""


# key -> (Scenario field, allowed closed range)
_SCALARS = {
    "p_max_dbm": ("p_max_dbm", (-30.0, 60.0)),
    "energy_j": ("energy_j", (1e-9, 1e9)),
    "interference_limit_dbm": ("interference_limit_dbm", (-200.0, 30.0)),
    "tbs_power_dbm": ("tbs_power_dbm", (-30.0, 70.0)),
    "slot_s": ("slot_s", (1e-3, 3600.0)),
}
_POINTS = {"tbs_position_m": "tbs_position", "sat_user_position_m": "sat_user_position"}
_UAV = {
    "v_min_mps": "v_min",
    "v_max_mps": "v_max",
    "a_max_mps2": "a_max",
    "alt_min_m": "alt_min",
    "alt_max_m": "alt_max",
}
_VESSEL = ("start_m", "end_m", "speed_mps", "t0_s")
_LINK_KEYS = tuple(f.name for f in dataclasses.fields(ChannelParams))
LINK_CLASSES = ("access", "backhaul", "direct", "interference")


def reject_unknown(table: Mapping, allowed, where: str) -> None:
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def as_number(value, where: str, bounds=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where} must be finite")
    if bounds is not None and not bounds[0] <= value <= bounds[1]:
        raise ConfigError(f"{where}={value} outside [{bounds[0]}, {bounds[1]}]")
    return value


def _point(value, where: str) -> tuple:
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{where} must be a list of 3 numbers")
    return tuple(as_number(v, f"{where}[{i}]") for i, v in enumerate(value))


def _table(data: Mapping, key: str, where: str) -> Mapping:
    value = data.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{where}.{key} must be a table")
    return value


def scenario_from_dict(data: Mapping[str, Any], base_dir: Path | None = None) -> Scenario:
    """Build a :class:`Scenario` from a parsed ``[scenario]`` table."""
    allowed = set(_SCALARS) | set(_POINTS) | {"vessel", "uav", "links", "radio_map"}
    reject_unknown(data, allowed, "[scenario]")
    kwargs: dict[str, Any] = {}
    for key, (name, bounds) in _SCALARS.items():
        if key in data:
            kwargs[name] = as_number(data[key], key, bounds)
    for key, name in _POINTS.items():
        if key in data:
            kwargs[name] = _point(data[key], key)

    vessel = _table(data, "vessel", "scenario")
    reject_unknown(vessel, _VESSEL, "[scenario.vessel]")
    if vessel:
        (t0, start), (t1, end) = FLAGSHIP_VESSEL.waypoints
        start = _point(vessel.get("start_m", list(start)), "vessel.start_m")
        end = _point(vessel.get("end_m", list(end)), "vessel.end_m")
        speed = as_number(vessel.get("speed_mps", FLAGSHIP_VESSEL.speed), "vessel.speed_mps", (1e-6, 1e3))
        t0 = as_number(vessel.get("t0_s", t0), "vessel.t0_s")
        try:
            kwargs["vessel_track"] = VesselTrack.straight(start, end, speed, t0)
        except ValueError as exc:
            raise ConfigError(f"[scenario.vessel]: {exc}") from None

    uav = _table(data, "uav", "scenario")
    reject_unknown(uav, _UAV, "[scenario.uav]")
    if uav:
        fields = {_UAV[k]: as_number(v, f"uav.{k}", (0.0, 1e5)) for k, v in uav.items()}
        try:
            kwargs["uav_limits"] = UAVLimits(**fields)
        except ValueError as exc:
            raise ConfigError(f"[scenario.uav]: {exc}") from None

    links_in = _table(data, "links", "scenario")
    reject_unknown(links_in, LINK_CLASSES, "[scenario.links]")
    links = default_links()
    for cls, overrides in links_in.items():
        if not isinstance(overrides, dict):
            raise ConfigError(f"[scenario.links.{cls}] must be a table")
        reject_unknown(overrides, _LINK_KEYS, f"[scenario.links.{cls}]")
        changes = {k: as_number(v, f"links.{cls}.{k}") for k, v in overrides.items()}
        try:
            links[cls] = links[cls].with_(**changes)
        except ValueError as exc:
            raise ConfigError(f"[scenario.links.{cls}]: {exc}") from None
    kwargs["links"] = links

    rmap = _table(data, "radio_map", "scenario")
    reject_unknown(rmap, ("path",), "[scenario.radio_map]")
    if "path" in rmap:
        path = Path(rmap["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            kwargs["radio_map"] = read_radiomap(path)
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot read radio map {path}: {exc}") from None

    try:
        return Scenario(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[scenario]: {exc}") from None


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    """Inverse of :func:`scenario_from_dict` for straight-line vessel tracks.

    The radio map is not serialized.
    """
    track = scenario.vessel_track
    if len(track.waypoints) != 2:
        raise ConfigError("only two-point vessel tracks can be written to a config")
    (t0, start), (_, end) = track.waypoints
    out: dict[str, Any] = {key: getattr(scenario, name) for key, (name, _) in _SCALARS.items()}
    out.update({key: list(getattr(scenario, name)) for key, name in _POINTS.items()})
    out["vessel"] = {"start_m": list(start), "end_m": list(end), "speed_mps": track.speed, "t0_s": t0}
    out["uav"] = {key: getattr(scenario.uav_limits, name) for key, name in _UAV.items()}
    out["links"] = {cls: dataclasses.asdict(scenario.links[cls]) for cls in LINK_CLASSES}
    return out


def parse_toml(text: str, where: str = "<config>") -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_toml(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_toml(text, str(path))


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(float(value)) if isinstance(value, float) else str(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot write {type(value).__name__} to TOML")


def dump_toml(data: Mapping[str, Any], prefix: str = "") -> str:
    """Minimal TOML writer for nested tables of scalars and lists."""
    lines = []
    tables = []
    for key, value in data.items():
        if isinstance(value, Mapping):
            tables.append((key, value))
        else:
            lines.append(f"{key} = {_toml_value(value)}")
    out = "\n".join(lines)
    for key, value in tables:
        name = f"{prefix}.{key}" if prefix else key
        body = dump_toml(value, name)
        block = f"[{name}]\n{body}" if body else f"[{name}]"
        out += ("\n\n" if out else "") + block
    return out


def load_scenario(path) -> Scenario:
    """Read a scenario file holding either a ``[scenario]`` table or bare scenario keys."""
    data = load_toml(path)
    if "scenario" in data:
        reject_unknown(data, ("scenario",), Path(path).name)
        data = data["scenario"]
    return scenario_from_dict(data, Path(path).parent)
