"""AIS position reports: CSV ingestion, serialization and a synthetic lane generator."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

import numpy as np

from pelagic.scenario.model import GEO_FRAME

AIS_COLUMNS = ("vessel_id", "timestamp", "lat", "lon", "speed_kn", "heading_deg")
KNOT_MPS = 1852.0 / 3600.0
EARTH_RADIUS_KM = 6371.0


class AisFormatError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class AisRecord:
    vessel_id: str
    timestamp: float
    lat: float
    lon: float
    speed_kn: float
    heading_deg: float

    def __post_init__(self):
        if not self.vessel_id:
            raise ValueError("empty vessel_id")
        for name in ("timestamp", "lat", "lon", "speed_kn", "heading_deg"):
            object.__setattr__(self, name, float(getattr(self, name)))
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite {name}")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} out of range")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} out of range")


@dataclass(frozen=True)
class AisTrack:
    vessel_id: str
    records: tuple
    frame: str = field(default=GEO_FRAME, compare=False)


@dataclass(frozen=True)
class AisIngest:
    tracks: list
    skipped: int = 0

    def __iter__(self):
        return iter(self.tracks)

    def __len__(self):
        return len(self.tracks)


Source = Union[str, Path, IO[str]]


def _open(source: Source):
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    return source


def assemble_tracks(records: Iterable[AisRecord]) -> list[AisTrack]:
    """Group by vessel (sorted ids) and order each vessel's reports by time."""
    groups: dict[str, list[AisRecord]] = defaultdict(list)
    for rec in records:
        groups[rec.vessel_id].append(rec)
    # total order on the full record keeps equal timestamps deterministic
    return [AisTrack(vid, tuple(sorted(groups[vid]))) for vid in sorted(groups)]


def ais_ingest(source: Source) -> AisIngest:
    """Read an AIS CSV into per-vessel tracks.

    Rows that fail to parse or validate are skipped and counted. An empty
    source yields no tracks; a non-empty source without the expected header
    raises :class:`AisFormatError`.
    """
    fh = _open(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return AisIngest([], 0)
        header = [h.strip() for h in header]
        missing = [c for c in AIS_COLUMNS if c not in header]
        if missing:
            raise AisFormatError(f"AIS header missing columns: {', '.join(missing)}")
        index = [header.index(c) for c in AIS_COLUMNS]
        records = []
        skipped = 0
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            try:
                if len(row) != len(header):
                    raise ValueError("wrong field count")
                vid, ts, lat, lon, sog, hdg = (row[i].strip() for i in index)
                records.append(AisRecord(vid, float(ts), float(lat), float(lon), float(sog), float(hdg)))
            except ValueError:
                skipped += 1
        return AisIngest(assemble_tracks(records), skipped)
    finally:
        if fh is not source:
            fh.close()


def write_ais(tracks: Iterable[AisTrack], dest: Source) -> None:
    fh = open(dest, "w", newline="", encoding="utf-8") if isinstance(dest, (str, Path)) else dest
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AIS_COLUMNS)
        for track in tracks:
            for r in track.records:
                writer.writerow([r.vessel_id, repr(r.timestamp), repr(r.lat), repr(r.lon),
                                 repr(r.speed_kn), repr(r.heading_deg)])
    finally:
        if fh is not dest:
            fh.close()


def ais_to_text(tracks: Iterable[AisTrack]) -> str:
    buf = io.StringIO()
    write_ais(tracks, buf)
    return buf.getvalue()


# -- synthetic traffic -------------------------------------------------------

# Stylized coast (lat, lon) running north-east; sea lies to the east.
DEFAULT_COASTLINE = ((22.5, 114.5), (25.0, 119.5), (28.0, 121.0), (30.0, 121.8), (33.0, 120.8), (37.3, 122.0))


def _offset_east(polyline: Sequence[tuple[float, float]], km: float) -> list[tuple[float, float]]:
    return [(lat, lon + km / (EARTH_RADIUS_KM * math.pi / 180.0 * math.cos(math.radians(lat))))
            for lat, lon in polyline]


def default_lanes() -> list[list[tuple[float, float]]]:
    """A coastal lane 25 km off the stylized coast and a cross lane at 30 N."""
    east_of_coast = _offset_east(DEFAULT_COASTLINE, 25.0)
    cross = [(30.0, 121.0), (30.0, 123.5)]
    return [east_of_coast, cross]


def _polyline_xy(polyline, lat0):
    k = EARTH_RADIUS_KM * 1000.0 * math.pi / 180.0
    pts = np.array(polyline, dtype=float)
    return np.column_stack([pts[:, 1] * k * math.cos(math.radians(lat0)), pts[:, 0] * k])


def synthetic_ais(
    seed: int = 0,
    n_lane_vessels: int = 60,
    n_random_vessels: int = 15,
    duration_s: float = 3 * 86400.0,
    report_s: float = 600.0,
    t0: float = 1443657600.0,
    lanes=None,
    jitter_m: float = 800.0,
    box=((29.9, 30.0), (121.0, 123.0)),
) -> list[AisTrack]:
    """Seeded sparse traffic: lane followers plus a few random movers.

    Lane vessels follow one of `lanes` at 10-16 kn with a constant lateral
    offset (std `jitter_m`) and enter at a random time; random movers start
    in `box` and wander with a drifting heading.
    """
    rng = np.random.default_rng(seed)
    lanes = default_lanes() if lanes is None else lanes
    k = EARTH_RADIUS_KM * 1000.0 * math.pi / 180.0
    records: list[AisRecord] = []

    for v in range(n_lane_vessels):
        lane = lanes[int(rng.integers(len(lanes)))]
        lat0 = float(np.mean([p[0] for p in lane]))
        xy = _polyline_xy(lane, lat0)
        if rng.random() < 0.5:
            xy = xy[::-1]
        seg = np.diff(xy, axis=0)
        seg_len = np.linalg.norm(seg, axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg_len)])
        speed_kn = float(rng.uniform(10.0, 16.0))
        speed = speed_kn * KNOT_MPS
        lateral = float(rng.normal(0.0, jitter_m))
        start_s = float(rng.uniform(-0.5 * duration_s, duration_s))
        s0 = float(rng.uniform(0.0, cum[-1]))
        times = np.arange(max(start_s, 0.0), duration_s, report_s) + float(rng.uniform(0, report_s))
        times = times[times < duration_s]
        dist = s0 + speed * (times - start_s)
        keep = (dist >= 0) & (dist <= cum[-1])
        for t, d in zip(times[keep], dist[keep]):
            i = min(int(np.searchsorted(cum, d, side="right")) - 1, len(seg) - 1)
            u = seg[i] / seg_len[i]
            p = xy[i] + u * (d - cum[i]) + lateral * np.array([-u[1], u[0]])
            heading = (math.degrees(math.atan2(u[0], u[1])) + 360.0) % 360.0
            lat = p[1] / k
            lon = p[0] / (k * math.cos(math.radians(lat0)))
            records.append(AisRecord(f"L{v:04d}", t0 + float(t), lat, lon, speed_kn, heading))

    (lat_lo, lat_hi), (lon_lo, lon_hi) = box
    for v in range(n_random_vessels):
        lat = float(rng.uniform(lat_lo, lat_hi))
        lon = float(rng.uniform(lon_lo, lon_hi))
        heading = float(rng.uniform(0.0, 360.0))
        speed_kn = float(rng.uniform(2.0, 10.0))
        t = float(rng.uniform(0.0, report_s))
        while t < duration_s:
            records.append(AisRecord(f"R{v:04d}", t0 + t, lat, lon, speed_kn, heading))
            step = speed_kn * KNOT_MPS * report_s
            lat += step * math.cos(math.radians(heading)) / k
            lon += step * math.sin(math.radians(heading)) / (k * math.cos(math.radians(lat)))
            lat = min(max(lat, -90.0), 90.0)
            lon = (lon + 180.0) % 360.0 - 180.0
            heading = (heading + float(rng.normal(0.0, 20.0))) % 360.0
            t += report_s
    return assemble_tracks(records)
