"""Vessel sparsity analytics: offshore distance and distinct-vessel density heatmaps."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from pelagic.scenario.ais import EARTH_RADIUS_KM, AisTrack
from pelagic.scenario.model import GEO_FRAME, require_frame

HEATMAP_HEADER = ["lat_bin", "offshore_bin", "window_index", "count"]


def _unit(lat, lon) -> np.ndarray:
    la = np.radians(np.asarray(lat, dtype=float))
    lo = np.radians(np.asarray(lon, dtype=float))
    return np.stack([np.cos(la) * np.cos(lo), np.cos(la) * np.sin(lo), np.sin(la)], axis=-1)


def _angle(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.arctan2(np.linalg.norm(np.cross(u, v), axis=-1), np.sum(u * v, axis=-1))


def offshore_distance(lat, lon, coastline: Sequence[tuple[float, float]]):
    """Great-circle distance (km) from point(s) to a (lat, lon) polyline.

    Uses a spherical Earth of radius 6371 km. Each segment is the minor
    great-circle arc between consecutive vertices; the distance to it is
    the cross-track distance when the foot of the perpendicular falls on
    the arc and the nearer endpoint distance otherwise.
    """
    coast = np.asarray(coastline, dtype=float)
    if coast.ndim != 2 or coast.shape[0] == 0 or coast.shape[1] != 2:
        raise ValueError("coastline must be a non-empty sequence of (lat, lon) pairs")
    p = _unit(lat, lon)
    scalar = p.ndim == 1
    p = np.atleast_2d(p)
    verts = _unit(coast[:, 0], coast[:, 1])

    best = np.min(_angle(p[:, None, :], verts[None, :, :]), axis=1)
    for a, b in zip(verts[:-1], verts[1:]):
        n = np.cross(a, b)
        nn = np.linalg.norm(n)
        if nn < 1e-15:
            continue
        n = n / nn
        s = p @ n
        foot = p - s[:, None] * n
        on_arc = (np.cross(a, foot) @ n >= 0) & (np.cross(foot, b) @ n >= 0) & (np.linalg.norm(foot, axis=1) > 0)
        cross = np.abs(np.arcsin(np.clip(s, -1.0, 1.0)))
        best = np.where(on_arc, np.minimum(best, cross), best)
    out = EARTH_RADIUS_KM * best
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class Heatmap:
    counts: np.ndarray  # (lat bin, offshore bin, window)
    lat_edges: np.ndarray
    offshore_edges_km: np.ndarray
    t0: float
    window_s: float
    dropped: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def density_heatmap(
    tracks: Iterable[AisTrack],
    coastline: Sequence[tuple[float, float]],
    grid_spec: tuple[float, float] = (0.1, 10.0),
    window_s: float = 3600.0,
    lat_range: tuple[float, float] = (22.5, 37.3),
    offshore_range_km: tuple[float, float] = (20.0, 30.0),
    t0: Optional[float] = None,
    n_windows: Optional[int] = None,
) -> Heatmap:
    """Count distinct vessels per (latitude bin, offshore bin, time window).

    A vessel contributes at most once to a cell per window, however many
    reports it makes there. Reports outside the grid or the time span are
    dropped and counted. `t0` defaults to the earliest report and
    `n_windows` to the number needed to cover the last one.
    """
    lat_bin, off_bin = grid_spec
    if not (lat_bin > 0 and off_bin > 0 and window_s > 0):
        raise ValueError("bin sizes and window must be positive")
    tracks = list(tracks)
    for track in tracks:
        require_frame(track, GEO_FRAME)
    n_lat = max(1, int(round((lat_range[1] - lat_range[0]) / lat_bin)))
    n_off = max(1, int(round((offshore_range_km[1] - offshore_range_km[0]) / off_bin)))
    lat_edges = lat_range[0] + lat_bin * np.arange(n_lat + 1)
    off_edges = offshore_range_km[0] + off_bin * np.arange(n_off + 1)

    stamps = [r.timestamp for t in tracks for r in t.records]
    if t0 is None:
        t0 = min(stamps) if stamps else 0.0
    if n_windows is None:
        n_windows = int(math.floor((max(stamps) - t0) / window_s)) + 1 if stamps else 1
    counts = np.zeros((n_lat, n_off, n_windows), dtype=int)
    dropped = 0

    for track in tracks:
        if not track.records:
            continue
        lat = np.array([r.lat for r in track.records])
        lon = np.array([r.lon for r in track.records])
        ts = np.array([r.timestamp for r in track.records])
        dist = np.atleast_1d(offshore_distance(lat, lon, coastline))
        i = np.floor((lat - lat_range[0]) / lat_bin).astype(int)
        j = np.floor((dist - offshore_range_km[0]) / off_bin).astype(int)
        w = np.floor((ts - t0) / window_s).astype(int)
        inside = (
            (lat >= lat_range[0]) & (lat < lat_range[1]) & (i >= 0) & (i < n_lat)
            & (dist >= offshore_range_km[0]) & (dist < offshore_range_km[1]) & (j >= 0) & (j < n_off)
            & (w >= 0) & (w < n_windows)
        )
        dropped += int(np.count_nonzero(~inside))
        cells = set(zip(i[inside].tolist(), j[inside].tolist(), w[inside].tolist()))
        for cell in cells:
            counts[cell] += 1
    return Heatmap(counts, lat_edges, off_edges, float(t0), float(window_s), dropped)


def write_heatmap(hm: Heatmap, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEATMAP_HEADER)
        for (i, j, w), c in np.ndenumerate(hm.counts):
            writer.writerow([i, j, w, int(c)])
    return path


def read_heatmap_counts(path) -> np.ndarray:
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != HEATMAP_HEADER:
            raise ValueError(f"{path}: expected header {','.join(HEATMAP_HEADER)}")
        rows = [tuple(int(v) for v in row) for row in reader]
    if not rows:
        return np.zeros((0, 0, 0), dtype=int)
    shape = tuple(max(r[k] for r in rows) + 1 for k in range(3))
    counts = np.zeros(shape, dtype=int)
    for i, j, w, c in rows:
        counts[i, j, w] = c
    return counts
