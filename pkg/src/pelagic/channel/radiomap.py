"""Gridded radio map of excess large-scale loss, built from measurements.

Cell ``(i, j)`` covers ``[x0 + i*c, x0 + (i+1)*c) x [y0 + j*c, y0 + (j+1)*c)``;
``i`` runs along x. Lookups interpolate bilinearly between cell centres and
clamp to the edge outside the grid.
"""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

CSV_HEADER = ["i", "j", "excess_db", "samples"]


@dataclass(frozen=True)
class RadioMap:
    origin: tuple[float, float]
    cell_size_m: float
    grid: np.ndarray
    sample_count: np.ndarray
    rejected: int = field(default=0, compare=False)

    def __post_init__(self):
        if not self.cell_size_m > 0:
            raise ValueError("cell_size_m must be positive")
        grid = np.array(self.grid, dtype=float)
        counts = np.array(self.sample_count, dtype=int)
        if grid.ndim != 2 or grid.shape != counts.shape or grid.size == 0:
            raise ValueError("grid and sample_count must be matching non-empty 2-D arrays")
        if np.any(counts < 0):
            raise ValueError("sample counts must be >= 0")
        grid[counts == 0] = 0.0
        grid.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "sample_count", counts)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape

    @property
    def extent(self) -> tuple[float, float]:
        return (self.shape[0] * self.cell_size_m, self.shape[1] * self.cell_size_m)

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        c = self.cell_size_m
        return (self.origin[0] + (i + 0.5) * c, self.origin[1] + (j + 0.5) * c)

    def lookup(self, position) -> float:
        return radiomap_lookup(self, position)

    def __eq__(self, other):
        if not isinstance(other, RadioMap):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.cell_size_m == other.cell_size_m
            and np.array_equal(self.grid, other.grid)
            and np.array_equal(self.sample_count, other.sample_count)
        )

    __hash__ = None


def empty_radiomap(origin, cell_size_m: float, extent) -> RadioMap:
    shape = _grid_shape(cell_size_m, extent)
    return RadioMap(origin, cell_size_m, np.zeros(shape), np.zeros(shape, dtype=int))


def _grid_shape(cell_size_m: float, extent) -> tuple[int, int]:
    w, h = float(extent[0]), float(extent[1])
    if not (w > 0 and h > 0):
        raise ValueError("extent must be positive")
    if not cell_size_m > 0:
        raise ValueError("cell_size_m must be positive")
    return (max(1, math.ceil(w / cell_size_m)), max(1, math.ceil(h / cell_size_m)))


def radiomap_build(
    samples: Iterable[tuple[Sequence[float], float]],
    origin: Sequence[float],
    cell_size_m: float,
    extent: Sequence[float],
) -> RadioMap:
    """Average measurement samples ``(position, excess_db)`` into grid cells.

    Samples outside ``origin + [0, extent)`` are dropped and counted in
    ``RadioMap.rejected``. Cell means use exactly rounded sums, so the map
    does not depend on sample order.
    """
    nx, ny = _grid_shape(cell_size_m, extent)
    x0, y0 = float(origin[0]), float(origin[1])
    w, h = float(extent[0]), float(extent[1])
    buckets: dict[tuple[int, int], list[float]] = defaultdict(list)
    rejected = 0
    for position, excess in samples:
        x, y = float(position[0]), float(position[1])
        value = float(excess)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(value)):
            raise ValueError(f"non-finite sample {position!r}, {excess!r}")
        if not (0.0 <= x - x0 < w and 0.0 <= y - y0 < h):
            rejected += 1
            continue
        i = min(int((x - x0) // cell_size_m), nx - 1)
        j = min(int((y - y0) // cell_size_m), ny - 1)
        buckets[(i, j)].append(value)

    grid = np.zeros((nx, ny))
    counts = np.zeros((nx, ny), dtype=int)
    for (i, j), values in buckets.items():
        grid[i, j] = math.fsum(values) / len(values)
        counts[i, j] = len(values)
    return RadioMap((x0, y0), float(cell_size_m), grid, counts, rejected=rejected)


def _axis_weights(coord: float, start: float, cell: float, n: int) -> tuple[int, int, float]:
    # position in units of cell centres, clamped to the outermost centres
    s = (coord - start) / cell - 0.5
    s = min(max(s, 0.0), n - 1.0)
    k = min(int(math.floor(s)), max(n - 2, 0))
    return k, min(k + 1, n - 1), s - k


def radiomap_lookup(rmap: RadioMap, position) -> float:
    """Bilinear excess loss (dB) at ``position`` (x, y); edge value outside."""
    nx, ny = rmap.shape
    i0, i1, tx = _axis_weights(float(position[0]), rmap.origin[0], rmap.cell_size_m, nx)
    j0, j1, ty = _axis_weights(float(position[1]), rmap.origin[1], rmap.cell_size_m, ny)
    g = rmap.grid
    return float(
        (1 - tx) * (1 - ty) * g[i0, j0]
        + tx * (1 - ty) * g[i1, j0]
        + (1 - tx) * ty * g[i0, j1]
        + tx * ty * g[i1, j1]
    )


def radiomap_lookup_many(rmap: RadioMap, xy: np.ndarray) -> np.ndarray:
    """Vectorized :func:`radiomap_lookup` for an ``(..., 2)`` array."""
    xy = np.asarray(xy, dtype=float)
    nx, ny = rmap.shape
    c = rmap.cell_size_m

    def axis(coord, start, n):
        s = np.clip((coord - start) / c - 0.5, 0.0, n - 1.0)
        k = np.minimum(np.floor(s).astype(int), max(n - 2, 0))
        return k, np.minimum(k + 1, n - 1), s - k

    i0, i1, tx = axis(xy[..., 0], rmap.origin[0], nx)
    j0, j1, ty = axis(xy[..., 1], rmap.origin[1], ny)
    g = rmap.grid
    return (
        (1 - tx) * (1 - ty) * g[i0, j0]
        + tx * (1 - ty) * g[i1, j0]
        + (1 - tx) * ty * g[i0, j1]
        + tx * ty * g[i1, j1]
    )


def _sidecar(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")


def write_radiomap(rmap: RadioMap, path) -> Path:
    """Write ``path`` (cell CSV) and ``<stem>.meta.json`` (geometry)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        nx, ny = rmap.shape
        for i in range(nx):
            for j in range(ny):
                writer.writerow([i, j, repr(float(rmap.grid[i, j])), int(rmap.sample_count[i, j])])
    meta = {
        "origin_m": list(rmap.origin),
        "cell_size_m": rmap.cell_size_m,
        "extent_m": list(rmap.extent),
        "shape": list(rmap.shape),
        "rejected": rmap.rejected,
    }
    _sidecar(path).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return path


def read_radiomap(path) -> RadioMap:
    path = Path(path)
    meta = json.loads(_sidecar(path).read_text(encoding="utf-8"))
    nx, ny = meta["shape"]
    grid = np.zeros((nx, ny))
    counts = np.zeros((nx, ny), dtype=int)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
        for row in reader:
            i, j = int(row[0]), int(row[1])
            grid[i, j] = float(row[2])
            counts[i, j] = int(row[3])
    return RadioMap(tuple(meta["origin_m"]), float(meta["cell_size_m"]), grid, counts,
                    rejected=int(meta.get("rejected", 0)))


def read_samples_csv(path) -> list[tuple[tuple[float, float], float]]:
    """Read measurement samples from CSV with header ``x,y,excess_db``."""
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "y", "excess_db"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header x,y,excess_db")
        for row in reader:
            out.append(((float(row["x"]), float(row["y"])), float(row["excess_db"])))
    return out


def synthetic_samples(seed: int, n: int, origin: Sequence[float], extent: Sequence[float],
                      sigma_db: float = 3.0) -> list[tuple[tuple[float, float], float]]:
    """Seeded stand-in measurements: half-normal excess loss at uniform positions."""
    rng = np.random.default_rng(seed)
    xy = np.asarray(origin, dtype=float)[:2] + rng.random((n, 2)) * np.asarray(extent, dtype=float)[:2]
    excess = np.abs(rng.normal(0.0, sigma_db, n))
    return [((float(x), float(y)), float(e)) for (x, y), e in zip(xy, excess)]
