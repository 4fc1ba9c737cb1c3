"""Parameter sweeps over (P_max, E, I) comparing the planner with its baselines."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from pelagic.planner.baselines import baseline_shore, baseline_terrestrial
from pelagic.planner.model import ConstraintSet
from pelagic.planner.trajectory import INITS, PlanInfeasible, plan_trajectory
from pelagic.scenario.config import (
    ConfigError,
    as_number,
    dump_toml,
    load_toml,
    reject_unknown,
    scenario_from_dict,
    scenario_to_dict,
)
from pelagic.scenario.model import Scenario, flagship

log = logging.getLogger(__name__)

ALGORITHMS = ("proposed", "terrestrial", "shore")
SWEEP_HEADER = ["algorithm", "p_max_dbm", "energy_j", "interference_dbm",
                "min_rate_bpshz", "energy_used_j", "runtime_s", "status"]
DEFAULT_P_MAX = tuple(float(p) for p in range(22, 41, 2))
DEFAULT_ENERGY = (1.5e3, 3.0e4)
DEFAULT_INTERFERENCE = (-55.0, -40.0)
BUILTIN_CONFIGS = ("flagship",)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario = field(default_factory=flagship)
    p_max_dbm: tuple = DEFAULT_P_MAX
    energy_j: tuple = DEFAULT_ENERGY
    interference_dbm: tuple = DEFAULT_INTERFERENCE
    seed: int = 0
    output_dir: str = "results"
    init: str = "overhead-loiter"

    def __post_init__(self):
        for name, lo, hi in (("p_max_dbm", -30.0, 60.0), ("energy_j", 1e-9, 1e9), ("interference_dbm", -200.0, 30.0)):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise ConfigError(f"sweep list {name} is empty")
            for v in values:
                if not (math.isfinite(v) and lo <= v <= hi):
                    raise ConfigError(f"sweep value {name}={v} outside [{lo}, {hi}]")
            object.__setattr__(self, name, values)
        if self.init not in INITS:
            raise ConfigError(f"unknown init {self.init!r}; choose from {', '.join(INITS)}")

    @property
    def tuples(self) -> list[tuple[float, float, float]]:
        return sorted((p, e, i) for p in self.p_max_dbm for e in self.energy_j for i in self.interference_dbm)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "output_dir": self.output_dir,
            "sweep": {"p_max_dbm": list(self.p_max_dbm), "energy_j": list(self.energy_j),
                      "interference_dbm": list(self.interference_dbm)},
            "planner": {"init": self.init},
            "scenario": scenario_to_dict(self.scenario),
        }

    def to_toml(self) -> str:
        return dump_toml(self.to_dict()) + "\n"


def config_from_dict(data: Mapping[str, Any], base_dir: Optional[Path] = None) -> ExperimentConfig:
    reject_unknown(data, ("seed", "output_dir", "sweep", "planner", "scenario"), "config")
    kwargs: dict[str, Any] = {}
    if "seed" in data:
        if isinstance(data["seed"], bool) or not isinstance(data["seed"], int):
            raise ConfigError("seed must be an integer")
        kwargs["seed"] = data["seed"]
    if "output_dir" in data:
        kwargs["output_dir"] = str(data["output_dir"])
    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("[sweep] must be a table")
    reject_unknown(sweep, ("p_max_dbm", "energy_j", "interference_dbm"), "[sweep]")
    for key, values in sweep.items():
        if not isinstance(values, list):
            raise ConfigError(f"sweep.{key} must be a list")
        kwargs[key] = tuple(as_number(v, f"sweep.{key}") for v in values)
    planner = data.get("planner", {})
    if not isinstance(planner, dict):
        raise ConfigError("[planner] must be a table")
    reject_unknown(planner, ("init",), "[planner]")
    if "init" in planner:
        kwargs["init"] = str(planner["init"])
    scenario = data.get("scenario", {})
    if not isinstance(scenario, dict):
        raise ConfigError("[scenario] must be a table")
    kwargs["scenario"] = scenario_from_dict(scenario, base_dir)
    return ExperimentConfig(**kwargs)


def load_config(source: str | Path) -> ExperimentConfig:
    """Load a TOML experiment config; the name ``flagship`` gives the built-in defaults."""
    if str(source) in BUILTIN_CONFIGS:
        return ExperimentConfig()
    path = Path(source)
    return config_from_dict(load_toml(path), path.parent)


@dataclass(frozen=True)
class SweepRow:
    algorithm: str
    p_max_dbm: float
    energy_j: float
    interference_dbm: float
    min_rate_bpshz: float
    energy_used_j: float
    runtime_s: Optional[float]
    status: str = "ok"

    @property
    def key(self):
        return (self.p_max_dbm, self.energy_j, self.interference_dbm, ALGORITHMS.index(self.algorithm))


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def _rows_for_p(scenario: Scenario, p_max: float, energies, interferences, init: str,
                record_runtime: bool) -> list[SweepRow]:
    """All tuples sharing one P_max; the unconstrained terrestrial plan is computed once."""
    rows = []
    stamp = (lambda s: s) if record_runtime else (lambda s: None)
    base = scenario.with_levels(p_max_dbm=p_max)
    loose = replace(ConstraintSet.from_scenario(base), interference_enabled=False, energy_enabled=False)
    try:
        unconstrained, t_loose = _timed(lambda: plan_trajectory(base, loose, init))
        loose_error = None
    except PlanInfeasible as exc:
        unconstrained, t_loose, loose_error = None, 0.0, str(exc)
    shore, t_shore = _timed(lambda: baseline_shore(base))

    for e in energies:
        for i in interferences:
            sc = scenario.with_levels(p_max, e, i)
            cons = ConstraintSet.from_scenario(sc)
            try:
                plan, t = _timed(lambda: plan_trajectory(sc, cons, init))
                rows.append(SweepRow("proposed", p_max, e, i, plan.min_rate, plan.energy_used_j, stamp(t)))
            except PlanInfeasible as exc:
                rows.append(SweepRow("proposed", p_max, e, i, math.nan, math.nan, None, f"infeasible: {exc}"))
            if unconstrained is None:
                rows.append(SweepRow("terrestrial", p_max, e, i, math.nan, math.nan, None,
                                     f"infeasible: {loose_error}"))
            else:
                plan, t = _timed(lambda: baseline_terrestrial(sc, cons, init, unconstrained_plan=unconstrained))
                rows.append(SweepRow("terrestrial", p_max, e, i, plan.min_rate, plan.energy_used_j,
                                     stamp(t + t_loose)))
            # the shore link uses the fixed TBS power, not the UAV's energy budget
            rows.append(SweepRow("shore", p_max, e, i, shore, 0.0, stamp(t_shore)))
    return rows


def run_sweep(config: ExperimentConfig, jobs: int = 1, record_runtime: bool = False) -> list[SweepRow]:
    """Evaluate every (P_max, E, I) tuple with all three algorithms.

    Rows are sorted by tuple and then algorithm, so the output does not
    depend on `jobs`. Wall-clock runtimes are recorded only on request,
    because they are the one non-deterministic column.
    """
    p_values = sorted(set(config.p_max_dbm))
    energies = sorted(set(config.energy_j))
    interferences = sorted(set(config.interference_dbm))
    args = [(config.scenario, p, energies, interferences, config.init, record_runtime) for p in p_values]
    rows: list[SweepRow] = []
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(args))) as pool:
            for part in pool.map(_rows_for_p, *zip(*args)):
                rows.extend(part)
    else:
        for a in args:
            rows.extend(_rows_for_p(*a))
            log.info("sweep: P_max=%g dBm done", a[1])
    return sorted(rows, key=lambda r: r.key)


def _cell(v: Optional[float]) -> str:
    if v is None:
        return ""
    return repr(float(v))


def sweep_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in rows:
        writer.writerow([r.algorithm, _cell(r.p_max_dbm), _cell(r.energy_j), _cell(r.interference_dbm),
                         _cell(r.min_rate_bpshz), _cell(r.energy_used_j), _cell(r.runtime_s), r.status])
    return buf.getvalue()


def parse_sweep_csv(text: str) -> list[SweepRow]:
    reader = csv.reader(text.splitlines())
    if next(reader, None) != SWEEP_HEADER:
        raise ValueError(f"expected sweep header {','.join(SWEEP_HEADER)}")
    rows = []
    for line in reader:
        if not line:
            continue
        alg, p, e, i, rate, used, rt, status = line
        rows.append(SweepRow(alg, float(p), float(e), float(i), float(rate), float(used),
                             float(rt) if rt else None, status))
    return rows


def sweep_to_gnuplot(rows: list[SweepRow]) -> str:
    """One data block per (algorithm, E, I), min rate against P_max; blocks split by two blank lines."""
    blocks = []
    groups: dict[tuple, list[SweepRow]] = {}
    for r in rows:
        groups.setdefault((r.algorithm, r.energy_j, r.interference_dbm), []).append(r)
    for (alg, e, i), group in sorted(groups.items(), key=lambda kv: (ALGORITHMS.index(kv[0][0]), kv[0][1:])):
        lines = [f"# algorithm={alg} energy_j={e!r} interference_dbm={i!r}", "# p_max_dbm min_rate_bpshz"]
        lines += [f"{r.p_max_dbm!r} {r.min_rate_bpshz!r}" for r in sorted(group, key=lambda r: r.p_max_dbm)]
        blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + "\n"


def write_sweep(rows: list[SweepRow], out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "sweep.csv"
    dat_path = out / "sweep.dat"
    csv_path.write_text(sweep_to_csv(rows), encoding="utf-8")
    dat_path.write_text(sweep_to_gnuplot(rows), encoding="utf-8")
    return csv_path, dat_path
