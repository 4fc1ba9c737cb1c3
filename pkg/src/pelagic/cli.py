"""Command-line entry point: ``pelagic {plan,sweep,heatmap,endurance,radiomap}``.

Exit codes: 0 success, 1 planning infeasible, 2 configuration or input format error.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from pelagic.channel import radiomap_build, read_samples_csv, synthetic_samples, write_radiomap
from pelagic.experiments import ExperimentConfig, load_config, run_sweep, write_sweep
from pelagic.planner.io import write_plan
from pelagic.planner.trajectory import INITS, PlanInfeasible, plan_trajectory
from pelagic.platform import endurance_feasible, load_catalogue
from pelagic.scenario.ais import DEFAULT_COASTLINE, AisFormatError, ais_ingest, synthetic_ais
from pelagic.scenario.config import ConfigError
from pelagic.scenario.heatmap import density_heatmap, write_heatmap

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG = 0, 1, 2
LOG_LEVELS = {"error": logging.ERROR, "warning": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
log = logging.getLogger("pelagic")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="experiment config (TOML), or 'flagship' for the built-in defaults")
    common.add_argument("--out", metavar="DIR", help="output directory (default: config output_dir, else '.')")
    common.add_argument("--seed", type=int, metavar="N", help="seed for synthetic inputs (overrides the config)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="pelagic",
        description="Maritime UAV relay planning: trajectory and power for a lane-bound vessel.",
        epilog="Exit codes: 0 success, 1 infeasible plan, 2 config/format error. "
               "Set PELAGIC_LOG=error|info|debug for log verbosity.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("plan", parents=[common], help="plan one trajectory and write plan.csv")
    p.add_argument("--init", choices=INITS, help="initial pattern (default from config)")
    p.add_argument("--p-max-dbm", type=float, help="override the UAV power limit (dBm)")
    p.add_argument("--energy-j", type=float, help="override the communication energy budget (J)")
    p.add_argument("--interference-dbm", type=float, help="override the interference limit (dBm)")

    s = sub.add_parser("sweep", parents=[common], help="run the (P_max, E, I) sweep and write sweep.csv/.dat")
    s.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes (default 1)")
    s.add_argument("--timing", action="store_true",
                   help="fill runtime_s with wall-clock seconds (makes the CSV non-reproducible)")

    h = sub.add_parser("heatmap", parents=[common], help="distinct-vessel density heatmap from AIS")
    h.add_argument("--ais", metavar="CSV", help="AIS CSV input (default: seeded synthetic traffic)")
    h.add_argument("--lat-bin-deg", type=float, default=0.1, help="latitude bin (default 0.1)")
    h.add_argument("--offshore-bin-km", type=float, default=10.0, help="offshore-distance bin (default 10)")
    h.add_argument("--window-s", type=float, default=3600.0, help="time window (default 3600)")

    e = sub.add_parser("endurance", parents=[common], help="round-trip feasibility of the UAV catalogue")
    e.add_argument("--round-trip-km", type=float, default=740.0, help="required round trip (default 740)")
    e.add_argument("--ranges", choices=("optimistic", "midpoint", "pessimistic"), default="optimistic",
                   help="how to read ranged catalogue figures such as 4-8 h (default optimistic)")

    r = sub.add_parser("radiomap", parents=[common], help="build a radio map from measurement samples")
    r.add_argument("--samples", metavar="CSV", help="samples with header x,y,excess_db (default: synthetic)")
    r.add_argument("--origin", type=float, nargs=2, default=(4.5e4, -1.0e4), metavar=("X", "Y"),
                   help="grid origin in metres (default 45000 -10000)")
    r.add_argument("--extent", type=float, nargs=2, default=(3.0e4, 2.0e4), metavar=("W", "H"),
                   help="grid extent in metres (default 30000 20000)")
    r.add_argument("--cell-size-m", type=float, default=1000.0, help="cell size (default 1000)")
    r.add_argument("--n-samples", type=int, default=2000, help="synthetic sample count (default 2000)")
    return parser


def _config(args) -> ExperimentConfig:
    return load_config(args.config) if args.config else ExperimentConfig()


def _out_dir(args, config: ExperimentConfig) -> Path:
    if args.out:
        out = Path(args.out)
    elif args.config:
        out = Path(config.output_dir)
    else:
        out = Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args, config: ExperimentConfig) -> int:
    return config.seed if args.seed is None else args.seed


def cmd_plan(args, out) -> int:
    config = _config(args)
    scenario = config.scenario.with_levels(args.p_max_dbm, args.energy_j, args.interference_dbm)
    plan = plan_trajectory(scenario, init=args.init or config.init)
    path = write_plan(plan, _out_dir(args, config) / "plan.csv")
    print(f"min_rate={plan.min_rate:.6f} bps/Hz energy_used_j={plan.energy_used_j:.3f} "
          f"avg_power_dbm={plan.average_power_dbm:.3f} slots={plan.n_slots}", file=out)
    print(f"wrote {path}", file=out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    config = _config(args)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    rows = run_sweep(config, jobs=args.jobs, record_runtime=args.timing)
    csv_path, dat_path = write_sweep(rows, _out_dir(args, config))
    bad = [r for r in rows if r.status != "ok"]
    print(f"{len(rows)} rows ({len(bad)} infeasible); wrote {csv_path} and {dat_path}", file=out)
    return EXIT_INFEASIBLE if bad else EXIT_OK


def cmd_heatmap(args, out) -> int:
    config = _config(args)
    if args.ais:
        try:
            tracks = ais_ingest(args.ais)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.ais}: {exc.strerror or exc}") from None
        skipped = tracks.skipped
        tracks = tracks.tracks
    else:
        tracks, skipped = synthetic_ais(_seed(args, config)), 0
    hm = density_heatmap(tracks, DEFAULT_COASTLINE, (args.lat_bin_deg, args.offshore_bin_km), args.window_s)
    path = write_heatmap(hm, _out_dir(args, config) / "heatmap.csv")
    print(f"{len(tracks)} vessels, {hm.total} vessel-cell-window counts, max cell {hm.counts.max(initial=0)}, "
          f"{hm.dropped} reports outside the grid, {skipped} malformed rows", file=out)
    print(f"wrote {path}", file=out)
    return EXIT_OK


def cmd_endurance(args, out) -> int:
    if args.round_trip_km < 0:
        raise ConfigError("--round-trip-km must be >= 0")
    if args.config:
        _config(args)  # validated for consistency with the other subcommands
    lines = [f"{'model':<12} {'drive':<8} {'speed_kmh':>9} {'flight_h':>8} {'range_km':>8}  verdict"]
    for spec in load_catalogue(args.ranges):
        res = endurance_feasible(spec, args.round_trip_km)
        speed = spec.cruise_kmh if spec.cruise_kmh is not None else spec.max_kmh
        verdict = "indeterminate" if res.indeterminate else ("feasible" if res.feasible else "infeasible")
        lines.append(f"{spec.model:<12} {spec.drive:<8} {speed if speed is not None else '-':>9} "
                     f"{spec.max_flight_h:>8g} {res.range_km if res.range_km is not None else '-':>8}  {verdict}")
    print(f"round trip {args.round_trip_km:g} km ({args.ranges} reading of ranged figures)", file=out)
    print("\n".join(lines), file=out)
    return EXIT_OK


def cmd_radiomap(args, out) -> int:
    config = _config(args)
    if args.samples:
        try:
            samples = read_samples_csv(args.samples)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.samples}: {exc.strerror or exc}") from None
    else:
        samples = synthetic_samples(_seed(args, config), args.n_samples, args.origin, args.extent)
    rmap = radiomap_build(samples, args.origin, args.cell_size_m, args.extent)
    path = write_radiomap(rmap, _out_dir(args, config) / "radiomap.csv")
    filled = int((rmap.sample_count > 0).sum())
    print(f"{len(samples)} samples, {rmap.rejected} outside the extent, "
          f"{filled}/{rmap.grid.size} cells measured", file=out)
    print(f"wrote {path}", file=out)
    return EXIT_OK


COMMANDS = {"plan": cmd_plan, "sweep": cmd_sweep, "heatmap": cmd_heatmap,
            "endurance": cmd_endurance, "radiomap": cmd_radiomap}


def _setup_logging() -> None:
    level = os.environ.get("PELAGIC_LOG", "error").strip().lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None, out: Optional[io.TextIOBase] = None) -> int:
    _setup_logging()
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors and 0 for --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except PlanInfeasible as exc:
        print(f"pelagic: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, AisFormatError) as exc:
        print(f"pelagic: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"pelagic: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
