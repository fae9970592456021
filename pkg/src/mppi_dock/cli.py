"""Command-line entry point: ``mppi-dock run | suite | replay``.

Exit status is 0 whenever the requested work completed, whatever the
docking outcome; 2 signals a configuration error and 3 an I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .config import load_config
from .dynamics import ConfigurationError
from .scenario import DockSpec, ScenarioConfig, read_log, run_episode, run_suite, write_episode

EXIT_CONFIG = 2
EXIT_IO = 3


def _load(path) -> ScenarioConfig:
    return load_config(path) if path else ScenarioConfig()


def _cmd_run(args) -> int:
    cfg = _load(args.config)
    if args.scenario is not None and args.scenario != cfg.scenario_id:
        cfg = cfg.with_scenario(args.scenario)
    if args.workers is not None:
        cfg = dataclasses.replace(cfg, mppi=dataclasses.replace(cfg.mppi, workers=args.workers))
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    ep = run_episode(cfg, seed)
    path = write_episode(ep, args.out, plot=args.plot)
    r = ep.result
    print(f"scenario {r.scenario_id} seed {r.seed}: {r.outcome} at t={r.sim_time:.2f}s "
          f"pos_err={r.final_position_error:.3f}m min_clearance={r.min_clearance:.3f}m -> {path}")
    return 0


def _cmd_suite(args) -> int:
    cfg = _load(args.config)
    seeds = range(args.seeds) if args.seeds is not None else cfg.seeds
    scenarios = [int(s) for s in args.scenarios.split(",")]
    configs = [cfg if s == cfg.scenario_id else cfg.with_scenario(s) for s in scenarios]
    table, _ = run_suite(configs, seeds, args.out, jobs=args.jobs, plot=args.plot, write_logs=not args.no_logs)
    for row in table:
        print(f"scenario {row['scenario']}: success {row['success_rate']:.2f} over {row['episodes']} episodes "
              f"(collision {row['collision']}, timeout {row['timeout']}, starved {row['solver_starved']}), "
              f"mean pos err {row['mean_position_error']:.3f}m")
    return 0


def _cmd_replay(args) -> int:
    from .plot import emit_plot

    log_path = Path(args.log)
    log = read_log(log_path)
    sidecar = log_path.with_suffix(".json")
    if args.config:
        cfg = load_config(args.config)
        dock, vessel, d_entry = cfg.dock, cfg.vessel, cfg.perception.d_entry
    else:
        dock, vessel, d_entry = DockSpec(), ScenarioConfig().vessel, ScenarioConfig().perception.d_entry
        if sidecar.exists():
            meta = json.loads(sidecar.read_text())["dock"]
            dock = DockSpec(tuple(meta["center"]), meta["orientation"], meta["width"], meta["depth"],
                            meta["wall_thickness"])
    print(f"{log_path}: {len(log['t'])} rows, t_end={log['t'][-1]:.2f}s, final zone {log['zone'][-1]}")
    if args.plot:
        out = Path(args.out) if args.out else log_path.with_suffix(".svg")
        out.write_text(emit_plot(log, dock.build(), vessel, d_entry))
        print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mppi-dock", description="MPPI docking with LiDAR dock perception.")
    p.add_argument("-v", "--verbose", action="store_true", help="log episode progress")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one closed-loop episode")
    run.add_argument("--scenario", type=int, choices=(1, 2, 3), help="1 front, 2 side, 3 rear")
    run.add_argument("--seed", type=int)
    run.add_argument("--config", help="INI configuration file (defaults if omitted)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--plot", action="store_true", help="also write an SVG plot")
    run.add_argument("--workers", type=int, help="rollout worker threads")
    run.set_defaults(func=_cmd_run)

    suite = sub.add_parser("suite", help="run seeded episodes for several scenarios")
    suite.add_argument("--config")
    suite.add_argument("--seeds", type=int, help="number of seeds, 0..N-1 (config seeds if omitted)")
    suite.add_argument("--scenarios", default="1,2,3", help="comma-separated scenario ids")
    suite.add_argument("--out", required=True)
    suite.add_argument("--jobs", type=int, default=1, help="episodes run in parallel processes")
    suite.add_argument("--plot", action="store_true")
    suite.add_argument("--no-logs", action="store_true", help="only write the summary tables")
    suite.set_defaults(func=_cmd_suite)

    replay = sub.add_parser("replay", help="summarise or plot a trajectory log")
    replay.add_argument("--log", required=True)
    replay.add_argument("--plot", action="store_true")
    replay.add_argument("--config", help="configuration giving the dock (else the JSON sidecar)")
    replay.add_argument("--out", help="SVG path (default: next to the log)")
    replay.set_defaults(func=_cmd_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # malformed inputs (e.g. an empty or corrupt log)
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
