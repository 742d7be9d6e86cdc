"""Command-line entry point: ``tscplan generate-world | run | batch``.

Exit codes: 0 success, 1 I/O failure, 2 bad arguments, 3 mission failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .corridor import save_tsc
from .errors import ConfigError
from .global_path import write_path_csv
from .planner import run_mission, write_trace_csv
from .sim import format_table, percentile_summary, run_batch, write_report
from .world import generate_world, load_world, save_world

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_MISSION = 3

RESULT_SCHEMA = "result/v1"


def _triple(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _pair(text: str) -> tuple[int, int]:
    vals = _int_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected STATIC,DYNAMIC, got {text!r}")
    return vals[0], vals[1]


def _world_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--static", type=int, help="number of static obstacles")
    p.add_argument("--dynamic", type=int, help="number of dynamic obstacles")
    p.add_argument("--obstacles", type=_pair, metavar="S,D", help="static,dynamic counts in one flag")
    p.add_argument("--extent", type=_triple, metavar="X,Y,Z", help="world size in meters")
    p.add_argument("--config", type=Path, help="config/v1 JSON file; flags override it")


def _planner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--N", type=int, help="horizon steps")
    p.add_argument("--h", type=float, help="time step (s)")
    p.add_argument("--vmax", type=float, help="reachable-space speed (m/s)")
    p.add_argument("--vsamp", type=float, help="reference sampling speed (m/s)")
    p.add_argument("--thresh-dist", type=float, help="window advance threshold (m)")
    p.add_argument("--clearance", type=float, help="global path clearance (m)")
    p.add_argument("--max-polyhedra", type=int, help="polyhedra per corridor step")
    p.add_argument("--start", type=_triple, metavar="X,Y,Z")
    p.add_argument("--goal", type=_triple, metavar="X,Y,Z")
    p.add_argument("--realtime", action="store_true", help="skip iterations whose wall time exceeds h")
    p.add_argument("-o", "--output", type=Path, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tscplan", description="Temporal safe corridor MIQP planner")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-world", help="write a seeded random world")
    g.add_argument("--seed", type=int, required=True)
    _world_flags(g)
    g.add_argument("--start", type=_triple, metavar="X,Y,Z", help="mission start kept free of obstacles")
    g.add_argument("--goal", type=_triple, metavar="X,Y,Z", help="mission goal kept free of obstacles")
    g.add_argument("-o", "--output", type=Path, help="world file (default world_<seed>.json)")

    r = sub.add_parser("run", help="fly one mission")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--seed", type=int)
    src.add_argument("--world", type=Path, help="world/v1 file")
    _world_flags(r)
    _planner_flags(r)
    r.add_argument("--dump-corridors", action="store_true", help="write one tsc/v1 file per iteration")

    b = sub.add_parser("batch", help="fly one mission per seed")
    b.add_argument("--seeds", type=_int_list)
    _world_flags(b)
    _planner_flags(b)
    b.add_argument("--jobs", type=int, default=1)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    world = cfg.world
    w_over = {}
    if getattr(args, "obstacles", None):
        w_over["n_static"], w_over["n_dynamic"] = args.obstacles
    if getattr(args, "static", None) is not None:
        w_over["n_static"] = args.static
    if getattr(args, "dynamic", None) is not None:
        w_over["n_dynamic"] = args.dynamic
    if getattr(args, "extent", None):
        w_over["extent"] = args.extent
    start = getattr(args, "start", None) or cfg.start
    goal = getattr(args, "goal", None) or cfg.goal
    if getattr(args, "start", None) or getattr(args, "goal", None):
        # keep obstacles off the mission endpoints
        radius = max((z[1] for z in world.clear_zones), default=1.0)
        w_over["clear_zones"] = [[list(map(float, start)), radius], [list(map(float, goal)), radius]]
    world = dataclasses.replace(world, **w_over)
    world.validate()

    planner = cfg.planner
    p_over = {}
    for flag, key in (("N", "N"), ("h", "h"), ("vsamp", "v_samp"), ("thresh_dist", "thresh_dist"),
                      ("clearance", "clearance"), ("max_polyhedra", "max_polyhedra")):
        val = getattr(args, flag, None)
        if val is not None:
            p_over[key] = val
    if getattr(args, "realtime", False):
        p_over["realtime"] = True
    if "N" in p_over and p_over["N"] != planner.N:
        p_over["max_failure_offset"] = p_over["N"]
    if getattr(args, "vmax", None) is not None:
        p_over["limits"] = dataclasses.replace(planner.limits, v_max=args.vmax)
    planner = dataclasses.replace(planner, **p_over)

    seeds = cfg.seeds
    if getattr(args, "seeds", None) is not None:
        seeds = args.seeds
        if not seeds:
            raise ConfigError("need at least one seed")
    elif getattr(args, "seed", None) is not None:
        seeds = [args.seed]
    if len(set(seeds)) != len(seeds):
        raise ConfigError("duplicate seeds")
    out = getattr(args, "output", None)
    return RunConfig(
        world,
        planner,
        seeds,
        str(out) if out is not None else cfg.output_dir,
        start,
        goal,
    )


def cmd_generate_world(args) -> int:
    cfg = resolve_config(args)
    world = generate_world(args.seed, cfg.world)
    path = args.output or Path(f"world_{args.seed}.json")
    save_world(world, path)
    print(f"{path} seed={args.seed}")
    return EXIT_OK


def _result_dict(result, cfg: RunConfig) -> dict:
    d = {"schema": RESULT_SCHEMA, **result.to_dict()}
    d["planner_config"] = cfg.planner.to_dict()
    d["world_config"] = cfg.world.to_dict()
    d["start"] = list(cfg.start)
    d["goal"] = list(cfg.goal)
    if result.timings is not None and len(result.timings):
        d["timing_ms"] = {
            name: percentile_summary(result.timings[:, i]) for i, name in enumerate(("corridor", "solver", "total"))
        }
    return d


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    if args.world is not None:
        world = load_world(args.world)
    else:
        world = generate_world(cfg.seeds[0], cfg.world)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_mission(world, cfg.start, cfg.goal, cfg.planner, keep_corridors=args.dump_corridors)
    result.seed = world.seed
    trace = result.trace
    write_trace_csv(trace.reports, out / "trace.csv")
    (out / "result.json").write_text(json.dumps(_result_dict(result, cfg), indent=2), encoding="utf-8")
    if trace.global_path is not None:
        write_path_csv(trace.global_path, out / "path.csv")
    if args.dump_corridors:
        cdir = out / "corridors"
        cdir.mkdir(exist_ok=True)
        for rep in trace.reports:
            if rep.tsc is not None:
                save_tsc(rep.tsc, cdir / f"iter_{rep.iteration:05d}.json")
    status = "success" if result.success else f"failure ({result.failure_reason})"
    print(f"seed={world.seed} {status} distance={result.flight_distance:.2f} m time={result.flight_time:.2f} s")
    print(f"outputs in {out}")
    return EXIT_OK if result.success else EXIT_MISSION


def cmd_batch(args) -> int:
    cfg = resolve_config(args)
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results, agg = run_batch(cfg.seeds, cfg.world, cfg.planner, cfg.start, cfg.goal, jobs=args.jobs)
    for r in results:
        if r.trace is not None:
            write_trace_csv(r.trace.reports, out / f"trace_{r.seed}.csv")
    write_report(out / "report.json", results, agg, cfg.world, cfg.planner, cfg.start, cfg.goal)
    print(format_table(results, agg))
    print(f"report: {out / 'report.json'}")
    return EXIT_OK if all(r.success for r in results) else EXIT_MISSION


COMMANDS = {"generate-world": cmd_generate_world, "run": cmd_run, "batch": cmd_batch}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.command == "batch" and args.seeds is None and not args.config:
        parser.print_usage(sys.stderr)
        print("tscplan batch: error: --seeds or --config is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"tscplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"tscplan: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
