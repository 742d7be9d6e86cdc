"""Batch experiments over seeded random worlds and per-mission metrics."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyTrace
from .planner import MissionTrace, PlannerConfig, run_mission
from .world import WorldConfig, generate_world

REPORT_SCHEMA = "report/v1"
JERK_COST_NOTE = "jerk_cost = sum over executed inputs of the Euclidean norm of the jerk (m/s^3)"
METRIC_KEYS = (
    "flight_distance",
    "flight_time",
    "mean_velocity",
    "max_velocity",
    "jerk_cost",
    "comp_mean_ms",
    "comp_max_ms",
    "comp_std_ms",
)
TIMING_KEYS = ("comp_mean_ms", "comp_max_ms", "comp_std_ms")

DEFAULT_START = (1.0, 6.0, 6.0)
DEFAULT_GOAL = (49.0, 6.0, 6.0)


@dataclass(eq=False)
class MissionResult:
    success: bool
    flight_distance: float
    flight_time: float
    mean_velocity: float
    max_velocity: float
    jerk_cost: float
    comp_mean_ms: float
    comp_max_ms: float
    comp_std_ms: float
    iterations: int = 0
    skipped: int = 0
    collisions: int = 0
    midpoint_flags: int = 0
    failure_reason: str | None = None
    seed: int | None = None
    trace: MissionTrace | None = field(default=None, repr=False)
    timings: np.ndarray | None = field(default=None, repr=False)  # (iterations, 3) ms

    def metrics(self) -> dict:
        return {k: getattr(self, k) for k in METRIC_KEYS}

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "seed": self.seed,
            "success": self.success,
            "failure_reason": self.failure_reason,
            "iterations": self.iterations,
            "skipped": self.skipped,
            "collisions": self.collisions,
            "midpoint_flags": self.midpoint_flags,
        }
        for k in METRIC_KEYS:
            if timing or k not in TIMING_KEYS:
                d[k] = getattr(self, k)
        return d


def compute_metrics(trace: MissionTrace) -> MissionResult:
    """Table-style metrics of an executed trace.

    Distance sums the executed segments; time is ``(rows - 1) * h``; the jerk
    cost sums the norms of the inputs applied between rows.
    """
    reports = trace.reports
    if not reports:
        if trace.failure_reason is not None:
            return MissionResult(False, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                                 failure_reason=trace.failure_reason, trace=trace,
                                 timings=np.zeros((0, 3)))
        raise EmptyTrace("trace has no rows")
    pos = np.array([r.x0[0:3] for r in reports])
    vel = np.array([r.x0[3:6] for r in reports])
    jerks = np.array([r.jerk for r in reports[:-1]]).reshape(-1, 3)
    distance = float(np.linalg.norm(np.diff(pos, axis=0), axis=1).sum()) if len(pos) > 1 else 0.0
    flight_time = (len(reports) - 1) * trace.h
    mean_v = distance / flight_time if flight_time > 0 else 0.0
    max_v = float(np.linalg.norm(vel, axis=1).max())
    jerk_cost = float(np.linalg.norm(jerks, axis=1).sum()) if len(jerks) else 0.0
    planned = [r for r in reports if r.status not in ("arrived", "collision", "cap", "failed")]
    timings = np.array([(r.corridor_ms, r.solver_ms, r.total_ms) for r in planned]).reshape(-1, 3)
    total = timings[:, 2]
    success = bool(trace.success and not trace.collisions)
    return MissionResult(
        success,
        distance,
        flight_time,
        mean_v,
        max_v,
        jerk_cost,
        float(total.mean()) if total.size else 0.0,
        float(total.max()) if total.size else 0.0,
        float(total.std()) if total.size else 0.0,
        iterations=len(planned),
        skipped=sum(1 for r in planned if r.status != "optimal"),
        collisions=len(trace.collisions),
        midpoint_flags=len(trace.midpoint_flags),
        failure_reason=None if success else (trace.failure_reason or "collision"),
        trace=trace,
        timings=timings,
    )


def aggregate(results: list[MissionResult]) -> dict:
    """Mean / max / standard deviation per metric across missions."""
    out = {"missions": len(results), "successes": sum(r.success for r in results)}
    for k in METRIC_KEYS:
        vals = np.array([getattr(r, k) for r in results], dtype=np.float64)
        out[k] = {"mean": float(vals.mean()), "max": float(vals.max()), "std": float(vals.std())}
    return out


def _run_one(args) -> MissionResult:
    seed, world_cfg, planner_cfg, start, goal = args
    world = generate_world(seed, world_cfg)
    result = run_mission(world, start, goal, planner_cfg)
    result.seed = seed
    return result


def run_batch(
    seeds,
    world_cfg: WorldConfig | None = None,
    planner_cfg: PlannerConfig | None = None,
    start=DEFAULT_START,
    goal=DEFAULT_GOAL,
    jobs: int = 1,
) -> tuple[list[MissionResult], dict]:
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("need at least one seed")
    world_cfg = world_cfg or WorldConfig()
    planner_cfg = planner_cfg or PlannerConfig()
    tasks = [(s, world_cfg, planner_cfg, tuple(start), tuple(goal)) for s in seeds]
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    return results, aggregate(results)


def report_dict(results, agg, world_cfg: WorldConfig, planner_cfg: PlannerConfig, start, goal) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "world_config": world_cfg.to_dict(),
        "planner_config": planner_cfg.to_dict(),
        "start": list(map(float, start)),
        "goal": list(map(float, goal)),
        "notes": {"jerk_cost": JERK_COST_NOTE, "timing_unit": "ms"},
        "missions": [r.to_dict() for r in results],
        "aggregate": agg,
    }


def write_report(path, results, agg, world_cfg, planner_cfg, start, goal) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report_dict(results, agg, world_cfg, planner_cfg, start, goal), indent=2), encoding="utf-8")
    return path


def format_table(results: list[MissionResult], agg: dict) -> str:
    head = f"{'seed':>6} {'ok':>3} {'dist m':>8} {'vel m/s':>8} {'vmax':>6} {'time s':>7} {'jerk':>9} {'comp ms':>8} {'max ms':>8}"
    lines = [head, "-" * len(head)]
    for r in results:
        lines.append(
            f"{str(r.seed):>6} {'y' if r.success else 'n':>3} {r.flight_distance:8.2f} {r.mean_velocity:8.2f} "
            f"{r.max_velocity:6.2f} {r.flight_time:7.2f} {r.jerk_cost:9.1f} {r.comp_mean_ms:8.1f} {r.comp_max_ms:8.1f}"
        )
    lines.append("-" * len(head))
    m = {k: agg[k]["mean"] for k in METRIC_KEYS}
    lines.append(
        f"{'mean':>6} {agg['successes']:>1}/{agg['missions']:<1} {m['flight_distance']:8.2f} {m['mean_velocity']:8.2f} "
        f"{m['max_velocity']:6.2f} {m['flight_time']:7.2f} {m['jerk_cost']:9.1f} {m['comp_mean_ms']:8.1f} {m['comp_max_ms']:8.1f}"
    )
    return "\n".join(lines)


def percentile_summary(values) -> dict:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return {"count": 0}
    q = np.percentile(v, [5, 25, 50, 75, 95])
    return {"count": int(v.size), "min": float(v.min()), "p5": float(q[0]), "p25": float(q[1]),
            "median": float(q[2]), "p75": float(q[3]), "p95": float(q[4]), "max": float(v.max()),
            "mean": float(v.mean())}


