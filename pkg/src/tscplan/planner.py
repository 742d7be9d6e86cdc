"""Receding-horizon loop.

Each iteration starts from a state of the last accepted plan, builds the
temporal occupancy grid and safe corridors around it, advances the reference
window and solves the MIQP.  A failed iteration keeps the previous plan and
starts the next one a step deeper into it.

Time is simulated: iteration ``l`` plans from ``t = l*h`` and the agent
follows the accepted plan exactly, one step per iteration.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .corridor import TemporalSafeCorridor, generate_tsc
from .dynamics import Limits
from .errors import ConfigError, InvalidEndpoint, MissionFailed, NoFreeSpace, NoPath, OutOfBounds
from .global_path import distance_map, push_path, shortest_path, to_polyline
from .grid import TogBuilder, VoxelGrid, VoxelRange, clamp_to_voxel, world_to_voxel
from .miqp import BnbConfig, MpcProblem, Weights, solve_bnb
from .reference import Polyline, ReferenceWindow, advance_window, sample_window
from .world import World, collision_check

TRACE_COLUMNS = [
    "iter", "t", "px", "py", "pz", "vx", "vy", "vz", "ax", "ay", "az",
    "jx", "jy", "jz", "status", "corridor_ms", "solver_ms", "total_ms",
]
TIMING_COLUMNS = ("corridor_ms", "solver_ms", "total_ms")

ARRIVED = "arrived"
SKIPPED_OVERRUN = "overrun"
FAULT = "timeout"


@dataclass
class PlannerConfig:
    N: int = 7
    h: float = 0.1
    v_samp: float = 4.0
    thresh_dist: float = 0.4
    limits: Limits = field(default_factory=Limits)
    weights: Weights = field(default_factory=Weights)
    max_polyhedra: int = 6
    coverage: float = 0.95
    clearance: float = 0.4
    goal_tolerance: float = 0.3
    stop_speed: float = 0.1
    max_failure_offset: int | None = None  # defaults to N
    agent_radius: float = 0.2
    inflate_voxels: int = 1
    node_limit: int | None = 2000
    # wall-clock rules: off by default so runs are reproducible on any machine
    realtime: bool = False
    iteration_cap_factor: float = 4.0

    def __post_init__(self):
        if self.max_failure_offset is None:
            self.max_failure_offset = self.N
        self.validate()

    def validate(self) -> None:
        if self.N < 1:
            raise ConfigError("N must be at least 1")
        if self.h <= 0:
            raise ConfigError("h must be positive")
        if self.v_samp <= 0:
            raise ConfigError("v_samp must be positive")
        if self.goal_tolerance <= 0:
            raise ConfigError("goal_tolerance must be positive")
        if self.max_polyhedra < 1:
            raise ConfigError("max_polyhedra must be at least 1")
        if not 0 <= self.max_failure_offset <= self.N:
            raise ConfigError("max_failure_offset must lie in [0, N]")
        if self.thresh_dist < 0 or self.clearance < 0:
            raise ConfigError("thresh_dist and clearance must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["limits"] = self.limits.to_dict()
        d["weights"] = self.weights.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> PlannerConfig:
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown planner config keys: {sorted(unknown)}")
        if "limits" in d:
            d["limits"] = Limits.from_dict(d["limits"])
        if "weights" in d:
            d["weights"] = Weights.from_dict(d["weights"])
        return cls(**d)


@dataclass(eq=False)
class PlannerState:
    states: np.ndarray  # committed plan x_0..x_N
    inputs: np.ndarray  # committed plan u_0..u_{N-1}
    window: ReferenceWindow
    polyline: Polyline
    failure_offset: int = 0
    exhausted: bool = False
    iteration: int = 0
    last_success: bool = False
    # accepted plan's final position and the window it was planned against
    last_final: np.ndarray | None = None
    timings: list = field(default_factory=list)

    @classmethod
    def bootstrap(cls, start, polyline, cfg: PlannerConfig) -> PlannerState:
        line = polyline if isinstance(polyline, Polyline) else Polyline(polyline)
        x = np.zeros(9)
        x[0:3] = start
        states = np.tile(x, (cfg.N + 1, 1))
        window = sample_window(line, line.project(start), cfg.v_samp, cfg.h, cfg.N)
        return cls(states, np.zeros((cfg.N, 3)), window, line)


@dataclass
class IterationReport:
    iteration: int
    t: float
    x0: np.ndarray
    jerk: np.ndarray
    status: str
    offset: int  # failure offset used to pick x0
    corridor_ms: float
    solver_ms: float
    total_ms: float
    nodes: int = 0
    polyhedra: tuple = ()
    tsc: TemporalSafeCorridor | None = None


def _crop_region(builder: TogBuilder, position, cfg: PlannerConfig) -> VoxelRange:
    d = cfg.limits.v_max * cfg.N * cfg.h
    full = VoxelGrid.empty(builder.origin, builder.voxel_size, builder.dims)
    p = np.asarray(position, dtype=np.float64)
    region = VoxelRange(clamp_to_voxel(full, p - d), clamp_to_voxel(full, p + d))
    return region.expanded(1, builder.dims)


def plan_iteration(
    world: World,
    t_now: float,
    state: PlannerState,
    cfg: PlannerConfig,
    builder: TogBuilder | None = None,
    force_failure: bool = False,
    keep_corridors: bool = False,
) -> tuple[PlannerState, IterationReport]:
    """One receding-horizon step; mutates and returns ``state``.

    ``force_failure`` discards the solve as if the solver had timed out.
    """
    t_begin = time.perf_counter()
    N = cfg.N
    offset = state.failure_offset
    idx = 1 + offset
    if state.exhausted or idx > N:
        raise MissionFailed(f"committed trajectory exhausted after {offset} skipped iterations")
    x0 = state.states[idx].copy()
    builder = builder or TogBuilder(world, cfg.inflate_voxels)

    if state.iteration > 0 and state.last_success:
        state.window = advance_window(
            state.window, state.last_final, cfg.thresh_dist, state.polyline, cfg.v_samp, cfg.h, N
        )

    t0 = time.perf_counter()
    region = _crop_region(builder, x0[0:3], cfg)
    tog = builder.build(t_now, N, cfg.h, region)
    # previous plan positions shifted to this iteration's steps keep it feasible
    tail = [state.states[min(idx + k, N), 0:3] for k in range(1, N + 1)]
    try:
        tsc = generate_tsc(
            tog, x0[0:3], cfg.limits.v_max, state.window.points[1:], cfg.max_polyhedra, tail, cfg.coverage
        )
    except NoFreeSpace as exc:
        raise MissionFailed(str(exc)) from exc
    t1 = time.perf_counter()

    problem = MpcProblem(x0, state.window.states(), tsc, cfg.limits, cfg.weights, cfg.h)
    budget = cfg.h if cfg.realtime else None
    sol = solve_bnb(problem, BnbConfig(node_limit=cfg.node_limit, time_budget=budget))
    t2 = time.perf_counter()
    total = t2 - t_begin

    status = sol.status
    ok = sol.ok
    if force_failure:
        ok = False
        status = FAULT
    elif ok and cfg.realtime and total > cfg.h:
        ok = False
        status = SKIPPED_OVERRUN

    if ok:
        jerk = sol.inputs[0].copy()
        state.states = sol.states
        state.inputs = sol.inputs
        state.failure_offset = 0
        state.exhausted = False
        state.last_final = sol.states[N, 0:3].copy()
    else:
        jerk = state.inputs[idx].copy() if idx < N else np.zeros(3)
        state.exhausted = offset + 2 > N or offset + 1 > cfg.max_failure_offset
        state.failure_offset = min(offset + 1, cfg.max_failure_offset)
    state.last_success = ok
    state.iteration += 1
    report = IterationReport(
        state.iteration - 1,
        t_now,
        x0,
        jerk,
        status,
        offset,
        (t1 - t0) * 1e3,
        (t2 - t1) * 1e3,
        total * 1e3,
        sol.stats.nodes,
        tuple(len(c) for c in tsc.corridors),
        tsc if keep_corridors else None,
    )
    state.timings.append((report.corridor_ms, report.solver_ms, report.total_ms))
    return state, report


@dataclass(eq=False)
class MissionTrace:
    reports: list[IterationReport]
    h: float
    start: np.ndarray
    goal: np.ndarray
    success: bool = False
    failure_reason: str | None = None
    collisions: list = field(default_factory=list)  # (iteration, t, position)
    midpoint_flags: list = field(default_factory=list)
    global_path: np.ndarray | None = None


def global_reference(world: World, builder: TogBuilder, start, goal, cfg: PlannerConfig) -> np.ndarray:
    """Pushed grid path from start to goal as a polyline with exact endpoints."""
    grid = builder.build(0.0, 1, cfg.h)[0]
    s = world_to_voxel(grid, start)
    g = world_to_voxel(grid, goal)
    try:
        path = shortest_path(grid, s, g)
    except NoPath:
        # moving obstacles can wall off the t=0 snapshot; plan around static ones
        grid = VoxelGrid(grid.origin, grid.voxel_size, grid.dims, builder.static_inflated)
        path = shortest_path(grid, s, g)
    path = push_path(path, grid, distance_map(grid), cfg.clearance)
    pts = to_polyline(path, grid)
    start = np.asarray(start, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    if len(pts) == 1:
        return np.vstack([start, goal]) if np.any(start != goal) else start[None]
    pts[0] = start
    pts[-1] = goal
    return pts


def iteration_cap(start, goal, cfg: PlannerConfig) -> int:
    dist = float(np.linalg.norm(np.asarray(goal, dtype=np.float64) - np.asarray(start, dtype=np.float64)))
    return max(int(math.ceil(cfg.iteration_cap_factor * dist / cfg.v_samp / cfg.h)), 10 * cfg.N)


def run_mission(
    world: World,
    start,
    goal,
    cfg: PlannerConfig | None = None,
    fault_hook: Callable[[int], bool] | None = None,
    keep_corridors: bool = False,
):
    """Fly from ``start`` to ``goal``; returns a ``MissionResult`` whose
    ``trace`` field holds the per-iteration record.  Failures are reported in
    the result, never raised."""
    from .sim import compute_metrics

    cfg = cfg or PlannerConfig()
    start = np.asarray(start, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    trace = MissionTrace([], cfg.h, start, goal)
    builder = TogBuilder(world, cfg.inflate_voxels)
    try:
        for name, p in (("start", start), ("goal", goal)):
            if collision_check(world, p, 0.0, cfg.agent_radius):
                raise InvalidEndpoint(f"{name} {p.tolist()} is not free")
        polyline = global_reference(world, builder, start, goal, cfg)
    except (NoPath, InvalidEndpoint, OutOfBounds) as exc:
        trace.failure_reason = f"global path: {exc}"
        return compute_metrics(trace)
    trace.global_path = polyline
    state = PlannerState.bootstrap(start, polyline, cfg)
    cap = iteration_cap(start, goal, cfg)
    prev = None

    for l in range(cap + 1):
        t_now = l * cfg.h
        x = state.states[min(1 + state.failure_offset, cfg.N)]
        p = x[0:3]
        if collision_check(world, p, t_now, cfg.agent_radius):
            trace.collisions.append((l, t_now, p.copy()))
        if prev is not None:
            mid = 0.5 * (prev + p)
            if collision_check(world, mid, t_now - 0.5 * cfg.h, cfg.agent_radius):
                trace.midpoint_flags.append((l - 1, t_now - 0.5 * cfg.h, mid))
        prev = p.copy()
        if trace.collisions:
            trace.failure_reason = "collision"
            _arrival_row(trace, l, t_now, x, "collision")
            break
        if np.linalg.norm(p - goal) <= cfg.goal_tolerance and np.linalg.norm(x[3:6]) < cfg.stop_speed:
            trace.success = True
            _arrival_row(trace, l, t_now, x, ARRIVED)
            break
        if l == cap:
            trace.failure_reason = "iteration cap reached"
            _arrival_row(trace, l, t_now, x, "cap")
            break
        force = bool(fault_hook and fault_hook(l))
        try:
            state, report = plan_iteration(world, t_now, state, cfg, builder, force, keep_corridors)
        except MissionFailed as exc:
            trace.failure_reason = str(exc)
            _arrival_row(trace, l, t_now, x, "failed")
            break
        trace.reports.append(report)
    return compute_metrics(trace)


def _arrival_row(trace: MissionTrace, l: int, t: float, x, status: str) -> None:
    trace.reports.append(IterationReport(l, t, np.asarray(x).copy(), np.zeros(3), status, 0, 0.0, 0.0, 0.0))


def trace_rows(reports: list[IterationReport]) -> list[list[str]]:
    rows = []
    for r in reports:
        vals = [str(r.iteration), f"{r.t:.6f}"]
        vals += [repr(float(v)) for v in r.x0]
        vals += [repr(float(v)) for v in r.jerk]
        vals += [r.status, f"{r.corridor_ms:.3f}", f"{r.solver_ms:.3f}", f"{r.total_ms:.3f}"]
        rows.append(vals)
    return rows


def write_trace_csv(reports: list[IterationReport], path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        writer.writerows(trace_rows(reports))
    return path


def read_trace_csv(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
