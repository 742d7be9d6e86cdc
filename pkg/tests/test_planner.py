import numpy as np
import pytest

from tscplan.errors import ConfigError, MissionFailed
from tscplan.grid import TogBuilder
from tscplan.planner import (
    FAULT,
    TRACE_COLUMNS,
    PlannerConfig,
    PlannerState,
    global_reference,
    iteration_cap,
    plan_iteration,
    read_trace_csv,
    run_mission,
    write_trace_csv,
)
from tscplan.world import ObstacleShape, StaticObstacle, World, WorldConfig, collision_check, generate_world

START = (1.0, 3.0, 3.0)
GOAL = (13.0, 3.0, 3.0)
SMALL = WorldConfig(extent=(15.0, 6.0, 6.0), n_static=12, n_dynamic=12,
                    clear_zones=[[list(START), 1.0], [list(GOAL), 1.0]])


def empty_world():
    return World((15.0, 6.0, 6.0), 0.3, [], [], 0)


@pytest.fixture(scope="module")
def empty_result():
    return run_mission(empty_world(), START, GOAL, PlannerConfig())


def test_empty_world_straight_flight(empty_result):
    r = empty_result
    assert r.success and r.collisions == 0 and r.skipped == 0
    pos = np.array([rep.x0[0:3] for rep in r.trace.reports])
    # path vertices sit on voxel centers, 0.15 m off the start-goal line
    assert np.max(np.abs(pos[:, 1:] - 3.0)) < 0.3
    assert abs(r.flight_distance - 12.0) <= 2 * 0.3 + 0.3
    assert np.linalg.norm(pos[-1] - GOAL) <= 0.3


def test_timing_log_complete(empty_result):
    reps = [r for r in empty_result.trace.reports if r.status == "optimal"]
    assert reps and all(r.corridor_ms > 0 and r.solver_ms > 0 and r.total_ms >= r.corridor_ms + r.solver_ms for r in reps)
    assert empty_result.timings.shape == (len(reps), 3)


def test_goal_inside_obstacle_fails():
    block = StaticObstacle(ObstacleShape(3, np.argwhere(np.ones((3, 3, 3)))), np.array([12.6, 2.7, 2.7]))
    world = World((15.0, 6.0, 6.0), 0.3, [block], [], 0)
    r = run_mission(world, START, GOAL, PlannerConfig())
    assert not r.success and "global path" in r.failure_reason


def test_receding_horizon_consistency_and_hover():
    world = generate_world(3, SMALL)
    cfg = PlannerConfig()
    builder = TogBuilder(world)
    line = global_reference(world, builder, START, GOAL, cfg)
    state = PlannerState.bootstrap(START, line, cfg)
    for l in range(25):
        old = state.states.copy()
        idx = 1 + state.failure_offset
        state, rep = plan_iteration(world, l * cfg.h, state, cfg, builder, force_failure=(l in (5, 6)))
        assert np.array_equal(rep.x0, old[idx])
        if rep.status == "optimal":
            assert np.array_equal(state.states[0], rep.x0)
            assert np.linalg.norm(state.states[-1, 3:6]) <= 1e-6
            assert state.failure_offset == 0
        else:
            assert np.array_equal(state.states, old)
            assert np.array_equal(rep.jerk, state.inputs[idx])


def test_consecutive_failures_exhaust():
    cfg = PlannerConfig(N=3)
    world = empty_world()
    builder = TogBuilder(world)
    state = PlannerState.bootstrap(START, np.array([START, GOAL]), cfg)
    offsets = []
    with pytest.raises(MissionFailed):
        for l in range(10):
            state, rep = plan_iteration(world, l * cfg.h, state, cfg, builder, force_failure=True)
            assert rep.status == FAULT
            offsets.append(rep.offset)
    # x_1, x_2 then x_N are used before the plan runs out
    assert offsets == [0, 1, 2]


def test_failure_skip_offsets_in_mission():
    r = run_mission(empty_world(), START, GOAL, PlannerConfig(), fault_hook=lambda l: l in (3, 4))
    reps = r.trace.reports
    assert [x.offset for x in reps[2:8]] == [0, 0, 1, 2, 0, 0]
    assert [x.status for x in reps[2:7]] == ["optimal", FAULT, FAULT, "optimal", "optimal"]
    assert r.success and r.skipped == 2


def test_mission_has_no_collisions_small_world():
    world = generate_world(7, SMALL)
    r = run_mission(world, START, GOAL, PlannerConfig())
    assert r.success and r.collisions == 0
    for rep in r.trace.reports:
        assert not collision_check(world, rep.x0[0:3], rep.t, 0.2)


def test_iteration_cap():
    cfg = PlannerConfig()
    assert iteration_cap((1, 6, 6), (49, 6, 6), cfg) == 480
    assert iteration_cap((0, 0, 0), (0, 0, 0.1), cfg) == 70


def test_config_validation_and_round_trip():
    with pytest.raises(ConfigError):
        PlannerConfig(N=0)
    with pytest.raises(ConfigError):
        PlannerConfig(N=3, max_failure_offset=4)
    with pytest.raises(ConfigError):
        PlannerConfig.from_dict({"bogus": 1})
    cfg = PlannerConfig(N=5, v_samp=3.0)
    assert cfg.max_failure_offset == 5
    assert PlannerConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


def test_trace_csv_round_trip(tmp_path, empty_result):
    path = write_trace_csv(empty_result.trace.reports, tmp_path / "t.csv")
    rows = read_trace_csv(path)
    assert list(rows[0]) == TRACE_COLUMNS
    assert len(rows) == len(empty_result.trace.reports)
    assert rows[-1]["status"] == "arrived"
    first = empty_result.trace.reports[0]
    assert float(rows[0]["px"]) == first.x0[0]
