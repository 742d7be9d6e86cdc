import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tscplan.errors import OutOfBounds
from tscplan.grid import (
    TemporalOccupancyGrid,
    VoxelGrid,
    VoxelRange,
    build_tog,
    dump_grid,
    inflate,
    parse_grid,
    format_grid,
    rasterize_swept_obstacle,
    sample_times,
    voxel_to_world,
    world_to_voxel,
)
from tscplan.world import DynamicObstacle, ObstacleShape, StaticObstacle, World, WorldConfig, generate_world


def full_grid():
    return VoxelGrid.empty((0, 0, 0), 0.3, (167, 40, 40))


def test_world_to_voxel_examples():
    g = VoxelGrid.empty((0, 0, 0), 0.3, (10, 10, 10))
    assert world_to_voxel(g, (0.31, 0, 0)) == (1, 0, 0)
    assert world_to_voxel(g, (0, 0, 0)) == (0, 0, 0)
    with pytest.raises(OutOfBounds) as exc:
        world_to_voxel(g, (-0.1, 0, 0))
    assert exc.value.axis == 0


def test_voxel_to_world_examples():
    g = VoxelGrid.empty((0, 0, 0), 0.3, (10, 10, 10))
    assert np.allclose(voxel_to_world(g, (0, 0, 0)), (0.15, 0.15, 0.15))
    big = full_grid()
    c = voxel_to_world(big, (166, 39, 39))
    assert np.all(c < (50.1, 12.0, 12.0))
    with pytest.raises(OutOfBounds):
        voxel_to_world(big, (167, 0, 0))


@settings(max_examples=200, deadline=None)
@given(st.tuples(st.integers(0, 166), st.integers(0, 39), st.integers(0, 39)))
def test_voxel_round_trip(index):
    g = full_grid()
    assert world_to_voxel(g, voxel_to_world(g, index)) == index


def test_inflate_examples():
    g = VoxelGrid.empty((0, 0, 0), 1.0, (5, 5, 5))
    g.occupancy[2, 2, 2] = True
    out = inflate(g, 1)
    want = np.zeros((5, 5, 5), bool)
    want[1:4, 1:4, 1:4] = True
    assert np.array_equal(out.occupancy, want)
    assert inflate(g, 0) == g
    corner = VoxelGrid.empty((0, 0, 0), 1.0, (5, 5, 5))
    corner.occupancy[0, 0, 0] = True
    assert inflate(corner, 1).occupancy.sum() == 8
    two = VoxelGrid.empty((0, 0, 0), 1.0, (7, 7, 7))
    two.occupancy[2, 3, 3] = two.occupancy[4, 3, 3] = True
    want = np.zeros((7, 7, 7), bool)
    want[1:6, 2:5, 2:5] = True
    assert np.array_equal(inflate(two, 1).occupancy, want)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2**31 - 1))
def test_inflate_monotone_and_additive(a, b, seed):
    rng = np.random.default_rng(seed)
    g = VoxelGrid((0, 0, 0), 1.0, (12, 12, 12), rng.random((12, 12, 12)) < 0.02)
    ga = inflate(g, a)
    assert np.all(ga.occupancy[g.occupancy])
    # on this lattice dilation is exactly additive, borders included
    assert inflate(ga, b) == inflate(g, a + b)


def test_sample_times_include_both_ends():
    t = sample_times(1.0, 1.1, 0.03)
    assert t[0] == 1.0 and t[-1] == 1.1
    assert np.all(np.diff(t) <= 0.03 + 1e-12)
    with pytest.raises(ValueError):
        sample_times(1.0, 1.0, 0.1)


def test_rasterize_static_pose_equals_instant():
    shape = ObstacleShape(2, [[0, 0, 0], [1, 1, 1]])
    a = VoxelGrid.empty((0, 0, 0), 0.5, (6, 6, 6))
    b = VoxelGrid.empty((0, 0, 0), 0.5, (6, 6, 6))
    rasterize_swept_obstacle(a, shape, lambda t: (1.0, 1.0, 1.0), 0.0, 1.0, 0.1)
    rasterize_swept_obstacle(b, shape, lambda t: (1.0, 1.0, 1.0), 0.0, 0.0 + 1e-9, 1.0)
    assert a == b
    assert set(map(tuple, a.occupied_indices())) == {(2, 2, 2), (3, 3, 3)}


def test_rasterize_one_voxel_motion_is_union():
    shape = ObstacleShape(1, [[0, 0, 0]])
    g = VoxelGrid.empty((0, 0, 0), 1.0, (5, 3, 3))
    rasterize_swept_obstacle(g, shape, lambda t: (1.0 + t, 1.0, 1.0), 0.0, 1.0, 1.0)
    assert set(map(tuple, g.occupied_indices())) == {(1, 1, 1), (2, 1, 1)}


def test_rasterize_empty_shape_is_noop():
    g = VoxelGrid.empty((0, 0, 0), 1.0, (4, 4, 4))
    rasterize_swept_obstacle(g, ObstacleShape(3, np.zeros((0, 3))), lambda t: (0, 0, 0), 0, 1, 0.1)
    assert not g.occupancy.any()


def _static_world():
    shape = ObstacleShape(2, [[0, 0, 0], [1, 0, 0]])
    statics = [StaticObstacle(shape, np.array([1.5, 1.5, 1.5]))]
    return World((6.0, 6.0, 6.0), 0.3, statics, [], 0, WorldConfig(extent=(6.0, 6.0, 6.0)))


def test_build_tog_static_world_grids_identical():
    tog = build_tog(_static_world(), 0.0, 4, 0.5)
    assert len(tog) == 4
    assert all(g == tog[0] for g in tog.grids)
    assert tog.interval(3) == (1.5, 2.0)


def test_build_tog_contains_instant_footprint():
    ob = DynamicObstacle(ObstacleShape(1, [[0, 0, 0]]), np.array([3.0, 3.0, 3.0]), np.array([1.0, 0, 0]), 1.0, 0.01, 0.0)
    world = World((6.0, 6.0, 6.0), 0.3, [], [ob], 0)
    tog = build_tog(world, 0.0, 3, 0.1, inflate_voxels=0)
    for k, g in enumerate(tog.grids):
        t0, _ = tog.interval(k)
        pos = ob.position(t0)
        cell = tuple(int(v) for v in np.floor(pos / 0.3 + 1e-9))
        assert g.occupancy[cell]


def test_build_tog_crop_matches_full_grid():
    world = generate_world(3, WorldConfig(extent=(12.0, 6.0, 6.0), n_static=10, n_dynamic=10))
    full = build_tog(world, 0.7, 3, 0.1)
    region = VoxelRange((5, 3, 2), (25, 15, 12))
    crop = build_tog(world, 0.7, 3, 0.1, region)
    for a, b in zip(full.grids, crop.grids):
        assert np.array_equal(a.occupancy[region.slices()], b.occupancy)
        assert np.allclose(b.origin, np.array(region.lo) * 0.3)


def test_tog_rejects_mixed_geometry():
    with pytest.raises(ValueError):
        TemporalOccupancyGrid([VoxelGrid.empty((0, 0, 0), 1, (2, 2, 2)), VoxelGrid.empty((0, 0, 0), 1, (3, 2, 2))], 0.1, 0.0)


def test_grid_dump_round_trip(tmp_path):
    g = VoxelGrid.empty((0.5, 0, -1), 0.3, (4, 5, 6))
    g.occupancy[1, 2, 3] = g.occupancy[3, 4, 5] = True
    assert parse_grid(format_grid(g)) == g
    assert parse_grid(dump_grid(g, tmp_path / "g.txt").read_text()) == g
