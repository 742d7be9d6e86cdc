"""Voxel occupancy grids and temporal occupancy grids."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .errors import OutOfBounds
from .world import ObstacleShape, World, sin_range


@dataclass(eq=False)
class VoxelGrid:
    origin: np.ndarray
    voxel_size: float
    dims: tuple[int, int, int]
    occupancy: np.ndarray  # bool, shape == dims

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        self.dims = tuple(int(d) for d in self.dims)
        if self.voxel_size <= 0:
            raise ValueError("voxel_size must be positive")
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError("dims must be three positive integers")
        occ = np.ascontiguousarray(self.occupancy, dtype=bool)
        if occ.shape != self.dims:
            raise ValueError(f"occupancy shape {occ.shape} != dims {self.dims}")
        self.occupancy = occ

    @classmethod
    def empty(cls, origin, voxel_size: float, dims) -> VoxelGrid:
        dims = tuple(int(d) for d in dims)
        return cls(origin, voxel_size, dims, np.zeros(dims, dtype=bool))

    def copy(self) -> VoxelGrid:
        return VoxelGrid(self.origin.copy(), self.voxel_size, self.dims, self.occupancy.copy())

    def same_geometry(self, other: VoxelGrid) -> bool:
        return (
            self.dims == other.dims
            and self.voxel_size == other.voxel_size
            and np.array_equal(self.origin, other.origin)
        )

    def in_bounds(self, index) -> bool:
        return all(0 <= int(i) < d for i, d in zip(index, self.dims))

    def is_free(self, index) -> bool:
        return self.in_bounds(index) and not self.occupancy[tuple(int(i) for i in index)]

    def occupied_indices(self) -> np.ndarray:
        return np.argwhere(self.occupancy)

    @property
    def upper_corner(self) -> np.ndarray:
        return self.origin + np.asarray(self.dims) * self.voxel_size

    def crop(self, region: VoxelRange) -> VoxelGrid:
        lo = np.asarray(region.lo)
        return VoxelGrid(
            self.origin + lo * self.voxel_size,
            self.voxel_size,
            region.shape,
            self.occupancy[region.slices()].copy(),
        )

    def __eq__(self, other):
        return (
            isinstance(other, VoxelGrid)
            and self.same_geometry(other)
            and np.array_equal(self.occupancy, other.occupancy)
        )


@dataclass(frozen=True)
class VoxelRange:
    """Inclusive index box ``lo..hi``."""

    lo: tuple[int, int, int]
    hi: tuple[int, int, int]

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def slices(self) -> tuple[slice, slice, slice]:
        return tuple(slice(l, h + 1) for l, h in zip(self.lo, self.hi))

    def contains(self, index) -> bool:
        return all(l <= int(i) <= h for l, i, h in zip(self.lo, index, self.hi))

    def contains_range(self, other: VoxelRange) -> bool:
        return self.contains(other.lo) and self.contains(other.hi)

    def clamp(self, index) -> tuple[int, int, int]:
        return tuple(min(max(int(i), l), h) for l, i, h in zip(self.lo, index, self.hi))

    def expanded(self, margin: int, dims) -> VoxelRange:
        return VoxelRange(
            tuple(max(l - margin, 0) for l in self.lo),
            tuple(min(h + margin, d - 1) for h, d in zip(self.hi, dims)),
        )

    @classmethod
    def full(cls, dims) -> VoxelRange:
        return cls((0, 0, 0), tuple(int(d) - 1 for d in dims))


@dataclass(eq=False)
class TemporalOccupancyGrid:
    """``grids[k]`` holds everything occupied during
    ``[start_time + k*time_step, start_time + (k+1)*time_step]``."""

    grids: list[VoxelGrid]
    time_step: float
    start_time: float

    def __post_init__(self):
        if self.grids:
            g0 = self.grids[0]
            if not all(g0.same_geometry(g) for g in self.grids[1:]):
                raise ValueError("all grids of a temporal occupancy grid must share geometry")

    def __len__(self) -> int:
        return len(self.grids)

    def __getitem__(self, k: int) -> VoxelGrid:
        return self.grids[k]

    def interval(self, k: int) -> tuple[float, float]:
        t0 = self.start_time + k * self.time_step
        return t0, t0 + self.time_step


# ---------------------------------------------------------------------------
# coordinates
# ---------------------------------------------------------------------------


def world_to_voxel(grid: VoxelGrid, point) -> tuple[int, int, int]:
    rel = (np.asarray(point, dtype=np.float64) - grid.origin) / grid.voxel_size
    # snap values within float noise of an integer so 0.3/0.3 stays 1
    snapped = np.where(np.abs(rel - np.round(rel)) < 1e-9, np.round(rel), rel)
    idx = np.floor(snapped).astype(np.int64)
    for axis in range(3):
        if not 0 <= idx[axis] < grid.dims[axis]:
            raise OutOfBounds(axis, int(idx[axis]))
    return tuple(int(i) for i in idx)


def voxel_to_world(grid: VoxelGrid, index) -> np.ndarray:
    idx = np.asarray(index, dtype=np.int64).reshape(3)
    for axis in range(3):
        if not 0 <= idx[axis] < grid.dims[axis]:
            raise OutOfBounds(axis, int(idx[axis]))
    return grid.origin + (idx + 0.5) * grid.voxel_size


def clamp_to_voxel(grid: VoxelGrid, point) -> tuple[int, int, int]:
    """Index of the voxel containing ``point``, clamped into the grid."""
    rel = (np.asarray(point, dtype=np.float64) - grid.origin) / grid.voxel_size
    idx = np.floor(rel + 1e-9).astype(np.int64)
    return tuple(int(min(max(i, 0), d - 1)) for i, d in zip(idx, grid.dims))


# ---------------------------------------------------------------------------
# occupancy operations
# ---------------------------------------------------------------------------


def inflate(grid: VoxelGrid, radius_voxels: int) -> VoxelGrid:
    """Dilate the occupied set by the ``(2r+1)^3`` cube neighborhood."""
    if radius_voxels < 0:
        raise ValueError("radius_voxels must be non-negative")
    occ = _backend.dilate(grid.occupancy.view(np.uint8), int(radius_voxels))
    return VoxelGrid(grid.origin.copy(), grid.voxel_size, grid.dims, occ.astype(bool))


def sample_times(t0: float, t1: float, dt_sample: float) -> np.ndarray:
    """``t0, t0+dt, ...`` with ``t1`` always included as the last sample."""
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    if dt_sample <= 0:
        raise ValueError("dt_sample must be positive")
    n = max(1, int(math.ceil((t1 - t0) / dt_sample - 1e-9)))
    times = t0 + np.arange(n + 1) * dt_sample
    times[-1] = t1
    return times


def _mark(occ: np.ndarray, origin, voxel_size: float, mins, maxs) -> None:
    _backend.mark_aabbs(occ, np.asarray(origin, dtype=np.float64), voxel_size, mins, maxs)


def rasterize_swept_obstacle(
    grid: VoxelGrid,
    shape: ObstacleShape,
    pose_fn: Callable[[float], Sequence[float]],
    t0: float,
    t1: float,
    dt_sample: float,
    max_speed: float = 0.0,
) -> None:
    """Mark voxels covered by ``shape`` at every sample time in ``[t0, t1]``.

    ``pose_fn(t)`` gives the world position of the shape's min corner.  With
    ``max_speed > 0`` each sampled footprint is padded by
    ``max_speed * dt_sample / 2``, which covers the motion between samples.
    Never clears cells; parts outside the grid are clipped.
    """
    if shape.empty:
        return
    times = sample_times(t0, t1, dt_sample)
    pad = max_speed * dt_sample / 2.0
    poses = np.array([np.asarray(pose_fn(float(t)), dtype=np.float64) for t in times])
    offsets = shape.cells * grid.voxel_size
    mins = (poses[:, None, :] + offsets[None, :, :]).reshape(-1, 3) - pad
    maxs = mins + grid.voxel_size + 2 * pad
    occ = grid.occupancy.view(np.uint8)
    _mark(occ, grid.origin, grid.voxel_size, mins, maxs)


class TogBuilder:
    """Builds temporal occupancy grids for one world.

    The inflated static layer is computed once.  Dynamic obstacles are swept
    over each interval by splitting it into sub-intervals of ``dt_sample`` and
    marking, per sub-interval, the bounding box of the cell over the exact
    range of the sinusoid there.  That is a superset of the sampled
    footprints and is sound for any sample spacing.
    """

    def __init__(self, world: World, inflate_voxels: int = 1):
        self.world = world
        self.inflate_voxels = int(inflate_voxels)
        self.voxel_size = world.voxel_size
        self.dims = world.dims
        self.origin = np.zeros(3)
        static = np.zeros(self.dims, dtype=np.uint8)
        mins = world.static_cell_mins
        if mins.shape[0]:
            _mark(static, self.origin, self.voxel_size, mins, mins + self.voxel_size)
        self.static_raw = static.astype(bool)
        self.static_inflated = _backend.dilate(static, self.inflate_voxels).astype(bool)
        self._prepare_dynamic()

    def _prepare_dynamic(self) -> None:
        obs = self.world.dynamic_obstacles
        vs = self.voxel_size
        if not obs:
            self._reach_lo = np.zeros((0, 3))
            self._reach_hi = np.zeros((0, 3))
            return
        cube_lo, cube_hi = [], []
        for ob in obs:
            if ob.shape.empty:
                cube_lo.append(np.full(3, np.inf))
                cube_hi.append(np.full(3, -np.inf))
                continue
            cube_lo.append(ob.anchor + ob.shape.cells.min(axis=0) * vs)
            cube_hi.append(ob.anchor + (ob.shape.cells.max(axis=0) + 1) * vs)
        reach = np.abs(self.world.dynamic_arrays["axis"])
        self._reach_lo = np.array(cube_lo) - reach
        self._reach_hi = np.array(cube_hi) + reach

    def _dynamic_boxes(self, t0: float, t1: float, dt_sample: float, box_lo, box_hi):
        arr = self.world.dynamic_arrays
        near = np.all((self._reach_hi > box_lo) & (self._reach_lo < box_hi), axis=1)
        if not near.any():
            return np.zeros((0, 3)), np.zeros((0, 3))
        cell_sel = near[arr["owner"]]
        base = arr["cell_base"][cell_sel]
        owner = arr["owner"][cell_sel]
        axis = arr["axis"][owner]
        omega = arr["omega"][owner]
        phase = arr["phase"][owner]
        times = sample_times(t0, t1, dt_sample)
        ta = times[:-1][:, None]
        tb = times[1:][:, None]
        s_lo, s_hi = sin_range(omega * ta + phase, omega * tb + phase)
        d_a = axis[None] * s_lo[..., None]
        d_b = axis[None] * s_hi[..., None]
        mins = base[None] + np.minimum(d_a, d_b)
        maxs = base[None] + self.voxel_size + np.maximum(d_a, d_b)
        return mins.reshape(-1, 3), maxs.reshape(-1, 3)

    def build(
        self,
        t_now: float,
        num_steps: int,
        time_step: float,
        region: VoxelRange | None = None,
        dt_sample: float | None = None,
    ) -> TemporalOccupancyGrid:
        if num_steps < 1:
            raise ValueError("num_steps must be at least 1")
        if dt_sample is None:
            dt_sample = time_step / 8.0
        region = region or VoxelRange.full(self.dims)
        r = self.inflate_voxels
        work = region.expanded(r, self.dims)
        vs = self.voxel_size
        work_origin = self.origin + np.asarray(work.lo) * vs
        work_hi = self.origin + (np.asarray(work.hi) + 1) * vs
        inner = tuple(
            slice(rl - wl, rh - wl + 1) for rl, rh, wl in zip(region.lo, region.hi, work.lo)
        )
        static_crop = self.static_inflated[region.slices()]
        out_origin = self.origin + np.asarray(region.lo) * vs
        grids = []
        for k in range(num_steps):
            t0 = t_now + k * time_step
            occ = np.zeros(work.shape, dtype=np.uint8)
            mins, maxs = self._dynamic_boxes(t0, t0 + time_step, dt_sample, work_origin, work_hi)
            if mins.shape[0]:
                _mark(occ, work_origin, vs, mins, maxs)
            occ = _backend.dilate(occ, r)[inner].astype(bool) | static_crop
            grids.append(VoxelGrid(out_origin.copy(), vs, region.shape, occ))
        return TemporalOccupancyGrid(grids, time_step, t_now)


def build_tog(
    world: World,
    t_now: float,
    num_steps: int,
    time_step: float,
    region: VoxelRange | None = None,
    dt_sample: float | None = None,
    inflate_voxels: int = 1,
) -> TemporalOccupancyGrid:
    return TogBuilder(world, inflate_voxels).build(t_now, num_steps, time_step, region, dt_sample)


# ---------------------------------------------------------------------------
# debug dump
# ---------------------------------------------------------------------------


def format_grid(grid: VoxelGrid) -> str:
    ox, oy, oz = (repr(float(v)) for v in grid.origin)
    lines = [f"dims {grid.dims[0]} {grid.dims[1]} {grid.dims[2]} voxel {grid.voxel_size!r} origin {ox} {oy} {oz}"]
    for x, y, z in grid.occupied_indices():  # argwhere is already lexicographic
        lines.append(f"{x} {y} {z}")
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> VoxelGrid:
    lines = text.strip().splitlines()
    head = lines[0].split()
    if head[0] != "dims" or head[4] != "voxel" or head[6] != "origin":
        raise ValueError("malformed grid dump header")
    dims = tuple(int(v) for v in head[1:4])
    grid = VoxelGrid.empty([float(v) for v in head[7:10]], float(head[5]), dims)
    for line in lines[1:]:
        x, y, z = (int(v) for v in line.split())
        grid.occupancy[x, y, z] = True
    return grid


def dump_grid(grid: VoxelGrid, path) -> Path:
    path = Path(path)
    path.write_text(format_grid(grid), encoding="utf-8")
    return path
