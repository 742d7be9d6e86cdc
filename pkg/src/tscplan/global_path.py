"""Global path on the first occupancy grid: A* search plus clearance pushing.

Search is plain A* on the 26-connected lattice with Euclidean edge weights;
it returns the same cost as a jump-point search would.  Clearance pushing
re-plans on a cost map that charges ``weight * max(0, clearance - d)`` meters
for entering a cell at obstacle distance ``d``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import _backend
from .errors import EmptyPath, InvalidEndpoint, NoPath
from .grid import VoxelGrid, voxel_to_world

PUSH_WEIGHT = 2.0


@dataclass(eq=False)
class GridPath:
    cells: np.ndarray  # (K, 3) int
    cost: float  # metric length in meters

    def __len__(self) -> int:
        return self.cells.shape[0]


@dataclass(eq=False)
class DistanceField:
    origin: np.ndarray
    voxel_size: float
    dims: tuple[int, int, int]
    distance: np.ndarray  # meters to the nearest occupied cell center

    def __getitem__(self, index) -> float:
        return float(self.distance[tuple(int(i) for i in index)])


def path_length(cells: np.ndarray, voxel_size: float) -> float:
    cells = np.asarray(cells, dtype=np.float64)
    if cells.shape[0] < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(cells, axis=0), axis=1).sum() * voxel_size)


def _check_endpoint(grid: VoxelGrid, index, name: str) -> tuple[int, int, int]:
    index = tuple(int(i) for i in index)
    if not grid.in_bounds(index):
        raise InvalidEndpoint(f"{name} {index} outside the grid")
    if grid.occupancy[index]:
        raise InvalidEndpoint(f"{name} {index} is occupied")
    return index


def shortest_path(grid: VoxelGrid, start, goal) -> GridPath:
    start = _check_endpoint(grid, start, "start")
    goal = _check_endpoint(grid, goal, "goal")
    if start == goal:
        return GridPath(np.array([start], dtype=np.int64), 0.0)
    cells, _ = _backend.grid_search(
        grid.occupancy.view(np.uint8), None, start, goal, grid.voxel_size
    )
    if cells is None:
        raise NoPath(f"goal {goal} unreachable from {start}")
    return GridPath(cells, path_length(cells, grid.voxel_size))


def distance_map(grid: VoxelGrid) -> DistanceField:
    occ = grid.occupancy
    if not occ.any():
        sentinel = 2.0 * float(np.linalg.norm(np.asarray(grid.dims) * grid.voxel_size))
        dist = np.full(grid.dims, sentinel)
    else:
        dist = ndimage.distance_transform_edt(~occ, sampling=grid.voxel_size)
    return DistanceField(grid.origin.copy(), grid.voxel_size, grid.dims, np.asarray(dist, dtype=np.float64))


def clearance_penalty(field: DistanceField, clearance: float, weight: float = PUSH_WEIGHT) -> np.ndarray:
    return weight * np.maximum(0.0, clearance - field.distance)


def penalized_cost(
    path: GridPath, field: DistanceField, clearance: float, weight: float = PUSH_WEIGHT
) -> float:
    """Metric length plus the entry penalty of every cell after the first."""
    pen = clearance_penalty(field, clearance, weight)
    cells = path.cells
    extra = float(pen[cells[1:, 0], cells[1:, 1], cells[1:, 2]].sum()) if len(cells) > 1 else 0.0
    return path_length(cells, field.voxel_size) + extra


def push_path(
    path: GridPath,
    grid: VoxelGrid,
    field: DistanceField,
    clearance: float,
    weight: float = PUSH_WEIGHT,
) -> GridPath:
    """Re-plan ``path`` away from obstacles where the map allows it.

    The result keeps both endpoints, stays on free cells, and its penalized
    cost never exceeds the input's (the input is the fallback).
    """
    if len(path) == 0:
        raise EmptyPath("cannot push an empty path")
    start = tuple(int(i) for i in path.cells[0])
    goal = tuple(int(i) for i in path.cells[-1])
    if start == goal:
        return GridPath(path.cells.copy(), path.cost)
    pen = clearance_penalty(field, clearance, weight)
    cells, _ = _backend.grid_search(grid.occupancy.view(np.uint8), pen, start, goal, grid.voxel_size)
    if cells is None:
        return GridPath(path.cells.copy(), path.cost)
    candidate = GridPath(cells, path_length(cells, grid.voxel_size))
    if penalized_cost(candidate, field, clearance, weight) > penalized_cost(path, field, clearance, weight):
        return GridPath(path.cells.copy(), path.cost)
    return candidate


def to_polyline(path: GridPath, grid: VoxelGrid) -> np.ndarray:
    if len(path) == 0:
        raise EmptyPath("cannot convert an empty path")
    pts = np.array([voxel_to_world(grid, c) for c in path.cells])
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    return pts[keep]


def write_path_csv(points, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z"])
        for p in np.asarray(points, dtype=np.float64):
            writer.writerow([f"{v:.6f}" for v in p])
    return path
