"""Temporal safe corridors.

For each step of the horizon the free voxels inside the reachable cube are
covered by axis-aligned boxes grown greedily from seed voxels.  Boxes are
stored as general halfspace polyhedra so the solver never depends on them
being axis-aligned.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage

from . import _backend
from .errors import NoFreeSpace, SeedOccupied
from .grid import TemporalOccupancyGrid, VoxelGrid, VoxelRange, clamp_to_voxel

TSC_SCHEMA = "tsc/v1"
DEFAULT_COVERAGE = 0.95
DEFAULT_MAX_POLYHEDRA = 6


@dataclass(eq=False)
class Polyhedron:
    """``{x : normals @ x <= offsets}``."""

    normals: np.ndarray  # (m, 3)
    offsets: np.ndarray  # (m,)

    def __post_init__(self):
        self.normals = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
        self.offsets = np.asarray(self.offsets, dtype=np.float64).reshape(-1)
        if self.normals.shape[0] != self.offsets.shape[0]:
            raise ValueError("normals and offsets disagree in length")

    @classmethod
    def from_box(cls, lo, hi) -> Polyhedron:
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        eye = np.eye(3)
        normals = np.vstack([eye, -eye])
        offsets = np.concatenate([hi, -lo])
        return cls(normals, offsets)

    @property
    def halfspaces(self) -> list[tuple[np.ndarray, float]]:
        return [(n.copy(), float(c)) for n, c in zip(self.normals, self.offsets)]

    def violation(self, point) -> float:
        """Largest normalized halfspace excess; <= 0 means inside."""
        p = np.asarray(point, dtype=np.float64)
        norms = np.linalg.norm(self.normals, axis=1)
        return float(np.max((self.normals @ p - self.offsets) / norms))

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Tight box via LP; exact for the axis-aligned boxes built here."""
        from scipy.optimize import linprog

        lo = np.empty(3)
        hi = np.empty(3)
        for axis in range(3):
            c = np.zeros(3)
            c[axis] = 1.0
            lo[axis] = linprog(c, A_ub=self.normals, b_ub=self.offsets, bounds=[(None, None)] * 3).fun
            hi[axis] = -linprog(-c, A_ub=self.normals, b_ub=self.offsets, bounds=[(None, None)] * 3).fun
        return lo, hi

    def to_dict(self) -> dict:
        return {
            "halfspaces": [
                {"normal": n.tolist(), "offset": float(c)} for n, c in zip(self.normals, self.offsets)
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> Polyhedron:
        hs = d["halfspaces"]
        return cls([h["normal"] for h in hs], [h["offset"] for h in hs])


@dataclass(eq=False)
class SafeCorridor:
    polyhedra: list[Polyhedron]
    # voxel boxes the polyhedra came from, in the source grid's index space
    boxes: list[VoxelRange] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.polyhedra)


@dataclass(eq=False)
class TemporalSafeCorridor:
    corridors: list[SafeCorridor]
    time_step: float

    def __len__(self) -> int:
        return len(self.corridors)

    def __getitem__(self, k: int) -> SafeCorridor:
        return self.corridors[k]


def contains(poly: Polyhedron, point, tol: float = 0.0) -> bool:
    p = np.asarray(point, dtype=np.float64)
    return bool(np.all(poly.normals @ p <= poly.offsets + tol))


def reachable_box(agent_pos, v_max: float, k: int, time_step: float, grid: VoxelGrid) -> VoxelRange:
    """Voxel range covering the cube of half-extent ``v_max*k*time_step``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    d_reach = v_max * k * time_step
    p = np.asarray(agent_pos, dtype=np.float64)
    lo = clamp_to_voxel(grid, p - d_reach)
    hi = clamp_to_voxel(grid, p + d_reach)
    return VoxelRange(lo, hi)


def box_polyhedron(grid: VoxelGrid, box: VoxelRange) -> Polyhedron:
    lo = grid.origin + np.asarray(box.lo) * grid.voxel_size
    hi = grid.origin + (np.asarray(box.hi) + 1) * grid.voxel_size
    return Polyhedron.from_box(lo, hi)


def grow_box(grid: VoxelGrid, seed, region: VoxelRange) -> VoxelRange:
    seed = tuple(int(i) for i in seed)
    if not region.contains(seed):
        raise ValueError(f"seed {seed} outside region")
    if grid.occupancy[seed]:
        raise SeedOccupied(f"seed {seed} is occupied")
    lo, hi = _backend.grow_box(grid.occupancy.view(np.uint8), seed, region.lo, region.hi)
    return VoxelRange(tuple(int(v) for v in lo), tuple(int(v) for v in hi))


def grow_box_polyhedron(grid: VoxelGrid, seed, region: VoxelRange) -> Polyhedron:
    return box_polyhedron(grid, grow_box(grid, seed, region))


def generate_safe_corridor(
    grid: VoxelGrid,
    region: VoxelRange,
    priority_seeds: Sequence = (),
    max_polyhedra: int = DEFAULT_MAX_POLYHEDRA,
    coverage: float = DEFAULT_COVERAGE,
    snap_seeds: bool = True,
) -> SafeCorridor:
    """Cover the free voxels of ``region`` with greedily grown boxes.

    With ``snap_seeds`` an occupied priority seed is replaced by the nearest
    free voxel of the region (first in index order on ties).
    """
    sub = grid.occupancy[region.slices()]
    free = ~sub
    n_free = int(free.sum())
    if n_free == 0:
        raise NoFreeSpace()
    covered = np.zeros(sub.shape, dtype=bool)
    boxes: list[VoxelRange] = []
    lo = np.asarray(region.lo)

    def add(seed) -> None:
        box = grow_box(grid, seed, region)
        covered[tuple(slice(l - r, h - r + 1) for l, h, r in zip(box.lo, box.hi, region.lo))] = True
        boxes.append(box)

    nearest = None
    seen = set()
    for seed in priority_seeds:
        if len(boxes) >= max_polyhedra:
            break
        seed = tuple(int(i) for i in seed)
        if seed in seen or not region.contains(seed):
            continue
        local = tuple(np.asarray(seed) - lo)
        if sub[local] and snap_seeds:
            if nearest is None:
                nearest = ndimage.distance_transform_edt(sub, return_distances=False, return_indices=True)
            local = tuple(int(nearest[a][local]) for a in range(3))
            seed = tuple(int(i) for i in np.asarray(local) + lo)
        seen.add(seed)
        if sub[local] or covered[local]:
            continue
        add(seed)

    dist = ndimage.distance_transform_edt(free) if sub.any() else np.zeros(sub.shape)
    while len(boxes) < max_polyhedra and (covered & free).sum() < coverage * n_free:
        candidates = free & ~covered
        if not candidates.any():
            break
        # argmax returns the first (lexicographically smallest) maximizer
        flat = int(np.argmax(np.where(candidates, dist, -1.0)))
        local = np.unravel_index(flat, sub.shape)
        add(tuple(int(i) for i in np.asarray(local) + lo))

    return SafeCorridor([box_polyhedron(grid, b) for b in boxes], boxes)


def generate_tsc(
    tog: TemporalOccupancyGrid,
    agent_pos,
    v_max: float,
    reference_points,
    max_polyhedra: int = DEFAULT_MAX_POLYHEDRA,
    extra_seeds=None,
    coverage: float = DEFAULT_COVERAGE,
) -> TemporalSafeCorridor:
    """One safe corridor per TOG grid; step ``k`` (1-based) uses ``tog[k-1]``.

    Each step is seeded with the agent's cell, the step's reference cell
    (clamped into the reachable box), then any ``extra_seeds[k-1]`` points.
    """
    if len(tog) == 0:
        raise ValueError("empty temporal occupancy grid")
    reference_points = np.asarray(reference_points, dtype=np.float64).reshape(-1, 3)
    if reference_points.shape[0] != len(tog):
        raise ValueError("need exactly one reference point per TOG grid")
    corridors = []
    for k in range(1, len(tog) + 1):
        grid = tog[k - 1]
        region = reachable_box(agent_pos, v_max, k, tog.time_step, grid)
        seeds = [clamp_to_voxel(grid, agent_pos), region.clamp(clamp_to_voxel(grid, reference_points[k - 1]))]
        if extra_seeds is not None:
            for p in np.asarray(extra_seeds[k - 1], dtype=np.float64).reshape(-1, 3):
                seeds.append(region.clamp(clamp_to_voxel(grid, p)))
        try:
            corridors.append(generate_safe_corridor(grid, region, seeds, max_polyhedra, coverage))
        except NoFreeSpace:
            raise NoFreeSpace(step=k) from None
    return TemporalSafeCorridor(corridors, tog.time_step)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def tsc_to_dict(tsc: TemporalSafeCorridor) -> dict:
    return {
        "schema": TSC_SCHEMA,
        "time_step": tsc.time_step,
        "steps": [{"polyhedra": [p.to_dict() for p in c.polyhedra]} for c in tsc.corridors],
    }


def tsc_from_dict(d: dict) -> TemporalSafeCorridor:
    if d.get("schema") != TSC_SCHEMA:
        raise ValueError(f"expected schema {TSC_SCHEMA}")
    corridors = [SafeCorridor([Polyhedron.from_dict(p) for p in s["polyhedra"]]) for s in d["steps"]]
    return TemporalSafeCorridor(corridors, float(d["time_step"]))


def save_tsc(tsc: TemporalSafeCorridor, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(tsc_to_dict(tsc)), encoding="utf-8")
    return path


def chebyshev_radius(poly: Polyhedron) -> float:
    """Radius of the largest inscribed ball (0 or less means no interior)."""
    from scipy.optimize import linprog

    norms = np.linalg.norm(poly.normals, axis=1)
    A = np.hstack([poly.normals, norms[:, None]])
    res = linprog([0, 0, 0, -1], A_ub=A, b_ub=poly.offsets, bounds=[(None, None)] * 3 + [(0, None)])
    if res.status != 0:
        return math.inf if res.status == 3 else 0.0
    return float(-res.fun)
