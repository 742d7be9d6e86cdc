"""Ground-truth simulated environments.

Static obstacles are voxel-aligned cubes with randomly occupied cells.
Dynamic obstacles carry the same kind of shape and oscillate sinusoidally
along a line segment.  Everything is reproducible from ``(seed, config)``:
the generator is numpy's PCG64 with separate child streams for static and
dynamic draws, so changing the dynamic count never perturbs static layout.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigError

WORLD_SCHEMA = "world/v1"
PRNG_NAME = "numpy.PCG64/SeedSequence"


@dataclass(frozen=True, eq=False)
class ObstacleShape:
    side_voxels: int
    cells: np.ndarray  # (K, 3) int offsets inside the cube

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64).reshape(-1, 3)
        if cells.size and (cells.min() < 0 or cells.max() >= self.side_voxels):
            raise ConfigError("shape cell offsets must lie inside the cube")
        object.__setattr__(self, "cells", cells)

    def __eq__(self, other):
        return (
            isinstance(other, ObstacleShape)
            and self.side_voxels == other.side_voxels
            and np.array_equal(self.cells, other.cells)
        )

    @property
    def empty(self) -> bool:
        return self.cells.shape[0] == 0


@dataclass(frozen=True, eq=False)
class StaticObstacle:
    shape: ObstacleShape
    anchor: np.ndarray  # world position of the cube's min corner

    def __eq__(self, other):
        return (
            isinstance(other, StaticObstacle)
            and self.shape == other.shape
            and np.array_equal(self.anchor, other.anchor)
        )


@dataclass(frozen=True, eq=False)
class DynamicObstacle:
    """Cube-shaped obstacle oscillating along ``direction``.

    ``anchor`` is the cube's min corner at the center of the oscillation.
    """

    shape: ObstacleShape
    anchor: np.ndarray
    direction: np.ndarray
    half_length: float
    omega: float
    phase: float

    def __post_init__(self):
        direction = np.asarray(self.direction, dtype=np.float64)
        if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
            raise ConfigError("direction must be a unit vector")
        if self.half_length < 0:
            raise ConfigError("half_length must be non-negative")
        if self.omega <= 0:
            raise ConfigError("omega must be positive")
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=np.float64))

    def __eq__(self, other):
        return (
            isinstance(other, DynamicObstacle)
            and self.shape == other.shape
            and np.array_equal(self.anchor, other.anchor)
            and np.array_equal(self.direction, other.direction)
            and self.half_length == other.half_length
            and self.omega == other.omega
            and self.phase == other.phase
        )

    @property
    def max_speed(self) -> float:
        return self.half_length * self.omega

    def position(self, t: float) -> np.ndarray:
        return obstacle_position(self, t)


@dataclass
class WorldConfig:
    extent: tuple[float, float, float] = (50.0, 12.0, 12.0)
    voxel_size: float = 0.3
    n_static: int = 200
    n_dynamic: int = 200
    obstacle_side: int = 5
    p_occ: float = 0.1
    max_line_length: float = 5.0
    omega_min: float = math.pi / 7
    omega_max: float = math.pi / 4
    # (center, radius) zones no obstacle may ever enter, e.g. mission start/goal
    clear_zones: list = field(
        default_factory=lambda: [[[1.0, 6.0, 6.0], 1.0], [[49.0, 6.0, 6.0], 1.0]]
    )
    # None for a uniformly random direction; "x", "y" or "z" to fix the axis
    dynamic_axis: str | None = None
    # fixes the height of every dynamic obstacle's center when set
    dynamic_height: float | None = None

    def validate(self) -> None:
        if len(self.extent) != 3 or any(e <= 0 for e in self.extent):
            raise ConfigError("extent must be three positive lengths")
        if self.voxel_size <= 0:
            raise ConfigError("voxel_size must be positive")
        if self.n_static < 0 or self.n_dynamic < 0:
            raise ConfigError("obstacle counts must be non-negative")
        if self.obstacle_side < 1:
            raise ConfigError("obstacle_side must be at least one voxel")
        if not 0.0 <= self.p_occ <= 1.0:
            raise ConfigError("p_occ must be a probability")
        if self.max_line_length < 0:
            raise ConfigError("max_line_length must be non-negative")
        if not 0 < self.omega_min <= self.omega_max:
            raise ConfigError("omega range must be positive and ordered")
        if self.dynamic_axis not in (None, "x", "y", "z"):
            raise ConfigError("dynamic_axis must be one of x, y, z or null")
        dims = grid_dims(self.extent, self.voxel_size)
        if any(d < self.obstacle_side for d in dims):
            raise ConfigError("extent too small for the obstacle cube")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["extent"] = list(self.extent)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> WorldConfig:
        d = dict(d)
        if "extent" in d:
            d["extent"] = tuple(float(v) for v in d["extent"])
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown world config keys: {sorted(unknown)}")
        return cls(**d)


def grid_dims(extent, voxel_size) -> tuple[int, int, int]:
    """Voxel counts covering ``extent``; partial voxels round up."""
    return tuple(int(math.ceil(e / voxel_size - 1e-9)) for e in extent)


@dataclass(eq=False)
class World:
    extent: tuple[float, float, float]
    voxel_size: float
    static_obstacles: list[StaticObstacle]
    dynamic_obstacles: list[DynamicObstacle]
    seed: int
    config: WorldConfig | None = None

    @property
    def dims(self) -> tuple[int, int, int]:
        return grid_dims(self.extent, self.voxel_size)

    @cached_property
    def static_cell_mins(self) -> np.ndarray:
        chunks = [
            ob.anchor + ob.shape.cells * self.voxel_size
            for ob in self.static_obstacles
            if not ob.shape.empty
        ]
        return np.concatenate(chunks) if chunks else np.zeros((0, 3))

    @cached_property
    def dynamic_arrays(self) -> dict[str, np.ndarray]:
        """Flattened per-cell arrays for vectorized pose queries."""
        base, owner = [], []
        for i, ob in enumerate(self.dynamic_obstacles):
            if ob.shape.empty:
                continue
            base.append(ob.anchor + ob.shape.cells * self.voxel_size)
            owner.append(np.full(ob.shape.cells.shape[0], i, dtype=np.int64))
        obs = self.dynamic_obstacles
        return {
            "cell_base": np.concatenate(base) if base else np.zeros((0, 3)),
            "owner": np.concatenate(owner) if owner else np.zeros(0, dtype=np.int64),
            "axis": np.array([ob.direction * ob.half_length for ob in obs]).reshape(-1, 3),
            "omega": np.array([ob.omega for ob in obs], dtype=np.float64),
            "phase": np.array([ob.phase for ob in obs], dtype=np.float64),
        }

    def dynamic_cell_mins(self, t: float) -> np.ndarray:
        arr = self.dynamic_arrays
        if arr["cell_base"].shape[0] == 0:
            return arr["cell_base"]
        disp = arr["axis"] * np.sin(arr["omega"] * t + arr["phase"])[:, None]
        return arr["cell_base"] + disp[arr["owner"]]

    def __eq__(self, other):
        return isinstance(other, World) and world_to_dict(self) == world_to_dict(other)


def _draw_shape(rng: np.random.Generator, side: int, p_occ: float) -> ObstacleShape:
    mask = rng.random((side, side, side)) < p_occ
    return ObstacleShape(side, np.argwhere(mask))


def _box_point_distance(lo, hi, point) -> float:
    gap = np.maximum(np.maximum(lo - point, point - hi), 0.0)
    return float(np.linalg.norm(gap))


def _blocks_zone(lo, hi, zones) -> bool:
    return any(_box_point_distance(lo, hi, np.asarray(c, dtype=np.float64)) < r for c, r in zones)


def generate_world(seed: int, config: WorldConfig | None = None) -> World:
    config = config or WorldConfig()
    config.validate()
    vs = config.voxel_size
    dims = np.array(grid_dims(config.extent, vs))
    side = config.obstacle_side
    cube = side * vs
    zones = config.clear_zones or []

    static_ss, dynamic_ss = np.random.SeedSequence(seed).spawn(2)
    rng_s = np.random.Generator(np.random.PCG64(static_ss))
    rng_d = np.random.Generator(np.random.PCG64(dynamic_ss))

    statics: list[StaticObstacle] = []
    for _ in range(config.n_static):
        shape = _draw_shape(rng_s, side, config.p_occ)
        for _attempt in range(1000):
            idx = rng_s.integers(0, dims - side + 1)
            anchor = idx * vs
            if not _blocks_zone(anchor, anchor + cube, zones):
                break
        else:
            raise ConfigError("could not place a static obstacle outside the clear zones")
        statics.append(StaticObstacle(shape, anchor.astype(np.float64)))

    axes = {"x": 0, "y": 1, "z": 2}
    span = dims * vs - cube
    dynamics: list[DynamicObstacle] = []
    for _ in range(config.n_dynamic):
        shape = _draw_shape(rng_d, side, config.p_occ)
        for _attempt in range(1000):
            anchor = rng_d.uniform(0.0, 1.0, size=3) * span
            if config.dynamic_height is not None:
                anchor[2] = config.dynamic_height - cube / 2
            if config.dynamic_axis is None:
                v = rng_d.normal(size=3)
                direction = v / np.linalg.norm(v)
            else:
                direction = np.zeros(3)
                direction[axes[config.dynamic_axis]] = 1.0
            length = rng_d.uniform(0.0, config.max_line_length)
            omega = rng_d.uniform(config.omega_min, config.omega_max)
            phase = rng_d.uniform(0.0, 2 * math.pi)
            reach = np.abs(direction) * length / 2
            if not _blocks_zone(anchor - reach, anchor + cube + reach, zones):
                break
        else:
            raise ConfigError("could not place a dynamic obstacle outside the clear zones")
        dynamics.append(
            DynamicObstacle(shape, anchor, direction, float(length / 2), float(omega), float(phase))
        )

    return World(tuple(float(e) for e in config.extent), vs, statics, dynamics, int(seed), config)


def obstacle_position(ob: DynamicObstacle, t: float) -> np.ndarray:
    return ob.anchor + ob.direction * ob.half_length * math.sin(ob.omega * t + ob.phase)


def sin_range(theta0, theta1):
    """Exact min and max of ``sin`` over ``[theta0, theta1]`` (vectorized)."""
    theta0 = np.asarray(theta0, dtype=np.float64)
    theta1 = np.asarray(theta1, dtype=np.float64)
    s0 = np.sin(theta0)
    s1 = np.sin(theta1)
    lo = np.minimum(s0, s1)
    hi = np.maximum(s0, s1)
    two_pi = 2 * math.pi
    peak = np.ceil((theta0 - math.pi / 2) / two_pi) * two_pi + math.pi / 2
    trough = np.ceil((theta0 + math.pi / 2) / two_pi) * two_pi - math.pi / 2
    hi = np.where(peak <= theta1, 1.0, hi)
    lo = np.where(trough <= theta1, -1.0, lo)
    return lo, hi


def collision_check(world: World, point, t: float, agent_radius: float) -> bool:
    """True iff a sphere at ``point`` touches any obstacle cell at time ``t``."""
    p = np.asarray(point, dtype=np.float64)
    vs = world.voxel_size
    for mins in (world.static_cell_mins, world.dynamic_cell_mins(t)):
        if mins.shape[0] == 0:
            continue
        gap = np.maximum(np.maximum(mins - p, p - (mins + vs)), 0.0)
        if (np.einsum("ij,ij->i", gap, gap) <= agent_radius * agent_radius + 1e-12).any():
            return True
    return False


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _shape_to_dict(shape: ObstacleShape) -> dict:
    return {"side_voxels": shape.side_voxels, "cells": shape.cells.tolist()}


def _shape_from_dict(d: dict) -> ObstacleShape:
    return ObstacleShape(int(d["side_voxels"]), np.asarray(d["cells"], dtype=np.int64).reshape(-1, 3))


def world_to_dict(world: World) -> dict:
    return {
        "schema": WORLD_SCHEMA,
        "prng": PRNG_NAME,
        "seed": world.seed,
        "extent": list(world.extent),
        "voxel_size": world.voxel_size,
        "config": world.config.to_dict() if world.config else None,
        "static_obstacles": [
            {"shape": _shape_to_dict(ob.shape), "anchor": ob.anchor.tolist()}
            for ob in world.static_obstacles
        ],
        "dynamic_obstacles": [
            {
                "shape": _shape_to_dict(ob.shape),
                "anchor": ob.anchor.tolist(),
                "direction": ob.direction.tolist(),
                "half_length": ob.half_length,
                "omega": ob.omega,
                "phase": ob.phase,
            }
            for ob in world.dynamic_obstacles
        ],
    }


def world_from_dict(d: dict) -> World:
    if d.get("schema") != WORLD_SCHEMA:
        raise ConfigError(f"expected schema {WORLD_SCHEMA}, got {d.get('schema')!r}")
    statics = [
        StaticObstacle(_shape_from_dict(o["shape"]), np.asarray(o["anchor"], dtype=np.float64))
        for o in d["static_obstacles"]
    ]
    dynamics = [
        DynamicObstacle(
            _shape_from_dict(o["shape"]),
            np.asarray(o["anchor"], dtype=np.float64),
            np.asarray(o["direction"], dtype=np.float64),
            float(o["half_length"]),
            float(o["omega"]),
            float(o["phase"]),
        )
        for o in d["dynamic_obstacles"]
    ]
    config = WorldConfig.from_dict(d["config"]) if d.get("config") else None
    return World(tuple(d["extent"]), float(d["voxel_size"]), statics, dynamics, int(d["seed"]), config)


def save_world(world: World, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(world_to_dict(world)), encoding="utf-8")
    return path


def load_world(path) -> World:
    return world_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
