"""Run configuration files (JSON, schema ``config/v1``)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .planner import PlannerConfig
from .sim import DEFAULT_GOAL, DEFAULT_START
from .world import WorldConfig

CONFIG_SCHEMA = "config/v1"


@dataclass
class RunConfig:
    world: WorldConfig = field(default_factory=WorldConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    output_dir: str = "out"
    start: tuple[float, float, float] = DEFAULT_START
    goal: tuple[float, float, float] = DEFAULT_GOAL

    def __post_init__(self):
        self.seeds = [int(s) for s in self.seeds]
        self.start = tuple(float(v) for v in self.start)
        self.goal = tuple(float(v) for v in self.goal)
        if len(self.start) != 3 or len(self.goal) != 3:
            raise ConfigError("start and goal need three coordinates")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("duplicate seeds")

    def to_dict(self) -> dict:
        return {
            "schema": CONFIG_SCHEMA,
            "world": self.world.to_dict(),
            "planner": self.planner.to_dict(),
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
            "start": list(self.start),
            "goal": list(self.goal),
        }

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        if d.get("schema") != CONFIG_SCHEMA:
            raise ConfigError(f"expected schema {CONFIG_SCHEMA}")
        unknown = set(d) - {"schema", "world", "planner", "seeds", "output_dir", "start", "goal"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        base = cls()
        return cls(
            WorldConfig.from_dict(d["world"]) if "world" in d else base.world,
            PlannerConfig.from_dict(d["planner"]) if "planner" in d else base.planner,
            d.get("seeds", base.seeds),
            d.get("output_dir", base.output_dir),
            d.get("start", base.start),
            d.get("goal", base.goal),
        )

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.to_dict() == other.to_dict()


def load_config(path) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return RunConfig.from_dict(data)


def save_config(cfg: RunConfig, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(cfg.to_dict(), indent=2), encoding="utf-8")
    return path
