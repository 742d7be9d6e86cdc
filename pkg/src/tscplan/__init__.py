"""Temporal-safe-corridor trajectory planning for a jerk-controlled agent."""

from ._backend import BACKEND
from .corridor import Polyhedron, SafeCorridor, TemporalSafeCorridor, generate_tsc
from .dynamics import AgentState, JerkInput, Limits
from .grid import TemporalOccupancyGrid, VoxelGrid, build_tog
from .miqp import MpcProblem, MpcSolution, Weights, check_solution, enumerate_oracle, solve_bnb
from .planner import PlannerConfig, run_mission
from .qp import QuadraticProgram, solve_qp
from .sim import MissionResult, run_batch
from .world import World, WorldConfig, generate_world

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AgentState",
    "JerkInput",
    "Limits",
    "MissionResult",
    "MpcProblem",
    "MpcSolution",
    "PlannerConfig",
    "Polyhedron",
    "QuadraticProgram",
    "SafeCorridor",
    "TemporalOccupancyGrid",
    "TemporalSafeCorridor",
    "VoxelGrid",
    "Weights",
    "World",
    "WorldConfig",
    "build_tog",
    "check_solution",
    "enumerate_oracle",
    "generate_tsc",
    "generate_world",
    "run_batch",
    "run_mission",
    "solve_bnb",
    "solve_qp",
]
