"""Exception types shared across the planner stack."""


class PlannerError(Exception):
    """Base class for all tscplan errors."""


class OutOfBounds(PlannerError, IndexError):
    def __init__(self, axis: int, value):
        self.axis = axis
        self.value = value
        super().__init__(f"index out of bounds on axis {'xyz'[axis]} ({value})")


class ConfigError(PlannerError, ValueError):
    pass


class NoPath(PlannerError):
    pass


class InvalidEndpoint(PlannerError, ValueError):
    pass


class EmptyPath(PlannerError, ValueError):
    pass


class SeedOccupied(PlannerError, ValueError):
    pass


class NoFreeSpace(PlannerError):
    def __init__(self, step: int | None = None, message: str = "no free voxel in region"):
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(message + where)


class EmptyPolyline(PlannerError, ValueError):
    pass


class NumericalFailure(PlannerError, ArithmeticError):
    pass


class DimensionMismatch(PlannerError, ValueError):
    pass


class TooManyAssignments(PlannerError):
    pass


class Timeout(PlannerError):
    """Raised by callers that want an exception instead of a timeout status."""

    def __init__(self, incumbent=None):
        self.incumbent = incumbent
        super().__init__("branch-and-bound budget exhausted")


class MissionFailed(PlannerError):
    pass


class EmptyTrace(PlannerError, ValueError):
    pass
