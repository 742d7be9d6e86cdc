"""Linear jerk-input point-mass model with worst-case linear drag.

State ``x = [p, v, a]`` (9 values, position/velocity/acceleration in the
world frame), input ``u = j`` (jerk).  Euler discretization with step ``h``:

    p' = p + h v
    v' = v + h (a - D v)
    a' = a + h j
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

GRAVITY = 9.81


@dataclass
class AgentState:
    p: np.ndarray
    v: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.float64).reshape(3)
        self.v = np.asarray(self.v, dtype=np.float64).reshape(3)
        self.a = np.asarray(self.a, dtype=np.float64).reshape(3)

    @classmethod
    def at_rest(cls, position) -> AgentState:
        return cls(position, np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, x) -> AgentState:
        x = np.asarray(x, dtype=np.float64)
        return cls(x[0:3], x[3:6], x[6:9])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.v, self.a])


@dataclass
class JerkInput:
    j: np.ndarray

    def __post_init__(self):
        self.j = np.asarray(self.j, dtype=np.float64).reshape(3)


@dataclass
class Limits:
    a_x_max: float = 2 * GRAVITY
    a_y_max: float = 2 * GRAVITY
    a_z_max: float = GRAVITY
    a_z_min: float = -GRAVITY
    j_x_max: float = 90.0
    j_y_max: float = 90.0
    j_z_max: float = 90.0
    v_max: float = 4.0
    d_lin: tuple[float, float, float] = field(default=(1.0, 1.0, 1.0))

    def __post_init__(self):
        self.d_lin = tuple(float(v) for v in self.d_lin)
        if not self.a_z_min < self.a_z_max:
            raise ValueError("a_z_min must be below a_z_max")
        for name in ("a_x_max", "a_y_max", "j_x_max", "j_y_max", "j_z_max", "v_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def unbounded(cls, v_max: float = 4.0, d_lin=(1.0, 1.0, 1.0)) -> Limits:
        inf = float("inf")
        return cls(inf, inf, inf, -inf, inf, inf, inf, v_max, d_lin)

    @property
    def accel_upper(self) -> np.ndarray:
        return np.array([self.a_x_max, self.a_y_max, self.a_z_max])

    @property
    def accel_lower(self) -> np.ndarray:
        return np.array([-self.a_x_max, -self.a_y_max, self.a_z_min])

    @property
    def jerk_max(self) -> np.ndarray:
        return np.array([self.j_x_max, self.j_y_max, self.j_z_max])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["d_lin"] = list(self.d_lin)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Limits:
        return cls(**{k: (tuple(v) if k == "d_lin" else float(v)) for k, v in d.items()})


def transition_matrices(h: float, d_lin) -> tuple[np.ndarray, np.ndarray]:
    """``A`` (9x9) and ``B`` (9x3) with ``x' = A x + B u``."""
    d = np.asarray(d_lin, dtype=np.float64)
    eye = np.eye(3)
    A = np.zeros((9, 9))
    A[0:3, 0:3] = eye
    A[0:3, 3:6] = h * eye
    A[3:6, 3:6] = eye - h * np.diag(d)
    A[3:6, 6:9] = h * eye
    A[6:9, 6:9] = eye
    B = np.zeros((9, 3))
    B[6:9, :] = h * eye
    return A, B


def step_vector(x, u, h: float, d_lin) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    d = np.asarray(d_lin, dtype=np.float64)
    p, v, a = x[0:3], x[3:6], x[6:9]
    return np.concatenate([p + h * v, v + h * (a - d * v), a + h * u])


def step(state: AgentState, input: JerkInput, h: float, d_lin) -> AgentState:
    if h <= 0:
        raise ValueError("h must be positive")
    return AgentState.from_vector(step_vector(state.to_vector(), input.j, h, d_lin))


def rollout(x0, inputs, h: float, d_lin) -> np.ndarray:
    """States ``x_0..x_N`` (shape ``(N+1, 9)``) under the jerk sequence."""
    inputs = np.asarray(inputs, dtype=np.float64).reshape(-1, 3)
    states = np.empty((inputs.shape[0] + 1, 9))
    states[0] = x0
    for k, u in enumerate(inputs):
        states[k + 1] = step_vector(states[k], u, h, d_lin)
    return states


@dataclass(frozen=True)
class BoundViolation:
    bound: str
    excess: float


def check(state: AgentState, input: JerkInput | None, limits: Limits, tol: float = 1e-9) -> list[BoundViolation]:
    """Acceleration and jerk bounds; each violation reports how far past the bound."""
    out = []
    a = state.a
    tests = [
        ("a_x_max", abs(a[0]) - limits.a_x_max),
        ("a_y_max", abs(a[1]) - limits.a_y_max),
        ("a_z_max", a[2] - limits.a_z_max),
        ("a_z_min", limits.a_z_min - a[2]),
    ]
    if input is not None:
        j = input.j
        tests += [
            ("j_x_max", abs(j[0]) - limits.j_x_max),
            ("j_y_max", abs(j[1]) - limits.j_y_max),
            ("j_z_max", abs(j[2]) - limits.j_z_max),
        ]
    for name, excess in tests:
        if excess > tol:
            out.append(BoundViolation(name, float(excess)))
    return out
