"""Mixed-integer MPC over a temporal safe corridor.

Each step ``k = 1..N`` of the horizon must place the agent inside one of the
polyhedra of corridor ``k``.  The binary choices are handled by best-first
branch and bound over QP relaxations; the dynamics are condensed per axis so
relaxations only carry the ``3N`` jerk inputs as variables.

Dropping a membership constraint only enlarges the feasible set, so a node's
relaxation value is a valid lower bound for every assignment below it.
"""

from __future__ import annotations

import heapq
import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corridor import Polyhedron, SafeCorridor, TemporalSafeCorridor, contains, tsc_from_dict, tsc_to_dict
from .dynamics import AgentState, BoundViolation, JerkInput, Limits, check, rollout, step_vector, transition_matrices
from .errors import DimensionMismatch, TooManyAssignments
from .qp import QuadraticProgram, ReducedQP, solve_qp
from . import _backend

MPC_SCHEMA = "mpc/v1"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
TIMEOUT = "timeout"

DEFAULT_NODE_LIMIT = 2000
ORACLE_GUARD = 10_000


@dataclass
class Weights:
    state: np.ndarray = field(default_factory=lambda: np.array([5.0] * 3 + [0.0] * 6))
    terminal: np.ndarray = field(default_factory=lambda: np.array([50.0] * 3 + [0.0] * 6))
    input: np.ndarray = field(default_factory=lambda: np.full(3, 0.005))

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=np.float64).reshape(9)
        self.terminal = np.asarray(self.terminal, dtype=np.float64).reshape(9)
        self.input = np.asarray(self.input, dtype=np.float64).reshape(3)
        if np.any(self.state < 0) or np.any(self.terminal < 0) or np.any(self.input <= 0):
            raise ValueError("weights must be nonnegative with positive input weights")

    def to_dict(self) -> dict:
        return {"state": self.state.tolist(), "terminal": self.terminal.tolist(), "input": self.input.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> Weights:
        return cls(d["state"], d["terminal"], d["input"])


@dataclass(eq=False)
class MpcProblem:
    x0: np.ndarray  # (9,)
    refs: np.ndarray  # (N+1, 9)
    tsc: TemporalSafeCorridor
    limits: Limits = field(default_factory=Limits)
    weights: Weights = field(default_factory=Weights)
    h: float = 0.1

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=np.float64).reshape(-1)
        self.refs = np.asarray(self.refs, dtype=np.float64)
        if self.refs.ndim == 2 and self.refs.shape[1] == 3:
            full = np.zeros((self.refs.shape[0], 9))
            full[:, 0:3] = self.refs
            self.refs = full
        if self.x0.shape != (9,):
            raise DimensionMismatch("x0 must have 9 entries")
        if self.refs.ndim != 2 or self.refs.shape[1] != 9:
            raise DimensionMismatch("refs must have shape (N+1, 9)")
        if self.refs.shape[0] != len(self.tsc) + 1:
            raise DimensionMismatch(
                f"{self.refs.shape[0]} reference states for a {len(self.tsc)}-step corridor"
            )
        if len(self.tsc) < 1:
            raise DimensionMismatch("corridor must cover at least one step")
        for k, corridor in enumerate(self.tsc.corridors, start=1):
            if len(corridor) == 0:
                raise DimensionMismatch(f"corridor step {k} has no polyhedra")
        if self.h <= 0:
            raise ValueError("h must be positive")

    @property
    def N(self) -> int:
        return len(self.tsc)

    def num_assignments(self) -> int:
        total = 1
        for c in self.tsc.corridors:
            total *= len(c)
        return total


@dataclass(frozen=True)
class Assignment:
    chosen: tuple[int, ...]  # polyhedron index for steps 1..N

    def __getitem__(self, k: int) -> int:
        """Polyhedron for step ``k`` (1-based)."""
        return self.chosen[k - 1]

    def __len__(self) -> int:
        return len(self.chosen)


@dataclass
class SolveStats:
    nodes: int = 0
    qp_iterations: int = 0
    wall_time: float = 0.0
    bound_violations: int = 0
    max_bound_violation: float = 0.0


@dataclass(eq=False)
class MpcSolution:
    status: str
    states: np.ndarray | None = None  # (N+1, 9)
    inputs: np.ndarray | None = None  # (N, 3)
    assignment: Assignment | None = None
    objective: float = float("inf")
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class BnbConfig:
    tol: float = 1e-8
    gap: float = 1e-7
    node_limit: int | None = DEFAULT_NODE_LIMIT
    time_budget: float | None = None  # seconds of wall clock; None means unlimited
    membership_tol: float = 1e-7


# ---------------------------------------------------------------------------
# objective and full QP form
# ---------------------------------------------------------------------------


def mpc_objective(problem: MpcProblem, states, inputs) -> float:
    states = np.asarray(states, dtype=np.float64)
    inputs = np.asarray(inputs, dtype=np.float64)
    N = problem.N
    w = problem.weights
    err = states - problem.refs
    total = float(np.sum(err[:N] ** 2 * w.state))
    total += float(np.sum(inputs**2 * w.input))
    total += float(np.sum(err[N] ** 2 * w.terminal))
    return total


def _bound_rows_state(limits: Limits):
    """Rows ``G a <= g`` on one acceleration vector."""
    G = []
    g = []
    for axis, (lo, hi) in enumerate(zip(limits.accel_lower, limits.accel_upper)):
        e = np.zeros(3)
        e[axis] = 1.0
        if np.isfinite(hi):
            G.append(e)
            g.append(hi)
        if np.isfinite(lo):
            G.append(-e)
            g.append(-lo)
    return np.array(G).reshape(-1, 3), np.array(g)


def _bound_rows_input(limits: Limits):
    G = []
    g = []
    for axis, jm in enumerate(limits.jerk_max):
        if np.isfinite(jm):
            e = np.zeros(3)
            e[axis] = 1.0
            G += [e, -e]
            g += [jm, jm]
    return np.array(G).reshape(-1, 3), np.array(g)


def build_qp(problem: MpcProblem, assignment) -> QuadraticProgram:
    """Fixed-assignment QP over ``z = [x_1..x_N, u_0..u_{N-1}]`` (12N variables).

    The objective includes the constant stage cost of ``x_0``.
    """
    chosen = assignment.chosen if isinstance(assignment, Assignment) else tuple(assignment)
    N = problem.N
    if len(chosen) != N:
        raise DimensionMismatch(f"assignment has {len(chosen)} entries, expected {N}")
    for k, c in enumerate(chosen, start=1):
        if not 0 <= c < len(problem.tsc[k - 1]):
            raise DimensionMismatch(f"step {k} has no polyhedron {c}")
    nx = 9 * N
    n = nx + 3 * N
    w = problem.weights
    A, B = transition_matrices(problem.h, problem.limits.d_lin)

    def xs(k):  # slice of x_k, k >= 1
        return slice(9 * (k - 1), 9 * k)

    def us(k):
        return slice(nx + 3 * k, nx + 3 * k + 3)

    H = np.zeros((n, n))
    f = np.zeros(n)
    const = 0.0
    e0 = problem.x0 - problem.refs[0]
    const += float(np.sum(w.state * e0**2))
    for k in range(1, N + 1):
        wk = w.terminal if k == N else w.state
        H[xs(k), xs(k)] += 2 * np.diag(wk)
        f[xs(k)] += -2 * wk * problem.refs[k]
        const += float(np.sum(wk * problem.refs[k] ** 2))
    for k in range(N):
        H[us(k), us(k)] += 2 * np.diag(w.input)

    A_eq = np.zeros((9 * N + 3, n))
    b_eq = np.zeros(9 * N + 3)
    for k in range(N):
        rows = slice(9 * k, 9 * k + 9)
        A_eq[rows, xs(k + 1)] = np.eye(9)
        A_eq[rows, us(k)] = -B
        if k == 0:
            b_eq[rows] = A @ problem.x0
        else:
            A_eq[rows, xs(k)] = -A
    A_eq[9 * N : 9 * N + 3, 9 * (N - 1) + 3 : 9 * (N - 1) + 6] = np.eye(3)

    rows_in = []
    rhs_in = []
    Ga, ga = _bound_rows_state(problem.limits)
    Gj, gj = _bound_rows_input(problem.limits)
    for k in range(1, N + 1):
        if Ga.shape[0]:
            blk = np.zeros((Ga.shape[0], n))
            blk[:, 9 * (k - 1) + 6 : 9 * k] = Ga
            rows_in.append(blk)
            rhs_in.append(ga)
        if Gj.shape[0]:
            blk = np.zeros((Gj.shape[0], n))
            blk[:, us(k - 1)] = Gj
            rows_in.append(blk)
            rhs_in.append(gj)
        poly = problem.tsc[k - 1].polyhedra[chosen[k - 1]]
        blk = np.zeros((poly.normals.shape[0], n))
        blk[:, 9 * (k - 1) : 9 * (k - 1) + 3] = poly.normals
        rows_in.append(blk)
        rhs_in.append(poly.offsets)
    A_in = np.vstack(rows_in) if rows_in else np.zeros((0, n))
    b_in = np.concatenate(rhs_in) if rhs_in else np.zeros(0)
    return QuadraticProgram(H, f, A_eq, b_eq, A_in, b_in, const)


def unpack_full(problem: MpcProblem, z) -> tuple[np.ndarray, np.ndarray]:
    N = problem.N
    z = np.asarray(z, dtype=np.float64)
    states = np.vstack([problem.x0, z[: 9 * N].reshape(N, 9)])
    inputs = z[9 * N :].reshape(N, 3)
    return states, inputs


# ---------------------------------------------------------------------------
# condensed form used by branch and bound
# ---------------------------------------------------------------------------


class _Condensed:
    """State ``k`` as an affine function ``S[k] u + off[k]`` of ``u``.

    ``u`` stacks the jerk inputs per axis: ``u[axis*N + j]`` is ``j_j`` on
    ``axis``.
    """

    def __init__(self, problem: MpcProblem):
        N = problem.N
        h = problem.h
        self.N = N
        n = 3 * N
        S = np.zeros((N + 1, 9, n))
        off = np.zeros((N + 1, 9))
        for axis in range(3):
            dl = problem.limits.d_lin[axis]
            Ai = np.array([[1.0, h, 0.0], [0.0, 1.0 - h * dl, h], [0.0, 0.0, 1.0]])
            Bi = np.array([0.0, 0.0, h])
            s = problem.x0[[axis, 3 + axis, 6 + axis]]
            Gam = np.zeros((3, N))
            rows = [axis, 3 + axis, 6 + axis]
            off[0, rows] = s
            for k in range(N):
                Gam = Ai @ Gam
                Gam[:, k] += Bi
                s = Ai @ s
                S[k + 1][np.ix_(rows, range(axis * N, (axis + 1) * N))] = Gam
                off[k + 1, rows] = s
        self.S = S
        self.off = off

        w = problem.weights
        H = np.zeros((n, n))
        f = np.zeros(n)
        const = 0.0
        for k in range(N + 1):
            wk = w.terminal if k == N else w.state
            e = off[k] - problem.refs[k]
            SW = S[k].T * wk
            H += 2 * SW @ S[k]
            f += 2 * SW @ e
            const += float(np.sum(wk * e**2))
        H += 2 * np.diag(np.repeat(w.input, N))
        self.H = 0.5 * (H + H.T)
        self.f = f
        self.const = const
        self.A_eq = S[N][3:6]
        self.b_eq = -off[N][3:6]

        Ga, ga = _bound_rows_state(problem.limits)
        Gj, gj = _bound_rows_input(problem.limits)
        rows = []
        rhs = []
        for k in range(1, N + 1):
            if Ga.shape[0]:
                rows.append(Ga @ S[k][6:9])
                rhs.append(ga - Ga @ off[k][6:9])
            if Gj.shape[0]:
                sel = np.zeros((3, n))
                sel[[0, 1, 2], [k - 1, N + k - 1, 2 * N + k - 1]] = 1.0
                rows.append(Gj @ sel)
                rhs.append(gj)
        self.A_bounds = np.vstack(rows) if rows else np.zeros((0, n))
        self.b_bounds = np.concatenate(rhs) if rhs else np.zeros(0)

    def positions(self, u) -> np.ndarray:
        return self.S[:, 0:3, :] @ u + self.off[:, 0:3]

    def membership_rows(self, k: int, poly: Polyhedron):
        return poly.normals @ self.S[k][0:3], poly.offsets - poly.normals @ self.off[k][0:3]

    def inputs(self, u) -> np.ndarray:
        return np.asarray(u).reshape(3, self.N).T.copy()


class _PolyTable:
    """Normalized halfspaces for fast point-to-polyhedron violation."""

    def __init__(self, tsc: TemporalSafeCorridor):
        self.steps = []
        for corridor in tsc.corridors:
            entries = []
            for poly in corridor.polyhedra:
                norms = np.linalg.norm(poly.normals, axis=1)
                entries.append((poly.normals / norms[:, None], poly.offsets / norms))
            self.steps.append(entries)

    def violations(self, k: int, point) -> np.ndarray:
        return np.array([float(np.max(n @ point - c)) for n, c in self.steps[k - 1]])


def _finish(problem: MpcProblem, cond: _Condensed, u, chosen, status, stats) -> MpcSolution:
    inputs = cond.inputs(u)
    states = rollout(problem.x0, inputs, problem.h, problem.limits.d_lin)
    return MpcSolution(status, states, inputs, Assignment(tuple(chosen)), mpc_objective(problem, states, inputs), stats)


def solve_bnb(problem: MpcProblem, config: BnbConfig | None = None) -> MpcSolution:
    """Globally optimal assignment and trajectory by best-first branch and bound.

    With the default configuration the search is bounded by a node count so
    runs are reproducible; a wall-clock ``time_budget`` can be added.  When
    either budget runs out the status is ``timeout`` and the best integer
    feasible solution found so far (if any) is returned.
    """
    config = config or BnbConfig()
    t_start = time.perf_counter()
    stats = SolveStats()
    cond = _Condensed(problem)
    N = problem.N
    rq = ReducedQP(cond.H, cond.f, cond.A_eq, cond.b_eq, cond.const, config.tol)
    if rq.eq_infeasible:
        stats.wall_time = time.perf_counter() - t_start
        return MpcSolution(INFEASIBLE, stats=stats)
    Cb, db, _, _, bad = rq.reduce_rows(cond.A_bounds, cond.b_bounds)
    if bad >= 0:
        stats.wall_time = time.perf_counter() - t_start
        return MpcSolution(INFEASIBLE, stats=stats)
    table = _PolyTable(problem.tsc)
    member_cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray] | None] = {}

    def member_rows(k, p):
        key = (k, p)
        if key not in member_cache:
            A, b = cond.membership_rows(k, problem.tsc[k - 1].polyhedra[p])
            C, d, _, _, bad_row = rq.reduce_rows(A, b)
            member_cache[key] = None if bad_row >= 0 else (C, d)
        return member_cache[key]

    def relax(fixed):
        blocks_C = [Cb]
        blocks_d = [db]
        for k, p in fixed:
            rows = member_rows(k, p)
            if rows is None:
                return None
            blocks_C.append(rows[0])
            blocks_d.append(rows[1])
        rs = rq.solve_reduced(np.vstack(blocks_C), np.concatenate(blocks_d))
        stats.nodes += 1
        stats.qp_iterations += rs.iterations
        if rs.status != _backend.STATUS_OPTIMAL:
            return None
        return rq.objective(rs.y), rq.lift(rs.y)

    def out_of_budget():
        if config.node_limit is not None and stats.nodes >= config.node_limit:
            return True
        return config.time_budget is not None and time.perf_counter() - t_start > config.time_budget

    root = relax(())
    if root is None:
        stats.wall_time = time.perf_counter() - t_start
        return MpcSolution(INFEASIBLE, stats=stats)
    counter = itertools.count()
    heap = [(root[0], next(counter), (), root[1])]
    incumbent = None
    inc_obj = float("inf")
    timed_out = False

    while heap:
        bound, _, fixed, u = heapq.heappop(heap)
        if bound >= inc_obj - config.gap:
            break
        pos = cond.positions(u)
        fixed_steps = dict(fixed)
        worst_k = -1
        worst_v = -np.inf
        worst_order = None
        chosen = [0] * N
        for k in range(1, N + 1):
            if k in fixed_steps:
                chosen[k - 1] = fixed_steps[k]
                continue
            v = table.violations(k, pos[k])
            best = int(np.argmin(v))
            chosen[k - 1] = best
            if v[best] > config.membership_tol and v[best] > worst_v:
                worst_v = float(v[best])
                worst_k = k
                worst_order = np.argsort(v, kind="stable")
        if worst_k < 0:
            # best-first: nothing left in the heap can beat this node
            incumbent = (u, chosen)
            inc_obj = bound
            break
        for p in worst_order:
            if out_of_budget():
                timed_out = True
                break
            child = fixed + ((worst_k, int(p)),)
            res = relax(child)
            if res is None:
                continue
            obj, u_child = res
            slack = bound - obj
            if slack > 1e-9 * max(1.0, abs(bound)):
                stats.bound_violations += 1
                stats.max_bound_violation = max(stats.max_bound_violation, slack)
            if obj >= inc_obj - config.gap:
                continue
            heapq.heappush(heap, (obj, next(counter), child, u_child))
        if timed_out:
            break

    if timed_out and incumbent is None:
        # cheap repair: any queued node that is already integer feasible
        for bound, _, fixed, u in sorted(heap):
            pos = cond.positions(u)
            fixed_steps = dict(fixed)
            chosen = []
            for k in range(1, N + 1):
                if k in fixed_steps:
                    chosen.append(fixed_steps[k])
                    continue
                v = table.violations(k, pos[k])
                if v.min() > config.membership_tol:
                    break
                chosen.append(int(np.argmin(v)))
            else:
                incumbent = (u, chosen)
                break

    stats.wall_time = time.perf_counter() - t_start
    if timed_out:
        if incumbent is None:
            return MpcSolution(TIMEOUT, stats=stats)
        return _finish(problem, cond, incumbent[0], incumbent[1], TIMEOUT, stats)
    if incumbent is None:
        return MpcSolution(INFEASIBLE, stats=stats)
    return _finish(problem, cond, incumbent[0], incumbent[1], OPTIMAL, stats)


# ---------------------------------------------------------------------------
# reference oracle and checker
# ---------------------------------------------------------------------------


def enumerate_oracle(problem: MpcProblem, guard: int = ORACLE_GUARD, tol: float = 1e-9) -> MpcSolution:
    """Solve every assignment's QP and keep the best (first in lexicographic
    order on ties)."""
    total = problem.num_assignments()
    if total > guard:
        raise TooManyAssignments(f"{total} assignments exceed the guard of {guard}")
    t_start = time.perf_counter()
    stats = SolveStats()
    best = None
    best_obj = float("inf")
    for chosen in itertools.product(*[range(len(c)) for c in problem.tsc.corridors]):
        res = solve_qp(build_qp(problem, chosen), tol)
        stats.nodes += 1
        stats.qp_iterations += res.iterations
        if res.optimal and (best is None or res.objective < best_obj - 1e-9 * max(1.0, abs(best_obj))):
            best_obj = res.objective
            best = (chosen, res.x)
    stats.wall_time = time.perf_counter() - t_start
    if best is None:
        return MpcSolution(INFEASIBLE, stats=stats)
    states, inputs = unpack_full(problem, best[1])
    return MpcSolution(OPTIMAL, states, inputs, Assignment(tuple(best[0])), best_obj, stats)


@dataclass(frozen=True)
class SolutionViolation:
    kind: str
    step: int
    detail: str
    excess: float


def check_solution(problem: MpcProblem, solution: MpcSolution, tol: float = 1e-6) -> list[SolutionViolation]:
    """Independent audit of a solution against every constraint of the problem."""
    out: list[SolutionViolation] = []
    N = problem.N
    if solution.states is None or solution.inputs is None or solution.assignment is None:
        return [SolutionViolation("missing", 0, "solution carries no trajectory", float("inf"))]
    states = np.asarray(solution.states, dtype=np.float64)
    inputs = np.asarray(solution.inputs, dtype=np.float64)
    if states.shape != (N + 1, 9) or inputs.shape != (N, 3) or len(solution.assignment) != N:
        return [SolutionViolation("shape", 0, "trajectory shape does not match horizon", float("inf"))]
    e = float(np.max(np.abs(states[0] - problem.x0)))
    if e > tol:
        out.append(SolutionViolation("initial_state", 0, "x_0 differs from the measured state", e))
    for k in range(N):
        nxt = step_vector(states[k], inputs[k], problem.h, problem.limits.d_lin)
        e = float(np.max(np.abs(nxt - states[k + 1])))
        if e > tol:
            out.append(SolutionViolation("dynamics", k + 1, "state does not follow the model", e))
    e = float(np.max(np.abs(states[N, 3:6])))
    if e > tol:
        out.append(SolutionViolation("terminal_velocity", N, "v_N is not zero", e))
    for k in range(1, N + 1):
        bv: list[BoundViolation] = check(AgentState.from_vector(states[k]), JerkInput(inputs[k - 1]), problem.limits, tol)
        for v in bv:
            out.append(SolutionViolation("bound", k, v.bound, v.excess))
        p = solution.assignment[k]
        polys = problem.tsc[k - 1].polyhedra
        if not 0 <= p < len(polys):
            out.append(SolutionViolation("membership", k, f"no polyhedron {p}", float("inf")))
        elif not contains(polys[p], states[k, 0:3], tol):
            out.append(SolutionViolation("membership", k, f"outside polyhedron {p}", polys[p].violation(states[k, 0:3])))
    obj = mpc_objective(problem, states, inputs)
    e = abs(obj - solution.objective)
    if e > 1e-9 * max(1.0, abs(obj)) + tol * 1e-3:
        out.append(SolutionViolation("objective", 0, "reported objective differs from recomputed", e))
    return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def problem_to_dict(problem: MpcProblem) -> dict:
    return {
        "schema": MPC_SCHEMA,
        "x0": problem.x0.tolist(),
        "refs": problem.refs.tolist(),
        "h": problem.h,
        "limits": problem.limits.to_dict(),
        "weights": problem.weights.to_dict(),
        "tsc": tsc_to_dict(problem.tsc),
    }


def problem_from_dict(d: dict) -> MpcProblem:
    if d.get("schema") != MPC_SCHEMA:
        raise ValueError(f"expected schema {MPC_SCHEMA}")
    return MpcProblem(
        d["x0"], d["refs"], tsc_from_dict(d["tsc"]), Limits.from_dict(d["limits"]), Weights.from_dict(d["weights"]), float(d["h"])
    )


def solution_to_dict(solution: MpcSolution) -> dict:
    return {
        "schema": MPC_SCHEMA,
        "status": solution.status,
        "states": None if solution.states is None else solution.states.tolist(),
        "inputs": None if solution.inputs is None else solution.inputs.tolist(),
        "assignment": None if solution.assignment is None else list(solution.assignment.chosen),
        "objective": solution.objective if np.isfinite(solution.objective) else None,
        "stats": {
            "nodes": solution.stats.nodes,
            "qp_iterations": solution.stats.qp_iterations,
            "wall_time": solution.stats.wall_time,
            "bound_violations": solution.stats.bound_violations,
        },
    }


def solution_from_dict(d: dict) -> MpcSolution:
    if d.get("schema") != MPC_SCHEMA:
        raise ValueError(f"expected schema {MPC_SCHEMA}")
    st = d.get("stats", {})
    return MpcSolution(
        d["status"],
        None if d["states"] is None else np.asarray(d["states"], dtype=np.float64),
        None if d["inputs"] is None else np.asarray(d["inputs"], dtype=np.float64),
        None if d["assignment"] is None else Assignment(tuple(d["assignment"])),
        float("inf") if d["objective"] is None else float(d["objective"]),
        SolveStats(st.get("nodes", 0), st.get("qp_iterations", 0), st.get("wall_time", 0.0), st.get("bound_violations", 0)),
    )


def save_problem(problem: MpcProblem, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(problem_to_dict(problem)), encoding="utf-8")
    return path


def single_box_corridor(lo, hi, N: int, time_step: float) -> TemporalSafeCorridor:
    """Every step shares one box; handy for tests and examples."""
    poly = Polyhedron.from_box(lo, hi)
    return TemporalSafeCorridor([SafeCorridor([poly]) for _ in range(N)], time_step)
