"""Convex quadratic programs with equality and inequality constraints.

    minimize    0.5 x'Hx + f'x + const
    subject to  A_eq x  = b_eq
                A_in x <= b_in

Equalities are eliminated through an SVD null-space basis ``x = x_p + Z y``.
The reduced problem goes to a dual active-set (Goldfarb-Idnani) kernel.  A
reduced Hessian that is only positive semidefinite is handled by proximal
point iterations.  Infeasibility is reported with a Farkas certificate
``(y_eq, y_in)`` satisfying ``y_in >= 0``, ``A_eq'y_eq + A_in'y_in = 0`` and
``b_eq'y_eq + b_in'y_in < 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import _backend
from .errors import DimensionMismatch, NumericalFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

_PD_RATIO = 1e-12
_PROX_RHO = 1e-6
_PROX_MAX = 500


def _as_rows(A, n: int) -> np.ndarray:
    if A is None:
        return np.zeros((0, n))
    A = np.asarray(A, dtype=np.float64)
    if A.size == 0:
        return np.zeros((0, n))
    if A.ndim != 2 or A.shape[1] != n:
        raise DimensionMismatch(f"constraint matrix has shape {A.shape}, expected (m, {n})")
    return A


def _as_vec(b, m: int, name: str) -> np.ndarray:
    if b is None:
        b = np.zeros(0)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if b.shape[0] != m:
        raise DimensionMismatch(f"{name} has length {b.shape[0]}, expected {m}")
    return b


@dataclass(eq=False)
class QuadraticProgram:
    H: np.ndarray
    f: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_in: np.ndarray | None = None
    b_in: np.ndarray | None = None
    const: float = 0.0

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=np.float64)
        n = self.H.shape[0]
        if self.H.ndim != 2 or self.H.shape != (n, n):
            raise DimensionMismatch("H must be square")
        self.f = _as_vec(self.f, n, "f")
        self.A_eq = _as_rows(self.A_eq, n)
        self.b_eq = _as_vec(self.b_eq, self.A_eq.shape[0], "b_eq")
        self.A_in = _as_rows(self.A_in, n)
        self.b_in = _as_vec(self.b_in, self.A_in.shape[0], "b_in")

    @property
    def n(self) -> int:
        return self.H.shape[0]

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        return float(0.5 * x @ self.H @ x + self.f @ x + self.const)


@dataclass(eq=False)
class QPResult:
    status: str
    x: np.ndarray | None
    objective: float
    eq_multipliers: np.ndarray | None = None
    ineq_multipliers: np.ndarray | None = None
    iterations: int = 0
    residuals: dict = field(default_factory=dict)
    certificate: dict | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class ReducedSolve:
    """Outcome of a solve in the reduced coordinates."""

    status: int
    y: np.ndarray
    mu: np.ndarray  # multipliers of the normalized reduced rows
    iterations: int
    cert: np.ndarray


class ReducedQP:
    """Equality-eliminated, factored form of ``0.5 x'Hx + f'x`` that can be
    solved repeatedly against different inequality sets."""

    def __init__(self, H, f, A_eq=None, b_eq=None, const: float = 0.0, tol: float = 1e-8):
        self.H = np.asarray(H, dtype=np.float64)
        n = self.H.shape[0]
        self.f = _as_vec(f, n, "f")
        self.A_eq = _as_rows(A_eq, n)
        self.b_eq = _as_vec(b_eq, self.A_eq.shape[0], "b_eq")
        self.const = float(const)
        self.tol = float(tol)
        self.n = n
        self.eq_certificate: np.ndarray | None = None

        if self.A_eq.shape[0]:
            U, S, Vt = linalg.svd(self.A_eq, full_matrices=True)
            cutoff = max(self.A_eq.shape) * np.finfo(float).eps * (S[0] if S.size else 0.0)
            r = int(np.sum(S > max(cutoff, 1e-14)))
            self.x_p = Vt[:r].T @ ((U[:, :r].T @ self.b_eq) / S[:r])
            resid = self.A_eq @ self.x_p - self.b_eq
            if np.max(np.abs(resid)) > tol * (1.0 + np.max(np.abs(self.b_eq))):
                self.eq_certificate = resid
            self.Z = Vt[r:].T
        else:
            self.x_p = np.zeros(n)
            self.Z = np.eye(n)
        self.nz = self.Z.shape[1]

        G = self.Z.T @ self.H @ self.Z
        self.G = 0.5 * (G + G.T)
        self.a = self.Z.T @ (self.H @ self.x_p + self.f)
        self.base = float(0.5 * self.x_p @ self.H @ self.x_p + self.f @ self.x_p + self.const)
        self.proximal = False
        if self.nz:
            self.J0 = self._factor(self.G)
            if self.J0 is None:
                self.proximal = True
                scale = max(1.0, float(np.max(np.abs(np.diag(self.G)))))
                self.rho = _PROX_RHO * scale
                self.J0 = self._factor(self.G + self.rho * np.eye(self.nz))
                if self.J0 is None:
                    raise NumericalFailure("reduced Hessian is not positive semidefinite")
        else:
            self.J0 = np.zeros((0, 0))

    @staticmethod
    def _factor(G):
        try:
            L = linalg.cholesky(G, lower=True)
        except linalg.LinAlgError:
            return None
        diag = np.diag(L) ** 2
        if diag.min() <= _PD_RATIO * max(1.0, diag.max()):
            return None
        return linalg.solve_triangular(L, np.eye(G.shape[0]), lower=True).T

    @property
    def eq_infeasible(self) -> bool:
        return self.eq_certificate is not None

    def lift(self, y) -> np.ndarray:
        return self.x_p + self.Z @ y

    def reduce_rows(self, A_in, b_in):
        """Map ``A_in x <= b_in`` to normalized reduced rows.

        Returns ``(C, d, scale, keep, bad)``: ``keep`` indexes the rows that
        survive, ``scale`` their original reduced norms, and ``bad`` is the
        index of a constant row that can never hold (or -1).
        """
        A_in = _as_rows(A_in, self.n)
        b_in = _as_vec(b_in, A_in.shape[0], "b_in")
        C = A_in @ self.Z
        d = b_in - A_in @ self.x_p
        norms = np.linalg.norm(C, axis=1) if self.nz else np.zeros(C.shape[0])
        row_scale = np.linalg.norm(A_in, axis=1)
        const = norms <= 1e-12 * np.maximum(1.0, row_scale)
        bad = -1
        if const.any():
            viol = np.where(const, d, np.inf)
            worst = int(np.argmin(viol))
            if viol[worst] < -self.tol * max(1.0, row_scale[worst]):
                bad = worst
        keep = np.flatnonzero(~const)
        return C[keep] / norms[keep, None], d[keep] / norms[keep], norms[keep], keep, bad

    def solve_reduced(self, C, d, max_iter: int | None = None) -> ReducedSolve:
        m = C.shape[0]
        if max_iter is None:
            max_iter = 10 * (self.nz + m) + 100
        if self.nz == 0:
            y = np.zeros(0)
            if m and np.min(d) < -self.tol:
                cert = np.zeros(m)
                cert[int(np.argmin(d))] = 1.0
                return ReducedSolve(_backend.STATUS_INFEASIBLE, y, np.zeros(m), 0, cert)
            return ReducedSolve(_backend.STATUS_OPTIMAL, y, np.zeros(m), 0, np.zeros(m))
        if not self.proximal:
            y, mu, status, iters, cert = _backend.gi_solve(self.J0, self.a, C, d, self.tol, max_iter)
            return ReducedSolve(int(status), np.asarray(y), np.asarray(mu), int(iters), np.asarray(cert))
        # proximal point: minimize f(y) + rho/2 |y - y_k|^2 repeatedly
        y = np.zeros(self.nz)
        total = 0
        for _ in range(_PROX_MAX):
            a_k = self.a - self.rho * y
            y_new, mu, status, iters, cert = _backend.gi_solve(self.J0, a_k, C, d, self.tol, max_iter)
            total += int(iters)
            if status != _backend.STATUS_OPTIMAL:
                return ReducedSolve(int(status), np.asarray(y_new), np.asarray(mu), total, np.asarray(cert))
            step = float(np.max(np.abs(y_new - y))) if self.nz else 0.0
            y = np.asarray(y_new)
            if step <= self.tol * max(1.0, float(np.max(np.abs(y)))):
                return ReducedSolve(_backend.STATUS_OPTIMAL, y, np.asarray(mu), total, np.asarray(cert))
        raise NumericalFailure("proximal iterations did not converge")

    def objective(self, y) -> float:
        return float(self.base + self.a @ y + 0.5 * y @ self.G @ y)

    def solve(self, A_in=None, b_in=None) -> QPResult:
        A_in = _as_rows(A_in, self.n)
        b_in = _as_vec(b_in, A_in.shape[0], "b_in")
        m = A_in.shape[0]
        if self.eq_infeasible:
            cert = {"y_eq": self.eq_certificate.copy(), "y_in": np.zeros(m)}
            return QPResult(INFEASIBLE, None, float("inf"), certificate=cert)
        C, d, scale, keep, bad = self.reduce_rows(A_in, b_in)
        if bad >= 0:
            y_in = np.zeros(m)
            y_in[bad] = 1.0
            return QPResult(INFEASIBLE, None, float("inf"), certificate=self._lift_cert(A_in, y_in))
        rs = self.solve_reduced(C, d)
        if rs.status == _backend.STATUS_MAX_ITER:
            raise NumericalFailure("active-set iteration limit reached")
        if rs.status == _backend.STATUS_INFEASIBLE:
            y_in = np.zeros(m)
            y_in[keep] = rs.cert / scale
            res = QPResult(INFEASIBLE, None, float("inf"), iterations=rs.iterations)
            res.certificate = self._lift_cert(A_in, y_in)
            return res
        x = self.lift(rs.y)
        mu = np.zeros(m)
        mu[keep] = rs.mu / scale
        grad = self.H @ x + self.f + A_in.T @ mu
        if self.A_eq.shape[0]:
            lam = -np.linalg.lstsq(self.A_eq.T, grad, rcond=None)[0]
            grad = grad + self.A_eq.T @ lam
        else:
            lam = np.zeros(0)
        residuals = {
            "stationarity": float(np.max(np.abs(grad))) if grad.size else 0.0,
            "primal_eq": float(np.max(np.abs(self.A_eq @ x - self.b_eq))) if lam.size else 0.0,
            "primal_in": float(max(0.0, np.max(A_in @ x - b_in))) if m else 0.0,
            "dual": float(max(0.0, -np.min(mu))) if m else 0.0,
            "complementarity": float(np.max(np.abs(mu * (A_in @ x - b_in)))) if m else 0.0,
        }
        obj = float(0.5 * x @ self.H @ x + self.f @ x + self.const)
        return QPResult(OPTIMAL, x, obj, lam, mu, rs.iterations, residuals)

    def _lift_cert(self, A_in, y_in) -> dict:
        if self.A_eq.shape[0]:
            y_eq = -np.linalg.lstsq(self.A_eq.T, A_in.T @ y_in, rcond=None)[0]
        else:
            y_eq = np.zeros(0)
        return {"y_eq": y_eq, "y_in": y_in}


def solve_qp(qp: QuadraticProgram, tol: float = 1e-8) -> QPResult:
    """Solve ``qp`` to tolerance ``tol``.

    Raises ``NumericalFailure`` if the Hessian restricted to the equality
    null space is indefinite or the active-set loop fails to terminate.
    """
    rq = ReducedQP(qp.H, qp.f, qp.A_eq, qp.b_eq, qp.const, tol)
    return rq.solve(qp.A_in, qp.b_in)


def verify_certificate(qp: QuadraticProgram, certificate: dict, tol: float = 1e-7) -> bool:
    """Check a Farkas certificate of infeasibility for ``qp``."""
    y_eq = np.asarray(certificate.get("y_eq", np.zeros(0)), dtype=np.float64)
    y_in = np.asarray(certificate.get("y_in", np.zeros(0)), dtype=np.float64)
    if y_eq.shape[0] != qp.A_eq.shape[0] or y_in.shape[0] != qp.A_in.shape[0]:
        return False
    scale = max(np.max(np.abs(y_eq), initial=0.0), np.max(np.abs(y_in), initial=0.0))
    if scale == 0.0:
        return False
    y_eq = y_eq / scale
    y_in = y_in / scale
    if np.any(y_in < -tol):
        return False
    combo = qp.A_eq.T @ y_eq + qp.A_in.T @ y_in
    row_scale = max(1.0, float(np.max(np.abs(qp.A_eq), initial=0.0)), float(np.max(np.abs(qp.A_in), initial=0.0)))
    if np.max(np.abs(combo), initial=0.0) > tol * row_scale:
        return False
    return float(qp.b_eq @ y_eq + qp.b_in @ y_in) < -tol
