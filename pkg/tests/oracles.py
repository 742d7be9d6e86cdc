"""Independent reference implementations used only by the tests."""

import itertools
import math

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.sparse.csgraph import dijkstra

from tscplan.corridor import Polyhedron, SafeCorridor, TemporalSafeCorridor
from tscplan.dynamics import Limits
from tscplan.miqp import MpcProblem, Weights


def kkt_enumeration(H, f, A_eq, b_eq, A_in, b_in, tol=1e-9):
    """Strictly convex QP by trying every active set; returns (x, obj) or None."""
    n = H.shape[0]
    m = A_in.shape[0]
    p = A_eq.shape[0]
    best = None
    for size in range(0, min(m, n - p) + 1):
        for S in itertools.combinations(range(m), size):
            A = np.vstack([A_eq, A_in[list(S)]]) if size or p else np.zeros((0, n))
            b = np.concatenate([b_eq, b_in[list(S)]])
            K = np.block([[H, A.T], [A, np.zeros((A.shape[0], A.shape[0]))]])
            rhs = np.concatenate([-f, b])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                continue
            x = sol[:n]
            mu = sol[n + p :]
            if np.any(mu < -1e-9):
                continue
            if m and np.max(A_in @ x - b_in) > 1e-7:
                continue
            obj = 0.5 * x @ H @ x + f @ x
            if best is None or obj < best[1] - 1e-12:
                best = (x, obj)
    return best


def lp_feasible(A_eq, b_eq, A_in, b_in):
    n = A_eq.shape[1] if A_eq.size else A_in.shape[1]
    res = linprog(
        np.zeros(n),
        A_ub=A_in if A_in.size else None,
        b_ub=b_in if A_in.size else None,
        A_eq=A_eq if A_eq.size else None,
        b_eq=b_eq if A_eq.size else None,
        bounds=[(None, None)] * n,
        method="highs",
    )
    return res.status == 0


def dijkstra_cost(occ, start, goal, voxel_size):
    """26-connected shortest path cost through free cells (inf if none)."""
    dims = occ.shape
    idx = np.arange(occ.size).reshape(dims)
    rows, cols, vals = [], [], []
    free = ~occ
    for d in itertools.product((-1, 0, 1), repeat=3):
        if d == (0, 0, 0):
            continue
        src = tuple(slice(max(0, -k), dims[a] - max(0, k)) for a, k in enumerate(d))
        dst = tuple(slice(s.start + k, s.stop + k) for s, k in zip(src, d))
        ok = free[src] & free[dst]
        rows.append(idx[src][ok])
        cols.append(idx[dst][ok])
        vals.append(np.full(ok.sum(), voxel_size * math.sqrt(sum(k * k for k in d))))
    graph = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(occ.size, occ.size)
    )
    dist = dijkstra(graph, indices=idx[tuple(start)])
    return float(dist[idx[tuple(goal)]])


def brute_force_edt(occ, voxel_size):
    occupied = np.argwhere(occ)
    out = np.empty(occ.shape)
    for cell in np.ndindex(occ.shape):
        out[cell] = np.sqrt(((occupied - cell) ** 2).sum(axis=1)).min() * voxel_size
    return out


def random_problem(rng, N=None, max_polys=3):
    """Small random MIQP instance with random boxes, references and limits."""
    N = int(rng.integers(1, 5)) if N is None else N
    corridors = []
    for _ in range(N):
        polys = []
        for _ in range(int(rng.integers(1, max_polys + 1))):
            c = rng.uniform(-0.4, 0.4, 3)
            s = rng.uniform(0.1, 0.7, 3)
            polys.append(Polyhedron.from_box(c - s, c + s))
        corridors.append(SafeCorridor(polys))
    tsc = TemporalSafeCorridor(corridors, 0.1)
    x0 = np.zeros(9)
    x0[0:3] = rng.uniform(-0.2, 0.2, 3)
    # a moving start can rarely stop within one or two steps, so keep it gentle
    x0[3:6] = rng.uniform(-0.2, 0.2, 3) * (N > 1)
    x0[6:9] = rng.uniform(-0.3, 0.3, 3) * (N > 1)
    refs = np.zeros((N + 1, 3))
    refs[:] = rng.uniform(-1.0, 1.0, 3)
    refs += np.outer(np.arange(N + 1), rng.uniform(-0.2, 0.2, 3))
    a_xy = rng.uniform(1.0, 20.0)
    a_z = rng.uniform(1.0, 10.0)
    limits = Limits(
        a_x_max=a_xy,
        a_y_max=a_xy,
        a_z_max=a_z,
        a_z_min=-a_z,
        j_x_max=rng.uniform(20.0, 90.0),
        j_y_max=rng.uniform(20.0, 90.0),
        j_z_max=rng.uniform(20.0, 90.0),
        d_lin=tuple(rng.uniform(0.5, 1.5, 3)),
    )
    return MpcProblem(x0, refs, tsc, limits, Weights(), 0.1)
