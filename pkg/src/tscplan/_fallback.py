"""Pure numpy/Python implementations of the numerical kernels.

Every function here has a twin with the same signature in the compiled
``_core`` extension.  ``tscplan._backend`` picks one at import time.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_MAX_ITER = 2

_INF = float("inf")


# --------------------------------------------------------------------------
# Dual active-set QP (Goldfarb-Idnani), inequality constraints only
# --------------------------------------------------------------------------


def _add_constraint(R, J, d, q, n):
    for j in range(n - 1, q, -1):
        cc = d[j - 1]
        ss = d[j]
        h = math.hypot(cc, ss)
        if h == 0.0:
            continue
        d[j] = 0.0
        ss /= h
        cc /= h
        if cc < 0.0:
            cc = -cc
            ss = -ss
            d[j - 1] = -h
        else:
            d[j - 1] = h
        xny = ss / (1.0 + cc)
        t1 = J[:, j - 1].copy()
        t2 = J[:, j].copy()
        J[:, j - 1] = t1 * cc + t2 * ss
        J[:, j] = xny * (t1 + J[:, j - 1]) - t2
    R[: q + 1, q] = d[: q + 1]


def _delete_constraint(R, J, q, pos, n):
    # drop column ``pos`` of the q active columns, then restore triangularity
    R[:q, pos : q - 1] = R[:q, pos + 1 : q]
    R[:q, q - 1] = 0.0
    q -= 1
    for j in range(pos, q):
        cc = R[j, j]
        ss = R[j + 1, j]
        h = math.hypot(cc, ss)
        if h == 0.0:
            continue
        cc /= h
        ss /= h
        R[j + 1, j] = 0.0
        if cc < 0.0:
            R[j, j] = -h
            cc = -cc
            ss = -ss
        else:
            R[j, j] = h
        xny = ss / (1.0 + cc)
        if j + 1 < q:
            t1 = R[j, j + 1 : q].copy()
            t2 = R[j + 1, j + 1 : q].copy()
            R[j, j + 1 : q] = t1 * cc + t2 * ss
            R[j + 1, j + 1 : q] = xny * (t1 + R[j, j + 1 : q]) - t2
        t1 = J[:, j].copy()
        t2 = J[:, j + 1].copy()
        J[:, j] = t1 * cc + t2 * ss
        J[:, j + 1] = xny * (J[:, j] + t1) - t2
    return q


def _back_substitute(R, dvec, q):
    r = np.empty(q)
    for i in range(q - 1, -1, -1):
        acc = dvec[i]
        for j in range(i + 1, q):
            acc -= R[i, j] * r[j]
        r[i] = acc / R[i, i]
    return r


def gi_solve(J0, a, C, d, tol, max_iter):
    """Minimize ``0.5 x'Gx + a'x`` subject to ``C x <= d``.

    ``J0`` is ``L^{-T}`` for the Cholesky factor ``G = L L'``.  Rows of ``C``
    are expected to be normalized so that ``tol`` is a distance.

    Returns ``(x, mu, status, iterations, certificate)``.  When infeasible,
    ``certificate`` is a nonnegative ``y`` with ``C'y = 0`` and ``d'y < 0``.
    """
    J0 = np.asarray(J0, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64).reshape(-1, a.shape[0])
    d = np.asarray(d, dtype=np.float64)
    n = a.shape[0]
    m = C.shape[0]
    J = J0.copy()
    R = np.zeros((n, n))
    x = -(J @ (J.T @ a))
    active: list[int] = []
    u: list[float] = []
    q = 0
    iters = 0
    mu = np.zeros(m)
    cert = np.zeros(m)
    is_active = np.zeros(m, dtype=bool)

    while True:
        if m == 0:
            break
        s = d - C @ x
        s[is_active] = _INF
        p = int(np.argmin(s))
        if s[p] >= -tol:
            break
        normal = -C[p]
        sp = s[p]
        u_plus = 0.0
        while True:
            iters += 1
            if iters > max_iter:
                for k, idx in enumerate(active):
                    mu[idx] = u[k]
                return x, mu, STATUS_MAX_ITER, iters, cert
            dvec = J.T @ normal
            z = J[:, q:] @ dvec[q:]
            r = _back_substitute(R, dvec, q)
            t1 = _INF
            drop = -1
            for k in range(q):
                if r[k] > 0.0:
                    ratio = u[k] / r[k]
                    if ratio < t1:
                        t1 = ratio
                        drop = k
            zn = float(dvec[q:] @ dvec[q:])
            if zn <= 1e-20 * float(dvec @ dvec):
                t2 = _INF
            else:
                t2 = -sp / zn
            t = min(t1, t2)
            if t == _INF:
                cert[p] = 1.0
                for k, idx in enumerate(active):
                    cert[idx] = -r[k]
                return x, mu, STATUS_INFEASIBLE, iters, cert
            if t2 == _INF:
                for k in range(q):
                    u[k] -= t * r[k]
                u_plus += t
                is_active[active[drop]] = False
                del active[drop]
                del u[drop]
                q = _delete_constraint(R, J, q, drop, n)
                continue
            x = x + t * z
            for k in range(q):
                u[k] -= t * r[k]
            u_plus += t
            if t == t2:
                _add_constraint(R, J, dvec, q, n)
                q += 1
                active.append(p)
                u.append(u_plus)
                is_active[p] = True
                break
            is_active[active[drop]] = False
            del active[drop]
            del u[drop]
            q = _delete_constraint(R, J, q, drop, n)
            sp = float(d[p] - C[p] @ x)

    for k, idx in enumerate(active):
        mu[idx] = u[k]
    return x, mu, STATUS_OPTIMAL, iters, cert


# --------------------------------------------------------------------------
# Occupancy kernels
# --------------------------------------------------------------------------


def dilate(occ, radius):
    """Cube (Chebyshev) dilation of a 3D uint8 array; separable per axis."""
    out = np.ascontiguousarray(occ, dtype=np.uint8).copy()
    if radius <= 0:
        return out
    for axis in range(3):
        src = out.copy()
        size = out.shape[axis]
        for shift in range(1, radius + 1):
            if shift >= size:
                break
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(0, size - shift)
            hi[axis] = slice(shift, size)
            out[tuple(lo)] |= src[tuple(hi)]
            out[tuple(hi)] |= src[tuple(lo)]
    return out


def aabb_index_ranges(origin, voxel_size, mins, maxs, dims):
    """Inclusive voxel index ranges overlapped (with positive measure) by boxes."""
    origin = np.asarray(origin, dtype=np.float64)
    lo = np.floor((mins - origin) / voxel_size + 1e-9).astype(np.int64)
    hi = np.ceil((maxs - origin) / voxel_size - 1e-9).astype(np.int64) - 1
    dims = np.asarray(dims, dtype=np.int64)
    lo = np.maximum(lo, 0)
    hi = np.minimum(hi, dims - 1)
    return lo, hi


def mark_aabbs(occ, origin, voxel_size, mins, maxs):
    """Set every voxel overlapped by any of the axis-aligned boxes."""
    mins = np.asarray(mins, dtype=np.float64).reshape(-1, 3)
    maxs = np.asarray(maxs, dtype=np.float64).reshape(-1, 3)
    if mins.shape[0] == 0:
        return
    lo, hi = aabb_index_ranges(origin, voxel_size, mins, maxs, occ.shape)
    keep = np.all(hi >= lo, axis=1)
    lo = lo[keep]
    hi = hi[keep]
    if lo.shape[0] == 0:
        return
    span = int((hi - lo).max()) + 1
    for dx in range(span):
        for dy in range(span):
            for dz in range(span):
                idx = lo + np.array([dx, dy, dz])
                ok = np.all(idx <= hi, axis=1)
                if ok.any():
                    sel = idx[ok]
                    occ[sel[:, 0], sel[:, 1], sel[:, 2]] = 1


def grow_box(occ, seed, region_lo, region_hi):
    """Greedy axis-aligned box growth from ``seed`` over free voxels.

    Returns inclusive ``(lo, hi)`` index triples.
    """
    lo = [int(v) for v in seed]
    hi = [int(v) for v in seed]
    rlo = [int(v) for v in region_lo]
    rhi = [int(v) for v in region_hi]
    while True:
        best_face = -1
        best_gain = 0
        for face in range(6):
            axis = face // 2
            if face % 2 == 0:
                layer = lo[axis] - 1
                if layer < rlo[axis]:
                    continue
            else:
                layer = hi[axis] + 1
                if layer > rhi[axis]:
                    continue
            sl = [slice(lo[i], hi[i] + 1) for i in range(3)]
            sl[axis] = slice(layer, layer + 1)
            slab = occ[tuple(sl)]
            if slab.any():
                continue
            if slab.size > best_gain:
                best_gain = slab.size
                best_face = face
        if best_face < 0:
            return tuple(lo), tuple(hi)
        axis = best_face // 2
        if best_face % 2 == 0:
            lo[axis] -= 1
        else:
            hi[axis] += 1


# --------------------------------------------------------------------------
# 26-connected A*
# --------------------------------------------------------------------------

NEIGHBOR_OFFSETS = [
    (dx, dy, dz)
    for dx in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dz in (-1, 0, 1)
    if (dx, dy, dz) != (0, 0, 0)
]


def grid_search(blocked, penalty, start, goal, voxel_size):
    """A* over a 26-connected voxel lattice.

    Edge cost is the metric distance between centers plus ``penalty`` of the
    entered cell.  Returns ``(cells, cost)`` with ``cells`` an ``(K, 3)``
    int64 array, or ``(None, inf)`` when the goal is unreachable.
    """
    nx, ny, nz = blocked.shape
    sx, sy, sz = (int(v) for v in start)
    gx, gy, gz = (int(v) for v in goal)
    flat_blocked = np.ascontiguousarray(blocked, dtype=np.uint8).ravel()
    flat_pen = None if penalty is None else np.ascontiguousarray(penalty, dtype=np.float64).ravel()
    size = nx * ny * nz
    g_cost = np.full(size, _INF)
    parent = np.full(size, -1, dtype=np.int64)
    closed = np.zeros(size, dtype=bool)
    start_id = (sx * ny + sy) * nz + sz
    goal_id = (gx * ny + gy) * nz + gz
    steps = [
        (dx, dy, dz, voxel_size * math.sqrt(dx * dx + dy * dy + dz * dz))
        for dx, dy, dz in NEIGHBOR_OFFSETS
    ]

    def heuristic(x, y, z):
        ddx = x - gx
        ddy = y - gy
        ddz = z - gz
        return voxel_size * math.sqrt(ddx * ddx + ddy * ddy + ddz * ddz)

    g_cost[start_id] = 0.0
    counter = 0
    heap = [(heuristic(sx, sy, sz), counter, start_id)]
    while heap:
        _, _, cur = heapq.heappop(heap)
        if closed[cur]:
            continue
        closed[cur] = True
        if cur == goal_id:
            break
        cx, rem = divmod(cur, ny * nz)
        cy, cz = divmod(rem, nz)
        gc = g_cost[cur]
        for dx, dy, dz, step in steps:
            x = cx + dx
            y = cy + dy
            z = cz + dz
            if x < 0 or y < 0 or z < 0 or x >= nx or y >= ny or z >= nz:
                continue
            nid = (x * ny + y) * nz + z
            if flat_blocked[nid] or closed[nid]:
                continue
            cand = gc + step
            if flat_pen is not None:
                cand += flat_pen[nid]
            if cand < g_cost[nid]:
                g_cost[nid] = cand
                parent[nid] = cur
                counter += 1
                heapq.heappush(heap, (cand + heuristic(x, y, z), counter, nid))
    if not closed[goal_id]:
        return None, _INF
    ids = []
    cur = goal_id
    while cur != -1:
        ids.append(cur)
        cur = parent[cur]
    ids.reverse()
    ids = np.asarray(ids, dtype=np.int64)
    cells = np.stack(np.unravel_index(ids, (nx, ny, nz)), axis=1).astype(np.int64)
    return cells, float(g_cost[goal_id])
