# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels.  Same signatures as ``tscplan._fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, hypot, floor, ceil, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    STATUS_OPTIMAL = 0
    STATUS_INFEASIBLE = 1
    STATUS_MAX_ITER = 2


cdef extern from "stdlib.h" nogil:
    void* realloc(void* ptr, size_t size)


# --------------------------------------------------------------------------
# Goldfarb-Idnani dual active-set QP
# --------------------------------------------------------------------------

cdef void _add_constraint(double[:, ::1] R, double[:, ::1] J, double[::1] d,
                          Py_ssize_t q, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j, k
    cdef double cc, ss, h, xny, t1, t2
    j = n - 1
    while j > q:
        cc = d[j - 1]
        ss = d[j]
        h = hypot(cc, ss)
        if h != 0.0:
            d[j] = 0.0
            ss = ss / h
            cc = cc / h
            if cc < 0.0:
                cc = -cc
                ss = -ss
                d[j - 1] = -h
            else:
                d[j - 1] = h
            xny = ss / (1.0 + cc)
            for k in range(n):
                t1 = J[k, j - 1]
                t2 = J[k, j]
                J[k, j - 1] = t1 * cc + t2 * ss
                J[k, j] = xny * (t1 + J[k, j - 1]) - t2
        j -= 1
    for k in range(q + 1):
        R[k, q] = d[k]


cdef Py_ssize_t _delete_constraint(double[:, ::1] R, double[:, ::1] J, Py_ssize_t q,
                                   Py_ssize_t pos, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double cc, ss, h, xny, t1, t2
    for j in range(pos, q - 1):
        for i in range(q):
            R[i, j] = R[i, j + 1]
    for i in range(q):
        R[i, q - 1] = 0.0
    q -= 1
    for j in range(pos, q):
        cc = R[j, j]
        ss = R[j + 1, j]
        h = hypot(cc, ss)
        if h == 0.0:
            continue
        cc = cc / h
        ss = ss / h
        R[j + 1, j] = 0.0
        if cc < 0.0:
            R[j, j] = -h
            cc = -cc
            ss = -ss
        else:
            R[j, j] = h
        xny = ss / (1.0 + cc)
        for k in range(j + 1, q):
            t1 = R[j, k]
            t2 = R[j + 1, k]
            R[j, k] = t1 * cc + t2 * ss
            R[j + 1, k] = xny * (t1 + R[j, k]) - t2
        for k in range(n):
            t1 = J[k, j]
            t2 = J[k, j + 1]
            J[k, j] = t1 * cc + t2 * ss
            J[k, j + 1] = xny * (J[k, j] + t1) - t2
    return q


def gi_solve(J0, a, C, d, double tol, Py_ssize_t max_iter):
    a = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    C = np.ascontiguousarray(C, dtype=np.float64).reshape(-1, n)
    cdef Py_ssize_t m = C.shape[0]
    cdef double[:, ::1] J = np.array(J0, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] Cv = C
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef double[:, ::1] R = np.zeros((n, n))
    x_arr = np.zeros(n)
    mu_arr = np.zeros(m)
    cert_arr = np.zeros(m)
    cdef double[::1] x = x_arr
    cdef double[::1] mu = mu_arr
    cdef double[::1] cert = cert_arr
    cdef double[::1] dvec = np.zeros(n)
    cdef double[::1] z = np.zeros(n)
    cdef double[::1] r = np.zeros(n)
    cdef double[::1] tmp = np.zeros(n)
    cdef Py_ssize_t[::1] active = np.zeros(n + 1, dtype=np.intp)
    cdef double[::1] u = np.zeros(n + 1)
    cdef char[::1] is_active = np.zeros(max(m, 1), dtype=np.int8)
    cdef Py_ssize_t q = 0, iters = 0, i, j, k, p, drop
    cdef double acc, s, smin, sp, u_plus, t1, t2, t, ratio, zn, dn
    cdef int status = STATUS_OPTIMAL

    with nogil:
        # unconstrained minimizer x = -J J' a
        for j in range(n):
            acc = 0.0
            for i in range(n):
                acc += J[i, j] * av[i]
            tmp[j] = acc
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += J[i, j] * tmp[j]
            x[i] = -acc

        while m > 0:
            p = -1
            smin = INFINITY
            for i in range(m):
                if is_active[i]:
                    continue
                s = dv[i]
                for j in range(n):
                    s -= Cv[i, j] * x[j]
                if s < smin:
                    smin = s
                    p = i
            if p < 0 or smin >= -tol:
                break
            sp = smin
            u_plus = 0.0
            while True:
                iters += 1
                if iters > max_iter:
                    status = STATUS_MAX_ITER
                    break
                # d = J' n_p with n_p = -C_p
                for j in range(n):
                    acc = 0.0
                    for i in range(n):
                        acc -= J[i, j] * Cv[p, i]
                    dvec[j] = acc
                for i in range(n):
                    acc = 0.0
                    for j in range(q, n):
                        acc += J[i, j] * dvec[j]
                    z[i] = acc
                i = q - 1
                while i >= 0:
                    acc = dvec[i]
                    for j in range(i + 1, q):
                        acc -= R[i, j] * r[j]
                    r[i] = acc / R[i, i]
                    i -= 1
                t1 = INFINITY
                drop = -1
                for k in range(q):
                    if r[k] > 0.0:
                        ratio = u[k] / r[k]
                        if ratio < t1:
                            t1 = ratio
                            drop = k
                zn = 0.0
                dn = 0.0
                for j in range(n):
                    dn += dvec[j] * dvec[j]
                    if j >= q:
                        zn += dvec[j] * dvec[j]
                if zn <= 1e-20 * dn:
                    t2 = INFINITY
                else:
                    t2 = -sp / zn
                t = t1 if t1 < t2 else t2
                if t == INFINITY:
                    status = STATUS_INFEASIBLE
                    cert[p] = 1.0
                    for k in range(q):
                        cert[active[k]] = -r[k]
                    break
                if t2 == INFINITY:
                    for k in range(q):
                        u[k] -= t * r[k]
                    u_plus += t
                    is_active[active[drop]] = 0
                    for k in range(drop, q - 1):
                        active[k] = active[k + 1]
                        u[k] = u[k + 1]
                    q = _delete_constraint(R, J, q, drop, n)
                    continue
                for i in range(n):
                    x[i] += t * z[i]
                for k in range(q):
                    u[k] -= t * r[k]
                u_plus += t
                if t == t2:
                    _add_constraint(R, J, dvec, q, n)
                    active[q] = p
                    u[q] = u_plus
                    is_active[p] = 1
                    q += 1
                    break
                is_active[active[drop]] = 0
                for k in range(drop, q - 1):
                    active[k] = active[k + 1]
                    u[k] = u[k + 1]
                q = _delete_constraint(R, J, q, drop, n)
                sp = dv[p]
                for j in range(n):
                    sp -= Cv[p, j] * x[j]
            if status != STATUS_OPTIMAL:
                break

        if status != STATUS_INFEASIBLE:
            for k in range(q):
                mu[active[k]] = u[k]

    return x_arr, mu_arr, status, iters, cert_arr


# --------------------------------------------------------------------------
# Occupancy kernels
# --------------------------------------------------------------------------

# numpy's contiguous slab ORs are memory-bound already; a scalar loop is slower
from ._fallback import dilate


def mark_aabbs(occ, origin, double voxel_size, mins, maxs):
    cdef cnp.uint8_t[:, :, ::1] o = occ
    cdef double[:, ::1] mn = np.ascontiguousarray(mins, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] mx = np.ascontiguousarray(maxs, dtype=np.float64).reshape(-1, 3)
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef Py_ssize_t nb = mn.shape[0], b, i, j, k
    cdef Py_ssize_t nx = o.shape[0], ny = o.shape[1], nz = o.shape[2]
    cdef long lx, ly, lz, hx, hy, hz
    with nogil:
        for b in range(nb):
            lx = <long>floor((mn[b, 0] - ox) / voxel_size + 1e-9)
            ly = <long>floor((mn[b, 1] - oy) / voxel_size + 1e-9)
            lz = <long>floor((mn[b, 2] - oz) / voxel_size + 1e-9)
            hx = <long>ceil((mx[b, 0] - ox) / voxel_size - 1e-9) - 1
            hy = <long>ceil((mx[b, 1] - oy) / voxel_size - 1e-9) - 1
            hz = <long>ceil((mx[b, 2] - oz) / voxel_size - 1e-9) - 1
            if lx < 0:
                lx = 0
            if ly < 0:
                ly = 0
            if lz < 0:
                lz = 0
            if hx > nx - 1:
                hx = nx - 1
            if hy > ny - 1:
                hy = ny - 1
            if hz > nz - 1:
                hz = nz - 1
            for i in range(lx, hx + 1):
                for j in range(ly, hy + 1):
                    for k in range(lz, hz + 1):
                        o[i, j, k] = 1


cdef bint _slab_free(cnp.uint8_t[:, :, ::1] occ, long* lo, long* hi) noexcept nogil:
    cdef long i, j, k
    for i in range(lo[0], hi[0] + 1):
        for j in range(lo[1], hi[1] + 1):
            for k in range(lo[2], hi[2] + 1):
                if occ[i, j, k]:
                    return False
    return True


def grow_box(occ, seed, region_lo, region_hi):
    cdef cnp.uint8_t[:, :, ::1] o = np.ascontiguousarray(occ, dtype=np.uint8)
    cdef long lo[3]
    cdef long hi[3]
    cdef long rlo[3]
    cdef long rhi[3]
    cdef long slo[3]
    cdef long shi[3]
    cdef int axis, face, best_face, i
    cdef long layer, gain, best_gain
    for i in range(3):
        lo[i] = seed[i]
        hi[i] = seed[i]
        rlo[i] = region_lo[i]
        rhi[i] = region_hi[i]
    with nogil:
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
                gain = 1
                for i in range(3):
                    slo[i] = lo[i]
                    shi[i] = hi[i]
                    if i != axis:
                        gain *= hi[i] - lo[i] + 1
                slo[axis] = layer
                shi[axis] = layer
                if gain <= best_gain:
                    continue
                if not _slab_free(o, slo, shi):
                    continue
                best_gain = gain
                best_face = face
            if best_face < 0:
                break
            axis = best_face // 2
            if best_face % 2 == 0:
                lo[axis] -= 1
            else:
                hi[axis] += 1
    return (lo[0], lo[1], lo[2]), (hi[0], hi[1], hi[2])


# --------------------------------------------------------------------------
# 26-connected A* with a binary heap keyed on (f, insertion counter)
# --------------------------------------------------------------------------

cdef struct HeapItem:
    double f
    long long counter
    Py_ssize_t node


cdef inline bint _less(HeapItem a, HeapItem b) noexcept nogil:
    if a.f < b.f:
        return True
    if a.f > b.f:
        return False
    return a.counter < b.counter


cdef void _heap_push(HeapItem* heap, Py_ssize_t* size, HeapItem item) noexcept nogil:
    cdef Py_ssize_t i = size[0], parent
    size[0] += 1
    heap[i] = item
    while i > 0:
        parent = (i - 1) // 2
        if _less(heap[i], heap[parent]):
            heap[i], heap[parent] = heap[parent], heap[i]
            i = parent
        else:
            break


cdef HeapItem _heap_pop(HeapItem* heap, Py_ssize_t* size) noexcept nogil:
    cdef HeapItem top = heap[0]
    cdef Py_ssize_t i = 0, l, r, smallest
    size[0] -= 1
    heap[0] = heap[size[0]]
    while True:
        l = 2 * i + 1
        r = l + 1
        smallest = i
        if l < size[0] and _less(heap[l], heap[smallest]):
            smallest = l
        if r < size[0] and _less(heap[r], heap[smallest]):
            smallest = r
        if smallest == i:
            break
        heap[i], heap[smallest] = heap[smallest], heap[i]
        i = smallest
    return top


def grid_search(blocked, penalty, start, goal, double voxel_size):
    cdef cnp.uint8_t[::1] blk = np.ascontiguousarray(blocked, dtype=np.uint8).ravel()
    cdef bint has_pen = penalty is not None
    cdef double[::1] pen = (np.ascontiguousarray(penalty, dtype=np.float64).ravel()
                            if has_pen else np.zeros(1))
    cdef Py_ssize_t nx = blocked.shape[0], ny = blocked.shape[1], nz = blocked.shape[2]
    cdef Py_ssize_t size = nx * ny * nz
    g_arr = np.full(size, np.inf)
    parent_arr = np.full(size, -1, dtype=np.intp)
    cdef double[::1] g = g_arr
    cdef Py_ssize_t[::1] parent = parent_arr
    cdef cnp.uint8_t[::1] closed = np.zeros(size, dtype=np.uint8)
    cdef long sx = start[0], sy = start[1], sz = start[2]
    cdef long gx = goal[0], gy = goal[1], gz = goal[2]
    cdef Py_ssize_t start_id = (sx * ny + sy) * nz + sz
    cdef Py_ssize_t goal_id = (gx * ny + gy) * nz + gz
    cdef int dxs[26]
    cdef int dys[26]
    cdef int dzs[26]
    cdef double steps[26]
    cdef int ni = 0, dx, dy, dz, e
    for dx in range(-1, 2):
        for dy in range(-1, 2):
            for dz in range(-1, 2):
                if dx == 0 and dy == 0 and dz == 0:
                    continue
                dxs[ni] = dx
                dys[ni] = dy
                dzs[ni] = dz
                steps[ni] = voxel_size * sqrt(dx * dx + dy * dy + dz * dz)
                ni += 1
    cdef Py_ssize_t cap = 1024, hsize = 0
    cdef HeapItem* heap = <HeapItem*>malloc(cap * sizeof(HeapItem))
    cdef HeapItem item, newitem
    cdef HeapItem* grown
    cdef long long counter = 0
    cdef Py_ssize_t cur, nid, cx, cy, cz, rem
    cdef long x, y, z
    cdef double gc, cand, hx, hy, hz
    cdef bint found = False
    if heap == NULL:
        raise MemoryError()
    try:
        with nogil:
            g[start_id] = 0.0
            item.f = voxel_size * sqrt(<double>((sx - gx) * (sx - gx) + (sy - gy) * (sy - gy) + (sz - gz) * (sz - gz)))
            item.counter = 0
            item.node = start_id
            _heap_push(heap, &hsize, item)
            while hsize > 0:
                item = _heap_pop(heap, &hsize)
                cur = item.node
                if closed[cur]:
                    continue
                closed[cur] = 1
                if cur == goal_id:
                    found = True
                    break
                cx = cur // (ny * nz)
                rem = cur - cx * ny * nz
                cy = rem // nz
                cz = rem - cy * nz
                gc = g[cur]
                for e in range(26):
                    x = cx + dxs[e]
                    y = cy + dys[e]
                    z = cz + dzs[e]
                    if x < 0 or y < 0 or z < 0 or x >= nx or y >= ny or z >= nz:
                        continue
                    nid = (x * ny + y) * nz + z
                    if blk[nid] or closed[nid]:
                        continue
                    cand = gc + steps[e]
                    if has_pen:
                        cand = cand + pen[nid]
                    if cand < g[nid]:
                        g[nid] = cand
                        parent[nid] = cur
                        counter += 1
                        hx = <double>(x - gx)
                        hy = <double>(y - gy)
                        hz = <double>(z - gz)
                        newitem.f = cand + voxel_size * sqrt(hx * hx + hy * hy + hz * hz)
                        newitem.counter = counter
                        newitem.node = nid
                        if hsize == cap:
                            grown = <HeapItem*>realloc(heap, cap * 2 * sizeof(HeapItem))
                            if grown == NULL:
                                break
                            heap = grown
                            cap *= 2
                        _heap_push(heap, &hsize, newitem)
    finally:
        free(heap)
    if not found:
        return None, float("inf")
    ids = []
    cur = goal_id
    while cur != -1:
        ids.append(cur)
        cur = parent[cur]
    ids.reverse()
    ids_arr = np.asarray(ids, dtype=np.int64)
    cells = np.stack(np.unravel_index(ids_arr, (nx, ny, nz)), axis=1).astype(np.int64)
    return cells, float(g[goal_id])

