"""Compiled and pure-Python kernels agree with each other and with scipy."""

import numpy as np
import pytest
from scipy import ndimage

from tscplan import _backend, _fallback

from oracles import dijkstra_cost, kkt_enumeration


def test_backend_exposes_all_kernels():
    for name in ("gi_solve", "dilate", "mark_aabbs", "grow_box", "grid_search"):
        assert callable(getattr(_backend, name))
    assert _backend.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("radius", [0, 1, 2])
def test_dilate_matches_scipy(kernels, rng, radius):
    occ = (rng.random((9, 7, 8)) < 0.05).astype(np.uint8)
    got = kernels.dilate(occ, radius).astype(bool)
    if radius == 0:
        want = occ.astype(bool)
    else:
        want = ndimage.binary_dilation(occ.astype(bool), np.ones((3, 3, 3), bool), iterations=radius)
    assert np.array_equal(got, want)


def test_mark_aabbs_matches_overlap_rule(kernels, rng):
    vs = 0.3
    origin = np.array([0.1, -0.2, 0.0])
    mins = rng.uniform(-0.5, 2.5, (20, 3))
    maxs = mins + rng.uniform(0.01, 0.8, (20, 3))
    occ = np.zeros((8, 8, 8), np.uint8)
    kernels.mark_aabbs(occ, origin, vs, mins, maxs)
    want = np.zeros((8, 8, 8), bool)
    for idx in np.ndindex(want.shape):
        lo = origin + np.array(idx) * vs
        hi = lo + vs
        want[idx] = np.any(np.all((mins < hi - 1e-9) & (maxs > lo + 1e-9), axis=1))
    assert np.array_equal(occ.astype(bool), want)


def test_grow_box_returns_maximal_free_box(kernels, rng):
    for _ in range(20):
        occ = (rng.random((7, 7, 7)) < 0.15).astype(np.uint8)
        free = np.argwhere(occ == 0)
        seed = tuple(int(v) for v in free[rng.integers(len(free))])
        lo, hi = kernels.grow_box(occ, seed, (0, 0, 0), (6, 6, 6))
        box = occ[lo[0] : hi[0] + 1, lo[1] : hi[1] + 1, lo[2] : hi[2] + 1]
        assert not box.any()
        assert all(l <= s <= h for l, s, h in zip(lo, seed, hi))
        # no face can be extended
        for axis in range(3):
            for side, layer in ((0, lo[axis] - 1), (1, hi[axis] + 1)):
                if not 0 <= layer <= 6:
                    continue
                sl = [slice(lo[i], hi[i] + 1) for i in range(3)]
                sl[axis] = slice(layer, layer + 1)
                assert occ[tuple(sl)].any()


def test_kernels_agree_with_fallback(kernels, rng):
    for _ in range(30):
        occ = (rng.random((9, 6, 7)) < 0.2).astype(np.uint8)
        occ[4, 3, 3] = 0
        got = kernels.grow_box(occ, (4, 3, 3), (1, 0, 1), (8, 5, 5))
        want = _fallback.grow_box(occ, (4, 3, 3), (1, 0, 1), (8, 5, 5))
        assert tuple(map(tuple, got)) == tuple(map(tuple, want))
        pen = rng.random(occ.shape)
        c1, k1 = kernels.grid_search(occ, pen, (4, 3, 3), (4, 3, 3), 0.3)
        assert c1 is not None and k1 == 0.0


def test_grid_search_cost_matches_dijkstra(kernels, rng):
    for _ in range(10):
        occ = rng.random((8, 8, 8)) < 0.2
        occ[0, 0, 0] = occ[7, 7, 7] = False
        cells, cost = kernels.grid_search(occ.view(np.uint8), None, (0, 0, 0), (7, 7, 7), 0.3)
        want = dijkstra_cost(occ, (0, 0, 0), (7, 7, 7), 0.3)
        if np.isinf(want):
            assert cells is None
        else:
            assert cost == pytest.approx(want, abs=1e-9)


def test_gi_solve_matches_kkt_enumeration(kernels, rng):
    for _ in range(40):
        n = int(rng.integers(1, 5))
        M = rng.normal(size=(n, n))
        G = M @ M.T + 0.5 * np.eye(n)
        L = np.linalg.cholesky(G)
        J0 = np.linalg.inv(L).T
        a = rng.normal(size=n)
        m = int(rng.integers(0, 6))
        C = rng.normal(size=(m, n))
        C /= np.linalg.norm(C, axis=1, keepdims=True)
        d = rng.normal(size=m)
        y, mu, status, iters, cert = kernels.gi_solve(J0, a, C, d, 1e-10, 200)
        want = kkt_enumeration(G, a, np.zeros((0, n)), np.zeros(0), C, d)
        if want is None:
            assert status == _fallback.STATUS_INFEASIBLE
            assert np.all(cert >= -1e-12) and np.allclose(C.T @ cert, 0, atol=1e-8) and d @ cert < 0
        else:
            assert status == _fallback.STATUS_OPTIMAL
            assert 0.5 * y @ G @ y + a @ y == pytest.approx(want[1], abs=1e-8)


def test_env_var_forces_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, TSCPLAN_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import tscplan; print(tscplan.BACKEND)"], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
