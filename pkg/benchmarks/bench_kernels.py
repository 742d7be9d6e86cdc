"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--mission SEED]

Each kernel runs on identical inputs in both backends; results are checked
for agreement before timings are reported.
"""

import argparse
import json
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from tscplan import _fallback

try:
    from tscplan import _core
except ImportError:
    _core = None


def _cases(rng):
    occ = (rng.random((60, 40, 40)) < 0.05).astype(np.uint8)
    sparse = (rng.random((30, 30, 30)) < 0.15).astype(np.uint8)
    sparse[0, 0, 0] = sparse[29, 29, 29] = 0
    mins = rng.uniform(0, 10, (2000, 3))
    maxs = mins + rng.uniform(0.1, 0.9, (2000, 3))
    n = 21
    M = rng.normal(size=(n, n))
    G = M @ M.T + np.eye(n)
    J0 = np.linalg.inv(np.linalg.cholesky(G)).T
    a = rng.normal(size=n)
    C = rng.normal(size=(120, n))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    d = rng.uniform(0.1, 1.0, 120)
    seed = tuple(int(v) for v in np.argwhere(sparse == 0)[len(np.argwhere(sparse == 0)) // 2])

    def mark(k):
        occ2 = np.zeros((40, 40, 40), np.uint8)
        k.mark_aabbs(occ2, np.zeros(3), 0.3, mins, maxs)
        return occ2

    return {
        "dilate r=1 (60x40x40)": lambda k: k.dilate(occ, 1),
        "mark_aabbs (2000 boxes)": mark,
        "grow_box (30^3, 15% occupied)": lambda k: k.grow_box(sparse, seed, (0, 0, 0), (29, 29, 29)),
        "grid_search (30^3 A*)": lambda k: k.grid_search(sparse, None, (0, 0, 0), (29, 29, 29), 0.3)[1],
        "gi_solve (21 vars, 120 rows)": lambda k: k.gi_solve(J0, a, C, d, 1e-10, 500)[0],
    }


def _time(fn, repeat):
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def _same(x, y):
    if isinstance(x, tuple):
        return all(_same(a, b) for a, b in zip(x, y))
    return np.allclose(np.asarray(x, dtype=float), np.asarray(y, dtype=float), atol=1e-8)


MISSION = """
import json, sys, time
import tscplan
from tscplan.planner import run_mission
from tscplan.sim import DEFAULT_GOAL, DEFAULT_START
from tscplan.world import generate_world
world = generate_world(int(sys.argv[1]))
t0 = time.perf_counter()
r = run_mission(world, DEFAULT_START, DEFAULT_GOAL)
print(json.dumps({"backend": tscplan.BACKEND, "wall": time.perf_counter() - t0,
                  "median_ms": sorted(r.timings[:, 2])[len(r.timings) // 2], "time": r.flight_time}))
"""


def _mission(seed, pure):
    env = dict(os.environ)
    env.pop("TSCPLAN_PURE_PYTHON", None)
    if pure:
        env["TSCPLAN_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", MISSION, str(seed)], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mission", type=int, metavar="SEED", help="also fly one full-scale mission per backend")
    args = parser.parse_args(argv)
    if _core is None:
        print("compiled kernels are not built; only the fallback is available")
        return 1
    cases = _cases(np.random.default_rng(args.seed))
    print(f"{'kernel':32} {'python ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for name, fn in cases.items():
        if not _same(fn(_fallback), fn(_core)):
            print(f"{name:32} backends disagree")
            continue
        tp = _time(lambda: fn(_fallback), args.repeat) * 1e3
        tc = _time(lambda: fn(_core), args.repeat) * 1e3
        print(f"{name:32} {tp:10.2f} {tc:12.3f} {tp / tc:7.1f}x")
    if args.mission is not None:
        runs = [_mission(args.mission, pure) for pure in (True, False)]
        if runs[0]["time"] != runs[1]["time"]:
            print("warning: backends flew different trajectories")
        for r in runs:
            print(f"mission seed {args.mission} [{r['backend']:8}] wall {r['wall']:6.1f} s, "
                  f"median iteration {r['median_ms']:.1f} ms, flight time {r['time']:.1f} s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
