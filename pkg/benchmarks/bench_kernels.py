"""Compiled vs pure-Python kernel timings, plus one end-to-end run per backend.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Needs the extension built (``python3 setup.py build_ext --inplace``).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from gathersim import _kernels, _pykernels

END_TO_END = """
import time
from gathersim.engine import RunConfig, SchedulerPolicy, run
from gathersim.generators import random_connected, regular_polygon
from gathersim.near_gathering import NearGatherParams
from gathersim.protocols import ProtocolSpec
from gathersim.swarm import Configuration
t0 = time.perf_counter()
run(Configuration(regular_polygon(32)), RunConfig(protocol=ProtocolSpec("GTC")))
params = NearGatherParams()
cfg = Configuration(random_connected(10, 3.0, 2, 1), 1.0, params.tau)
run(cfg, RunConfig(near=params, scheduler=SchedulerPolicy(mode="SSYNC", policy="RANDOM_SUBSET"),
                   termination="NEAR_GATHER"))
print(time.perf_counter() - t0)
"""


def _cases(rng):
    pts2 = np.ascontiguousarray(rng.normal(size=(40, 2)))
    pts3 = np.ascontiguousarray(rng.normal(size=(12, 3)))
    sorted2 = np.ascontiguousarray(pts2[np.lexsort(pts2.T[::-1])])
    ang = np.linspace(0, 2 * np.pi, 24, endpoint=False)
    poly = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    normals = np.ascontiguousarray(np.stack([np.cos(ang + np.pi / 24), np.sin(ang + np.pi / 24)], axis=1))
    offsets = np.ascontiguousarray(np.einsum("ij,ij->i", normals, poly))
    q = np.zeros(2)
    dirs = np.ascontiguousarray(np.stack([np.cos(np.linspace(0, np.pi, 744)), np.sin(np.linspace(0, np.pi, 744))], 1))
    start = np.zeros(2)
    goal = np.array([0.3, 0.2])
    centers = np.ascontiguousarray(rng.uniform(-0.2, 0.2, size=(12, 2)))
    origins = np.ascontiguousarray(rng.uniform(0, 0.3, size=(10, 2)))
    tips = np.ascontiguousarray(origins + rng.uniform(-0.2, 0.2, size=(10, 2)))
    members = np.arange(10, dtype=np.int64)
    return {
        "seh_center (40 pts, d=2)": lambda k: k.seh_center(pts2),
        "seh_center (12 pts, d=3)": lambda k: k.seh_center(pts3),
        "hull2d (40 pts)": lambda k: k.hull2d(sorted2),
        "centered_chord (24 facets, 744 dirs)": lambda k: k.centered_chord(normals, offsets, q, dirs, np.inf),
        "clamp_fraction (12 disks)": lambda k: k.clamp_fraction(start, goal, centers, 0.5),
        "collision_min_dist (10 vectors)": lambda k: k.collision_min_dist(0, origins, tips, members, 1e-9, 1e-12),
    }


def _best(fn, repeat, number=50):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def _end_to_end(pure: bool) -> float:
    env = dict(os.environ)
    if pure:
        env["GATHERSIM_PURE"] = "1"
    else:
        env.pop("GATHERSIM_PURE", None)
    out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'compiled us':>12s} {'pure us':>12s} {'speedup':>8s}")
    for name, call in _cases(rng).items():
        fast = _best(lambda: call(_kernels), args.repeat)
        slow = _best(lambda: call(_pykernels), args.repeat)
        print(f"{name:40s} {fast * 1e6:12.1f} {slow * 1e6:12.1f} {slow / fast:8.1f}")
    fast, slow = _end_to_end(False), _end_to_end(True)
    print(f"{'end to end (32-gon GtC + P^cl run)':40s} {fast * 1e6:12.0f} {slow * 1e6:12.0f} {slow / fast:8.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
