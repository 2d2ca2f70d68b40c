"""The compiled kernels and their pure-Python twins agree bit for bit."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gathersim import _pykernels, kernels

try:
    from gathersim import _kernels
except ImportError:  # extension not built
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")


def test_pure_env_forces_fallback():
    env = dict(os.environ, GATHERSIM_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import gathersim; print(gathersim.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
@given(st.integers(0, 2**31), st.integers(1, 14), st.sampled_from([2, 3, 4]))
def test_seh_twins(seed, n, d):
    pts = np.random.default_rng(seed).normal(size=(n, d))
    perm = np.random.default_rng(seed + 1).permutation(n)
    c1 = _kernels.seh_center(np.ascontiguousarray(pts[perm]))
    c2 = _pykernels.seh_center(np.ascontiguousarray(pts[perm]))
    assert np.array_equal(np.asarray(c1), np.asarray(c2))


@needs_ext
@given(st.integers(0, 2**31))
def test_clamp_twins(seed):
    rng = np.random.default_rng(seed)
    start = rng.normal(size=2)
    goal = start + rng.normal(size=2)
    centers = start + rng.normal(size=(5, 2)) * 0.3
    args = (start, goal, np.ascontiguousarray(centers), 0.5)
    assert _kernels.clamp_fraction(*args) == _pykernels.clamp_fraction(*args)


@needs_ext
@given(st.integers(0, 2**31), st.integers(1, 20))
def test_hull_twins(seed, n):
    pts = np.ascontiguousarray(np.random.default_rng(seed).normal(size=(n, 2)))
    assert np.array_equal(np.asarray(_kernels.hull2d(pts)), np.asarray(_pykernels.hull2d(pts)))


@needs_ext
@given(st.integers(0, 2**31))
def test_chord_twins(seed):
    from gathersim import geometry
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(8, 2))
    h = geometry.hull(pts)
    q = np.ascontiguousarray(pts.mean(axis=0))
    dirs = np.ascontiguousarray(geometry._uniform_directions(2, 90))
    assert _kernels.centered_chord(h.A, h.b, q, dirs, np.inf) == _pykernels.centered_chord(h.A, h.b, q, dirs, np.inf)


@needs_ext
@given(st.integers(0, 2**31), st.integers(2, 6))
def test_collision_twins(seed, m):
    rng = np.random.default_rng(seed)
    origins = np.ascontiguousarray(rng.uniform(-0.2, 0.2, size=(m, 2)))
    tips = origins + rng.uniform(-0.3, 0.3, size=(m, 2))
    if rng.random() < 0.3:
        tips[1] = tips[0]
    if rng.random() < 0.3:
        origins[1] = 0.5 * (origins[0] + tips[0])
    tips = np.ascontiguousarray(tips)
    members = np.arange(m, dtype=np.int64)
    for i in range(m):
        a = _kernels.collision_min_dist(i, origins, tips, members, 1e-9, 1e-12)
        b = _pykernels.collision_min_dist(i, origins, tips, members, 1e-9, 1e-12)
        assert a == b


def test_pure_backend_runs_match_compiled():
    code = ("import numpy as np;from gathersim.engine import *;from gathersim.near_gathering import *;"
            "from gathersim.generators import random_connected;from gathersim.swarm import Configuration;"
            "c=Configuration(random_connected(9,2.5,2,4),1.0,2/3);"
            "pol=SchedulerPolicy(mode='SSYNC',policy='RANDOM_SUBSET',seed=1);"
            "print(run(c,RunConfig(near=NearGatherParams(),scheduler=pol,termination='NEAR_GATHER')).to_csv())")
    outs = []
    for pure in ("0", "1"):
        env = dict(os.environ, GATHERSIM_PURE=pure)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                                   check=True).stdout)
    assert outs[0] == outs[1]
