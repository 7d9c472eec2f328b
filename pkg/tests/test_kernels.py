import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uelpick import _kernels as K

PROPS = settings(max_examples=100)


def gather(seed, n=60, k=6):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, k)), np.linspace(0.0, 1500.0, k)


@PROPS
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_semblance_paths_agree(seed, m):
    traces, offs = gather(seed)
    vels = np.linspace(1500.0, 4000.0, 7)
    a = K.semblance_jit(traces, 0.0, 4.0, offs, vels, m)
    b = K.semblance_numpy(traces, 0.0, 4.0, offs, vels, m)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


@PROPS
@given(st.integers(0, 2**32 - 1), st.floats(1200, 5000), st.floats(0.05, 2.0))
def test_nmo_paths_agree(seed, v, limit):
    traces, offs = gather(seed)
    vel = np.full(traces.shape[0], v)
    a, la = K.nmo_jit(traces, 0.0, 4.0, offs, vel, limit)
    b, lb = K.nmo_numpy(traces, 0.0, 4.0, offs, vel, limit)
    np.testing.assert_array_equal(la, lb)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@PROPS
@given(st.integers(0, 2**32 - 1), st.floats(5, 500))
def test_assf_shift_paths_agree(seed, sigma):
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, 1000, size=(40, 2))
    w = rng.uniform(0.01, 1, size=40)
    c = xy[rng.permutation(40)[:15]].copy()
    a, fa = K.assf_shift_jit(xy, w, c, sigma)
    b, fb = K.assf_shift_numpy(xy, w, c, sigma)
    assert fa == fb
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)


@PROPS
@given(st.integers(0, 2**32 - 1), st.floats(1, 300), st.booleans())
def test_merge_paths_agree(seed, thr, grid):
    rng = np.random.default_rng(seed)
    # grid points create exact distance ties
    pts = rng.integers(0, 10, size=(30, 2)) * 50.0 if grid else rng.uniform(0, 1000, size=(30, 2))
    mass = rng.uniform(0.1, 2, size=30)
    pa, ma = K.merge_jit(pts, mass, thr)
    pb, mb = K.merge_numpy(pts, mass, thr)
    assert pa.shape == pb.shape
    np.testing.assert_allclose(pa, pb, rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(ma, mb, rtol=1e-12)


def test_env_flag_selects_numpy():
    code = "from uelpick import _kernels as K; print(K.USE_JIT, K.semblance is K.semblance_numpy)"
    env = dict(os.environ, UELPICK_DISABLE_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
    env["UELPICK_DISABLE_JIT"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split()[0] == str(K.HAS_NUMBA)
