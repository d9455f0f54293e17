"""Numba loop kernels and their numpy twins must agree."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helins import kernels
from helins.spectral import Grid

compiled = kernels.compile_loops()


def _spectral(rng, g):
    shape = (3,) + g.spectral_shape
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@given(st.sampled_from([4, 6, 8]), st.integers(0, 1000))
def test_cross(n, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, 3, n, n, n))
    ref = np.cross(a, b, axis=0)
    for fn in (compiled["cross"], kernels.NUMPY_KERNELS["cross"]):
        out = np.empty_like(a)
        fn(a, b, out)
        assert np.allclose(out, ref, atol=1e-14)


@given(st.sampled_from([4, 8]), st.integers(0, 1000))
def test_project_masked(n, seed):
    g = Grid(n)
    rng = np.random.default_rng(seed)
    f = _spectral(rng, g)
    mx, my, mz = g.dealias_axis
    outs = []
    for fn in (compiled["project_masked"], kernels.NUMPY_KERNELS["project_masked"]):
        out = np.empty_like(f)
        fn(f, g.kx, g.ky, g.kz, mx, my, mz, out)
        outs.append(out)
    assert np.allclose(outs[0], outs[1], atol=1e-13)
    k0, k1, k2 = g.k_vectors
    assert np.allclose(k0 * outs[0][0] + k1 * outs[0][1] + k2 * outs[0][2], 0, atol=1e-12)
    assert np.all(outs[0][:, 0, 0, 0] == 0)
    assert np.all(outs[0][:, ~mx] == 0)


@given(st.sampled_from([4, 8]), st.integers(0, 1000))
def test_helical_parts(n, seed):
    g = Grid(n)
    f = _spectral(np.random.default_rng(seed), g)
    res = []
    for fn in (compiled["helical_parts"], kernels.NUMPY_KERNELS["helical_parts"]):
        p, m = np.empty_like(f), np.empty_like(f)
        fn(f, g.kx, g.ky, g.kz, p, m)
        res.append((p, m))
    assert np.allclose(res[0][0], res[1][0], atol=1e-13)
    assert np.allclose(res[0][1], res[1][1], atol=1e-13)


def test_oscillatory_sum_against_direct_formula():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-5, 5, (7, 3))
    xi = rng.standard_normal((50, 3))
    a, b = rng.standard_normal((2, 50, 3))
    ph = pts @ xi.T
    ref = np.sin(ph) @ a + np.cos(ph) @ b
    for fn in (compiled["oscillatory_sum"], kernels.NUMPY_KERNELS["oscillatory_sum"]):
        out = np.empty((7, 3))
        fn(pts, xi, a, b, out)
        assert np.allclose(out, ref, atol=1e-12)


def test_numpy_fallback_selected_by_env_flag():
    code = (
        "import helins._accel as a, helins.kernels as k;"
        "print(a.USE_NUMBA, k.cross is k.NUMPY_KERNELS['cross'])"
    )
    env = dict(os.environ, HELINS_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]


def test_solver_step_identical_under_both_backends(tmp_path):
    code = (
        "import numpy as np\n"
        "from helins.spectral import Grid\n"
        "from helins.initial_data import random_solenoidal\n"
        "from helins.solver import RunConfig, run\n"
        "g = Grid(16); u = random_solenoidal(g, seed=5, amplitude=2.0)\n"
        "r = run(RunConfig(g, 0.1, 1e-2, 5e-2), u0=u)\n"
        f"np.save(r'{tmp_path}/' + __import__('os').environ['HELINS_NUMBA'] + '.npy', r.state.u.coeffs)\n"
    )
    for flag in ("0", "1"):
        subprocess.run([sys.executable, "-c", code], env=dict(os.environ, HELINS_NUMBA=flag), check=True)
    a, b = np.load(tmp_path / "0.npy"), np.load(tmp_path / "1.npy")
    assert np.allclose(a, b, rtol=0, atol=1e-13 * np.abs(a).max())
