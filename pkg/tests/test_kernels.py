import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiered_gaussian import _kernels

pytestmark = pytest.mark.skipif(not _kernels.NUMBA_KERNELS, reason="numba unavailable")


def _model_arrays(rng, n):
    sig = np.sort(10 ** rng.uniform(-1, 1.5, n))
    return sig * rng.uniform(0.2, 2.0, n), rng.normal(0, 0.5, n), sig


def _both(name, *args):
    return _kernels.NUMBA_KERNELS[name](*args), _kernels.NUMPY_KERNELS[name](*args)


@settings(max_examples=25)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 8))
def test_log_sum_kernels_agree(seed, n):
    rng = np.random.default_rng(seed)
    w, mu, sig = _model_arrays(rng, n)
    x = rng.normal(0, 20, 257)
    a, b = _both("log_sum", x, w, mu, sig)
    np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-300)
    for u, v in zip(*_both("log_sum_derivs", x, w, mu, sig)):
        np.testing.assert_allclose(u, v, rtol=1e-11, atol=1e-14 * np.max(np.abs(v)))
    (sa, ja), (sb, jb) = _both("log_sum_jacobian", x, w, mu, sig)
    np.testing.assert_allclose(sa, sb, rtol=1e-11)
    np.testing.assert_allclose(ja, jb, rtol=1e-11, atol=1e-14 * np.max(np.abs(jb)))


def test_kernel_sum_agrees():
    rng = np.random.default_rng(3)
    w, mu, sig = _model_arrays(rng, 3)
    data = rng.standard_t(3, 500)
    h = rng.uniform(0.1, 1.0, 500)
    x = np.linspace(-30, 30, 301)
    a, b = _both("kernel_sum", x, data, h, w, mu, sig, 7.5, 0.1, 2.3)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)


def test_euler_paths_agree():
    z = np.random.default_rng(4).standard_normal((20, 300))
    a, b = _both("euler_paths", 1.3, 0.05, 0.4, 1e-3, z)
    np.testing.assert_allclose(a, b, rtol=1e-14)


def test_environment_flag_selects_numpy():
    code = "from tiered_gaussian import _kernels as k; print(k.USE_NUMBA, k._ACTIVE is k.NUMPY_KERNELS)"
    env = dict(os.environ, TIERED_GAUSSIAN_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out == ["False", "True"]
    env["TIERED_GAUSSIAN_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out == ["True", "False"]
