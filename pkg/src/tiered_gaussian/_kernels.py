"""Hot numeric loops.

Every kernel has a numba implementation and a pure-numpy twin with the same
signature. The numba path is used when numba imports cleanly, unless the
environment variable ``TIERED_GAUSSIAN_DISABLE_NUMBA`` is set to a non-empty
value other than ``0``. ``benchmarks/bench_kernels.py`` times both.
"""

import math
import os

import numpy as np

_SQRT_2PI = math.sqrt(2.0 * math.pi)

DISABLE_NUMBA = os.environ.get("TIERED_GAUSSIAN_DISABLE_NUMBA", "") not in ("", "0")

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional accelerator
    numba = None

USE_NUMBA = numba is not None and not DISABLE_NUMBA


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _np_log_sum(x, w, mu, sig):
    out = np.zeros(x.shape[0])
    for i in range(w.shape[0]):
        z = (x - mu[i]) / sig[i]
        out += (w[i] / (sig[i] * _SQRT_2PI)) * np.exp(-0.5 * z * z)
    return out


def _np_log_sum_derivs(x, w, mu, sig):
    s0 = np.zeros(x.shape[0])
    s1 = np.zeros(x.shape[0])
    s2 = np.zeros(x.shape[0])
    for i in range(w.shape[0]):
        z = (x - mu[i]) / sig[i]
        t = (w[i] / (sig[i] * _SQRT_2PI)) * np.exp(-0.5 * z * z)
        s0 += t
        s1 += -t * z / sig[i]
        s2 += t * (z * z - 1.0) / (sig[i] * sig[i])
    return s0, s1, s2


def _np_log_sum_jacobian(x, w, mu, sig):
    n = w.shape[0]
    s = np.zeros(x.shape[0])
    jac = np.empty((x.shape[0], 3 * n))
    for i in range(n):
        z = (x - mu[i]) / sig[i]
        t = (w[i] / (sig[i] * _SQRT_2PI)) * np.exp(-0.5 * z * z)
        s += t
        jac[:, 3 * i] = t
        jac[:, 3 * i + 1] = t * z / sig[i]
        jac[:, 3 * i + 2] = t * (z * z - 1.0)
    return s, jac


def _np_kernel_sum(x, data, h, w, mu, sig, norm, kmean, kscale):
    out = np.zeros(x.shape[0])
    chunk = max(1, 2_000_000 // max(1, data.shape[0]))
    inv_h = 1.0 / h
    for start in range(0, x.shape[0], chunk):
        xs = x[start:start + chunk]
        u = (xs[:, None] - data[None, :]) * inv_h[None, :]
        y = kmean + kscale * u
        s = np.zeros(y.shape)
        for i in range(w.shape[0]):
            z = (y - mu[i]) / sig[i]
            s += (w[i] / (sig[i] * _SQRT_2PI)) * np.exp(-0.5 * z * z)
        dens = np.expm1(s) * (kscale / norm)
        out[start:start + chunk] = (dens * inv_h[None, :]).sum(axis=1)
    return out / data.shape[0]


def _np_euler_paths(x0, drift, vol, dt, z):
    n_paths, steps = z.shape
    out = np.empty((n_paths, steps + 1))
    out[:, 0] = x0
    sq = math.sqrt(dt)
    x = np.full(n_paths, float(x0))
    for k in range(steps):
        x = x + drift * x * dt + vol * x * sq * z[:, k]
        out[:, k + 1] = x
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

def _nb_log_sum(x, w, mu, sig):
    m = x.shape[0]
    n = w.shape[0]
    out = np.zeros(m)
    for i in range(n):
        a = w[i] / (sig[i] * _SQRT_2PI)
        inv = 1.0 / sig[i]
        for j in range(m):
            z = (x[j] - mu[i]) * inv
            out[j] += a * math.exp(-0.5 * z * z)
    return out


def _nb_log_sum_derivs(x, w, mu, sig):
    m = x.shape[0]
    n = w.shape[0]
    s0 = np.zeros(m)
    s1 = np.zeros(m)
    s2 = np.zeros(m)
    for i in range(n):
        a = w[i] / (sig[i] * _SQRT_2PI)
        inv = 1.0 / sig[i]
        for j in range(m):
            z = (x[j] - mu[i]) * inv
            t = a * math.exp(-0.5 * z * z)
            s0[j] += t
            s1[j] -= t * z * inv
            s2[j] += t * (z * z - 1.0) * inv * inv
    return s0, s1, s2


def _nb_log_sum_jacobian(x, w, mu, sig):
    m = x.shape[0]
    n = w.shape[0]
    s = np.zeros(m)
    jac = np.empty((m, 3 * n))
    for i in range(n):
        a = w[i] / (sig[i] * _SQRT_2PI)
        inv = 1.0 / sig[i]
        for j in range(m):
            z = (x[j] - mu[i]) * inv
            t = a * math.exp(-0.5 * z * z)
            s[j] += t
            jac[j, 3 * i] = t
            jac[j, 3 * i + 1] = t * z * inv
            jac[j, 3 * i + 2] = t * (z * z - 1.0)
    return s, jac


def _nb_kernel_sum(x, data, h, w, mu, sig, norm, kmean, kscale):
    m = x.shape[0]
    nd = data.shape[0]
    n = w.shape[0]
    amp = np.empty(n)
    for i in range(n):
        amp[i] = w[i] / (sig[i] * _SQRT_2PI)
    out = np.zeros(m)
    c = kscale / norm
    for j in range(m):
        acc = 0.0
        for k in range(nd):
            y = kmean + kscale * (x[j] - data[k]) / h[k]
            s = 0.0
            for i in range(n):
                z = (y - mu[i]) / sig[i]
                s += amp[i] * math.exp(-0.5 * z * z)
            acc += math.expm1(s) * c / h[k]
        out[j] = acc / nd
    return out


def _nb_euler_paths(x0, drift, vol, dt, z):
    n_paths, steps = z.shape
    out = np.empty((n_paths, steps + 1))
    sq = math.sqrt(dt)
    for p in range(n_paths):
        x = x0
        out[p, 0] = x
        for k in range(steps):
            x = x + drift * x * dt + vol * x * sq * z[p, k]
            out[p, k + 1] = x
    return out


NUMPY_KERNELS = {
    "log_sum": _np_log_sum,
    "log_sum_derivs": _np_log_sum_derivs,
    "log_sum_jacobian": _np_log_sum_jacobian,
    "kernel_sum": _np_kernel_sum,
    "euler_paths": _np_euler_paths,
}

_PYTHON_LOOPS = {
    "log_sum": _nb_log_sum,
    "log_sum_derivs": _nb_log_sum_derivs,
    "log_sum_jacobian": _nb_log_sum_jacobian,
    "kernel_sum": _nb_kernel_sum,
    "euler_paths": _nb_euler_paths,
}

if numba is not None:
    NUMBA_KERNELS = {
        name: numba.njit(cache=True, nogil=True)(fn) for name, fn in _PYTHON_LOOPS.items()
    }
else:  # pragma: no cover
    NUMBA_KERNELS = {}

_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def log_sum(x, w, mu, sig):
    """Weighted Gaussian sum at each point of the 1-D array ``x``."""
    return _ACTIVE["log_sum"](_f64(x), _f64(w), _f64(mu), _f64(sig))


def log_sum_derivs(x, w, mu, sig):
    """The sum and its first two derivatives in x."""
    return _ACTIVE["log_sum_derivs"](_f64(x), _f64(w), _f64(mu), _f64(sig))


def log_sum_jacobian(x, w, mu, sig):
    """The sum and its partials in (log w_i, mu_i, log sigma_i), interleaved per component."""
    return _ACTIVE["log_sum_jacobian"](_f64(x), _f64(w), _f64(mu), _f64(sig))


def kernel_sum(x, data, h, w, mu, sig, norm, kmean, kscale):
    """Mean of per-observation kernels built from an exponentiated Gaussian sum."""
    return _ACTIVE["kernel_sum"](
        _f64(x), _f64(data), _f64(h), _f64(w), _f64(mu), _f64(sig),
        float(norm), float(kmean), float(kscale),
    )


def euler_paths(x0, drift, vol, dt, z):
    """Euler-Maruyama paths of dX = drift*X dt + vol*X dW from standard normals ``z``."""
    return _ACTIVE["euler_paths"](float(x0), float(drift), float(vol), float(dt), _f64(z))
