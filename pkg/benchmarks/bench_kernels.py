"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once untimed (numba compiles on first call), then the
best of ``--repeat`` runs is reported for both backends, with the speedup
and the largest relative difference between their outputs.
"""

import argparse
import time

import numpy as np

from tiered_gaussian import _kernels


def cases(rng):
    sig = np.array([0.5, 2.0, 8.0, 30.0])
    w = sig * np.array([1.0, 1.5, 2.0, 2.5])
    mu = np.zeros(4)
    x = rng.normal(0.0, 20.0, 200_000)
    data = rng.standard_t(3, 4000)
    h = rng.uniform(0.1, 1.0, data.size)
    grid = np.linspace(-50.0, 50.0, 2000)
    z = rng.standard_normal((2000, 1000))
    return {
        "log_sum": (x, w, mu, sig),
        "log_sum_derivs": (x, w, mu, sig),
        "log_sum_jacobian": (x, w, mu, sig),
        "kernel_sum": (grid, data, h, w, mu, sig, 40.0, 0.0, 10.0),
        "euler_paths": (1.0, 0.05, 0.2, 1e-3, z),
    }


def _flat(out):
    if isinstance(out, tuple):
        return np.concatenate([np.ravel(o) for o in out])
    return np.ravel(out)


def best_time(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    if not _kernels.NUMBA_KERNELS:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, a in cases(rng).items():
        t_np, out_np = best_time(_kernels.NUMPY_KERNELS[name], a, args.repeat)
        t_nb, out_nb = best_time(_kernels.NUMBA_KERNELS[name], a, args.repeat)
        u, v = _flat(out_nb), _flat(out_np)
        scale = np.maximum(np.abs(v), 1e-300)
        diff = float(np.max(np.abs(u - v) / scale))
        print(f"{name:<18}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
