"""Time the numba loop kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--n 64] [--points 64] [--repeat 5]

Each kernel is run on identical inputs in both forms; the script checks the
outputs agree before reporting best-of-``repeat`` wall times and the speedup.
Also times one full solver step under each backend by toggling the module
attributes the solver dispatches through.
"""
import argparse
import time

import numpy as np

from helins import kernels
from helins.initial_data import DataG, quadrature_nodes
from helins.spectral import Grid


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n, n_points, rng):
    grid = Grid(n)
    shape = grid.real_shape
    a = rng.standard_normal((3,) + shape)
    b = rng.standard_normal((3,) + shape)
    spec = rng.standard_normal((3,) + grid.spectral_shape) + 1j * rng.standard_normal((3,) + grid.spectral_shape)
    mx, my, mz = grid.dealias_axis
    nodes = quadrature_nodes(DataG(n_radial=16, n_polar=32, n_azimuth=32))
    pts = rng.uniform(-20, 20, (n_points, 3))
    return {
        "cross": (lambda: (a, b, np.empty_like(a))),
        "project_masked": (lambda: (spec, grid.kx, grid.ky, grid.kz, mx, my, mz, np.empty_like(spec))),
        "helical_parts": (lambda: (spec, grid.kx, grid.ky, grid.kz, np.empty_like(spec), np.empty_like(spec))),
        "oscillatory_sum": (lambda: (pts, nodes.xi, nodes.sin_amp, nodes.cos_amp, np.empty((n_points, 3)))),
    }


def time_step(n, repeat):
    from helins.initial_data import random_solenoidal
    from helins.solver import RunConfig, SimState, step

    grid = Grid(n)
    u = random_solenoidal(grid, seed=0, amplitude=1.0)
    cfg = RunConfig(grid, 0.05, 1e-3, 1e-3)
    s0 = SimState.initial(u, cfg.nu)
    step(s0, cfg)
    return best_of(lambda: step(s0, cfg), repeat)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    rng = np.random.default_rng(0)
    compiled = kernels.compile_loops()
    print(f"{'kernel':<18}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, make in cases(args.n, args.points, rng).items():
        jit_args = make()
        np_args = make()
        compiled[name](*jit_args)  # warm-up compiles
        kernels.NUMPY_KERNELS[name](*np_args)
        out_jit = jit_args[-1] if name != "helical_parts" else jit_args[-2]
        out_np = np_args[-1] if name != "helical_parts" else np_args[-2]
        if not np.allclose(out_jit, out_np, rtol=1e-10, atol=1e-10 * np.abs(out_np).max()):
            raise SystemExit(f"{name}: numba and numpy outputs disagree")
        tj = best_of(lambda: compiled[name](*jit_args), args.repeat)
        tn = best_of(lambda: kernels.NUMPY_KERNELS[name](*np_args), args.repeat)
        print(f"{name:<18}{tj * 1e3:>12.3f}{tn * 1e3:>12.3f}{tn / tj:>10.2f}")

    saved = {k: getattr(kernels, k) for k in compiled}
    try:
        for k, fn in compiled.items():
            setattr(kernels, k, fn)
        t_jit = time_step(args.n, args.repeat)
        for k, fn in kernels.NUMPY_KERNELS.items():
            setattr(kernels, k, fn)
        t_np = time_step(args.n, args.repeat)
    finally:
        for k, fn in saved.items():
            setattr(kernels, k, fn)
    print(f"{'solver step':<18}{t_jit * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_jit:>10.2f}")


if __name__ == "__main__":
    main()
