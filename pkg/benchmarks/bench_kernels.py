"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each row reports the best wall time per backend and the speedup; the
first numba call per kernel is a warm-up so compilation is not counted.
"""

import argparse
import time

import numpy as np

from herman_lab import kernels
from herman_lab.cfrac import RotationNumber
from herman_lab.circle import tune
from herman_lab.dynamics import QuadraticSiegel


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(quick):
    theta = RotationNumber.golden()
    P = QuadraticSiegel(theta)
    f = tune(0.2, theta).to_map()
    side = 96 if quick else 256
    x = np.linspace(-1.6, 1.4, side)
    y = np.linspace(-1.5, 1.5, side)
    pts_p = (x[None, :] + 1j * y[:, None]).ravel()
    pts_f = 3.5 * pts_p
    n_orbit = 20_000 if quick else 200_000
    n_rot = 5_000 if quick else 50_000
    ts = np.linspace(0.55, 0.65, 16)
    return {
        "orbit P": lambda b: kernels.orbit_quadratic(P.lam, P.omega, n_orbit, backend=b),
        "orbit f": lambda b: kernels.orbit_blaschke(f.a, f.b, f.omega2, n_orbit, backend=b),
        "escape P": lambda b: kernels.escape_quadratic(P.lam, pts_p, 500, 1e4, backend=b),
        "escape f": lambda b: kernels.escape_blaschke(f.a, f.b, pts_f, 500, 1e-4, 1e4, backend=b),
        "slice rotation": lambda b: kernels.slice_rotation(0.2, ts, 0.0, n_rot, backend=b),
        "angular rotation": lambda b: kernels.angular_rotation(f.a, f.b, 1.0, n_rot, backend=b),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="small sizes (smoke run)")
    args = ap.parse_args()
    if not kernels.resolve("numba") == "numba":
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"{'kernel':<18}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, fn in cases(args.quick).items():
        fn("numba")  # compile
        t_np = best_of(lambda: fn("numpy"), args.repeat)
        t_nb = best_of(lambda: fn("numba"), args.repeat)
        print(f"{name:<18}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
