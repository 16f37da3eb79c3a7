"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel with the best-of-``repeat`` wall time of each
backend and the speedup.  Inputs are sized like production calls.
"""

import argparse
import timeit

import numpy as np

from dxl.kernels import _pykernels as py

try:
    from dxl.kernels import _ckernels as ck
except ImportError:
    ck = None


def cases(rng):
    # Ising oracle: N = 200 sites, 151 times
    J = rng.normal(size=(200, 200))
    J = J + J.T
    np.fill_diagonal(J, 0)
    t = np.linspace(0, 1.5, 151)
    yield "ising_site_products", lambda m: m.ising_site_products(J, t, 0.5)

    # mean-field noise trajectories: 1000 samples, 201 fine steps
    b = rng.normal(size=(1000, 201, 3))
    dt = np.full(200, 0.01)
    yield "precess_frames", lambda m: m.precess_frames(b, dt)

    # cluster evolution operators: 6 spins, 200 samples
    n, d = 6, 64
    u = rng.normal(size=(200, d, d)) + 1j * rng.normal(size=(200, d, d))
    yield "cluster_autocorrelators", lambda m: m.cluster_autocorrelators(u, n)

    # random-unitary frames on 6 spins, 200 samples x 4 columns
    states = rng.normal(size=(200, d, 4)) + 1j * rng.normal(size=(200, d, 4))
    ops = rng.normal(size=(200, n, 2, 2)) + 1j * rng.normal(size=(200, n, 2, 2))
    yield "rotate_sites", lambda m: m.rotate_sites(states.copy(), ops)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, call in cases(rng):
        t_py = min(timeit.repeat(lambda: call(py), number=1, repeat=args.repeat)) * 1e3
        if ck is None:
            print(f"{name:<26}{t_py:>14.2f}{'n/a':>14}{'':>10}")
            continue
        t_c = min(timeit.repeat(lambda: call(ck), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<26}{t_py:>14.2f}{t_c:>14.2f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
