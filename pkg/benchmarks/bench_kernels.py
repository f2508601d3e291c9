"""Compare the numba and numpy Jacobi kernels.

Times a single eigendecomposition, a single SVD and the batched values-only
eigensolve used by extremal campaigns, for both backends on the same inputs.

    python3 benchmarks/bench_kernels.py --repeat 5
"""

import argparse
import time

import numpy as np

from commbounds import kernels
from commbounds._accel import HAVE_NUMBA
from commbounds.extremal import lambda_max_batch


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(rng):
    sym = rng.standard_normal((36, 36))
    sym = 0.5 * (sym + sym.T)
    general = rng.standard_normal((16, 16))
    xs = rng.standard_normal((64, 4, 4))
    return [
        ("eigh 36x36", lambda b: kernels.eigh(sym, backend=b)),
        ("svd 16x16", lambda b: kernels.svd(general, backend=b)),
        ("lambda_max_batch 64 x (n=4)", lambda b: lambda_max_batch(xs, backend=b)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    cases = _cases(np.random.default_rng(args.seed))
    if HAVE_NUMBA:
        for _, fn in cases:  # compile outside the timed region
            fn("numba")

    print(f"{'case':<30}" + "".join(f"{b:>12}" for b in backends) + ("    speedup" if HAVE_NUMBA else ""))
    for name, fn in cases:
        times = {b: _best(lambda: fn(b), args.repeat) for b in backends}
        row = f"{name:<30}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if HAVE_NUMBA:
            row += f"{times['numpy'] / times['numba']:>10.1f}x"
        print(row)


if __name__ == "__main__":
    main()
