"""Compare the numba and numpy backends of every hot kernel.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported side by side from ``harbench.kernels`` so one run
covers both, regardless of HARBENCH_DISABLE_NUMBA. The first numba call is a
warm-up and is reported separately as compile/cache-load time.
"""

import argparse
import time

import numpy as np

from harbench import kernels


def _cases(rng):
    x = rng.normal(size=(64, 125, 9, 4))
    k = rng.normal(size=(12, 2, 4, 8))
    b = rng.normal(size=8)
    conv_out = kernels.NUMPY["conv2d_forward"](x, k, b)
    dout = rng.normal(size=conv_out.shape)
    pooled, arg = kernels.NUMPY["maxpool_forward"](conv_out, 2, 1)
    dpool = rng.normal(size=pooled.shape)

    Xs = rng.normal(size=(600, 12))
    ys = rng.integers(0, 4, 600)

    n_tr, n_te = 1800, 200
    tr = (rng.integers(0, 96, n_tr), rng.integers(0, 6, n_tr), rng.integers(0, 3000, n_tr))
    te = (rng.integers(0, 96, n_te), rng.integers(0, 6, n_te), rng.integers(0, 3000, n_te))
    pair_args = (tr[0], tr[1], tr[2], tr[2] + 250, te[0], te[1], te[2], te[2] + 250)

    return {
        "conv2d_forward": (x, k, b),
        "conv2d_backward": (x, k, dout),
        "maxpool_forward": (conv_out, 2, 1),
        "maxpool_backward": (dpool, arg, conv_out.shape, 2, 1),
        "ar1": (rng.normal(size=200_000), 0.9, 0.0),
        "best_split": (Xs, ys, 4, 1),
        "pair_counts": pair_args,
    }


def _time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    cases = _cases(np.random.default_rng(args.seed))
    if not kernels.COMPILED:
        print("numba unavailable or disabled; timing the numpy backend only")
    print(f"{'kernel':<18} {'numpy ms':>10} {'numba ms':>10} {'warm-up ms':>11} {'speedup':>8}")
    for name, case in cases.items():
        t_np = _time(kernels.NUMPY[name], case, args.repeat)
        if name in kernels.COMPILED:
            fn = kernels.COMPILED[name]
            t0 = time.perf_counter()
            fn(*case)
            warm = time.perf_counter() - t0
            t_nb = _time(fn, case, args.repeat)
            print(f"{name:<18} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} {warm * 1e3:>11.1f} {t_np / t_nb:>7.1f}x")
        else:
            print(f"{name:<18} {t_np * 1e3:>10.2f} {'-':>10} {'-':>11} {'-':>8}")


if __name__ == "__main__":
    main()
