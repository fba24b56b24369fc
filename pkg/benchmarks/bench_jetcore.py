"""Timing comparison for the truncated jet product.

The package selects a compiled kernel at import when the extension built;
this script times both code paths on identical batches so the speedup is
visible on the machine at hand.

Run:  python3 benchmarks/bench_jetcore.py [--batch 4096] [--repeat 200]
"""
import argparse
import time

import numpy as np

from seqwarp.jetcore import BACKEND, jet_space, mul, mul_py


def bench(fn, space, a, b, repeat):
    fn(space, a, b)  # warm up both caches and any lazy tables
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(space, a, b)
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batch", type=int, default=4096)
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()

    print(f"active backend: {BACKEND}")
    rng = np.random.default_rng(7)
    header = f"{'nvars':>5} {'order':>5} {'ncoef':>6} {'python':>12} {'active':>12} {'ratio':>7}"
    print(header)
    print("-" * len(header))
    for nvars in (2, 4, 6):
        for order in (2, 3):
            space = jet_space(nvars, order)
            a = rng.standard_normal((args.batch, space.ncoef))
            b = rng.standard_normal((args.batch, space.ncoef))
            t_py = bench(mul_py, space, a, b, args.repeat)
            t_active = bench(mul, space, a, b, args.repeat)
            ratio = t_py / t_active if t_active > 0 else float("inf")
            print(
                f"{nvars:>5} {order:>5} {space.ncoef:>6} "
                f"{t_py * 1e6:>10.1f}us {t_active * 1e6:>10.1f}us {ratio:>6.2f}x"
            )
    if BACKEND == "python":
        print("note: extension not built; 'active' is the same pure-python kernel")


if __name__ == "__main__":
    main()
