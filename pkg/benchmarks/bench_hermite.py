"""Compare the compiled and numpy Hermite kernels.

    python benchmarks/bench_hermite.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from gsfactor import _hermite_py

try:
    from gsfactor import _hermite_ext
except ImportError:  # extension not built
    _hermite_ext = None

CASES = [
    # (label, n_max, points)
    ("table N=32, 256 pts", 32, np.linspace(-8, 8, 256)),
    ("table N=64, 4096 pts", 64, np.linspace(-12, 12, 4096)),
    ("table N=200, 512 pts (|x|>20 tail)", 200, np.linspace(-40, 40, 512)),
]


def bench(fn, *args, repeat=5):
    number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-6)))
    best = min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _hermite_ext is None:
        print("compiled extension not built; timing the numpy kernels only")
    print(f"{'case':40s} {'numpy [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    rows = [(label, "hermite_table", (n, x)) for label, n, x in CASES]
    rows.append(("inv_christoffel n=200, 200 pts", "inv_christoffel", (200, np.linspace(-19, 19, 200))))
    for label, name, fargs in rows:
        t_py = bench(getattr(_hermite_py, name), *fargs, repeat=args.repeat)
        if _hermite_ext is None:
            print(f"{label:40s} {t_py * 1e3:12.3f} {'-':>12s} {'-':>8s}")
            continue
        t_ext = bench(getattr(_hermite_ext, name), *fargs, repeat=args.repeat)
        print(f"{label:40s} {t_py * 1e3:12.3f} {t_ext * 1e3:12.3f} {t_py / t_ext:7.1f}x")


if __name__ == "__main__":
    main()
