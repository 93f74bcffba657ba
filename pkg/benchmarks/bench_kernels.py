"""Time the compiled pair_gram kernel against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly so one process measures both.
Results are checked for equality before timing.
"""
import argparse
import timeit

import numpy as np

from pairdesign import _kernels_py
from pairdesign.model import orbit_indices, profile_codes

try:
    from pairdesign import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def cases():
    for K in (6, 7, 8):
        d = K // 2
        yield f"K={K} orbit d={d}", profile_codes(K), *orbit_indices(K, d)
    for K in (6, 7, 8):
        n = 2**K
        first = np.repeat(np.arange(n, dtype=np.int64), n)
        second = np.tile(np.arange(n, dtype=np.int64), n)
        yield f"K={K} all pairs", profile_codes(K), first, second


def best_of(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _kernels_c is None:
        print("compiled extension not built; only the numpy fallback is available")
    print(f"{'case':<22}{'pairs':>9}{'numpy ms':>11}{'cython ms':>11}{'speedup':>9}")
    for name, codes, first, second in cases():
        t_py = best_of(lambda: _kernels_py.pair_gram(codes, first, second), args.repeat)
        if _kernels_c is None:
            print(f"{name:<22}{len(first):>9}{t_py * 1e3:>11.3f}{'-':>11}{'-':>9}")
            continue
        assert np.array_equal(_kernels_c.pair_gram(codes, first, second), _kernels_py.pair_gram(codes, first, second))
        t_c = best_of(lambda: _kernels_c.pair_gram(codes, first, second), args.repeat)
        print(f"{name:<22}{len(first):>9}{t_py * 1e3:>11.3f}{t_c * 1e3:>11.3f}{t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
