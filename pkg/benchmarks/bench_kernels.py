"""Compare the numba and numpy kernels on subset transforms and pairwise products.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat 5]``
"""

import argparse
import timeit

import numpy as np

from beliefkit import _kernels as k


def best_of(fn, repeat: int) -> float:
    fn()  # warm-up (includes compilation for numba)
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    if not k.HAVE_NUMBA:
        print("numba is not installed; only the numpy kernels are available")
        return

    print(f"{'kernel':<28}{'size':>10}{'numpy [ms]':>14}{'numba [ms]':>14}{'speed-up':>10}")
    for bits in (10, 14, 18, 20):
        v = rng.random(1 << bits)
        np.testing.assert_allclose(k.zeta_subset_numba(v), k.zeta_subset_numpy(v), rtol=1e-12)
        for name in ("zeta_subset", "mobius_superset"):
            a = getattr(k, f"{name}_numpy")
            b = getattr(k, f"{name}_numba")
            ta = best_of(lambda: a(v), args.repeat)
            tb = best_of(lambda: b(v), args.repeat)
            print(f"{name:<28}{'2^' + str(bits):>10}{1e3 * ta:>14.3f}{1e3 * tb:>14.3f}{ta / tb:>10.1f}")

    for n_focal in (64, 512, 2048):
        am = rng.integers(1, 1 << 20, n_focal)
        bm = rng.integers(1, 1 << 20, n_focal)
        aw = rng.random(n_focal)
        bw = rng.random(n_focal)
        for mode, label in ((k.MODE_AND, "and"), (k.MODE_DUBOIS, "dubois")):
            ref = k.pair_products_numpy(am, aw, bm, bw, mode)
            got = k.pair_products_numba(am, aw, bm, bw, mode)
            np.testing.assert_array_equal(ref[0], got[0])
            ta = best_of(lambda: k.pair_products_numpy(am, aw, bm, bw, mode), args.repeat)
            tb = best_of(lambda: k.pair_products_numba(am, aw, bm, bw, mode), args.repeat)
            name = f"pair_products[{label}]"
            print(f"{name:<28}{f'{n_focal}x{n_focal}':>10}{1e3 * ta:>14.3f}{1e3 * tb:>14.3f}{ta / tb:>10.1f}")


if __name__ == "__main__":
    main()
