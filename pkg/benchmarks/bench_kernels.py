"""Time the numba kernels against their numpy fallbacks.

Both flavours are called directly on the same inputs, so one process covers
both backends regardless of ``HIERCLUST_BACKEND``.  Results are checked for
agreement before timing.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""

import argparse
import time

import numpy as np

from hierclust import kernels
from hierclust._backend import HAVE_NUMBA
from hierclust.generators import euclidean_metric


def _best_of(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def cases(quick):
    small = 10 if quick else 14
    mid = 120 if quick else 300
    big = 400 if quick else 1500
    d_small = euclidean_metric(small, 1).dist
    d_mid = euclidean_metric(mid, 2).dist
    d_big = euclidean_metric(big, 3).dist
    ok = kernels.diameter_table(d_small) <= np.median(d_small)
    prio = np.arange(big, dtype=np.int64)
    return [
        ("diameter_table", f"n={small}", kernels._diameter_table_nb, kernels._diameter_table_np, (d_small,)),
        ("eccentricity_table", f"n={small}", kernels._eccentricity_table_nb,
         kernels._eccentricity_table_np, (d_small,)),
        ("min_partition", f"n={small}", kernels._min_partition_nb, kernels._min_partition_np, (ok,)),
        ("gonzales", f"n={big}", kernels._gonzales_nb, kernels._gonzales_np, (d_big, 0, prio, 1e-9)),
        ("complete_linkage", f"n={mid}", kernels._complete_linkage_nb,
         kernels._complete_linkage_np, (d_mid,)),
        ("triangle_scan", f"n={mid}", kernels._first_triangle_violation_nb,
         kernels._first_triangle_violation_np, (d_mid, 1e-9)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare against")

    print(f"{'kernel':<20}{'size':>8}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, size, nb, np_, args_ in cases(args.quick):
        nb(*args_)  # compile
        if not _same(nb(*args_), np_(*args_)):
            raise SystemExit(f"{name}: backends disagree")
        t_nb = _best_of(nb, args_, args.repeat)
        t_np = _best_of(np_, args_, args.repeat)
        print(f"{name:<20}{size:>8}{t_nb:>12.4g}{t_np:>12.4g}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
