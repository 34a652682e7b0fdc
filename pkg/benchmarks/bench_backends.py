"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_backends.py [--sizes 256,512,1024,2048] [--reps 5]
"""

import argparse

from softsrocc import kernels
from softsrocc.bench import compare_backends


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="256,512,1024,2048")
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--k", type=float, default=10.0)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = compare_backends(sizes, args.reps, args.k)
    print(f"backends: {', '.join(kernels.available_backends())}")
    print(f"{'backend':>8} {'n':>6} {'soft_rank ms':>13} {'vjp ms':>9} {'margin ms':>10}")
    for r in rows:
        print(f"{r['backend']:>8} {r['n']:>6} {r['soft_rank_ns'] / 1e6:>13.3f} "
              f"{r['soft_rank_vjp_ns'] / 1e6:>9.3f} {r['margin_ns'] / 1e6:>10.3f}")
    by = {(r["backend"], r["n"]): r for r in rows}
    if "numba" in kernels.available_backends():
        for n in sizes:
            a, b = by[("numpy", n)], by[("numba", n)]
            print(f"n={n}: numba speedup soft_rank x{a['soft_rank_ns'] / b['soft_rank_ns']:.1f}, "
                  f"margin x{a['margin_ns'] / b['margin_ns']:.1f}")


if __name__ == "__main__":
    main()
