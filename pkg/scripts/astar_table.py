"""Table of a* (best positive-part constant) against p - 2."""

import argparse
import time

from shrinkconf.evaluate.solvers import astar_details


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pmax", type=int, default=10)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.05, 0.1])
    args = ap.parse_args()
    print(f"{'p':>3} {'alpha':>6} {'a*':>20} {'a*/(p-2)':>10} {'residual':>10}")
    t0 = time.perf_counter()
    for alpha in args.alphas:
        for p in range(3, args.pmax + 1):
            r = astar_details(p, alpha)
            print(f"{p:3d} {alpha:6.3f} {r.a:20.16f} {r.ratio:10.6f} {r.residual:10.2e}")
    print(f"# {time.perf_counter() - t0:.3f} s")


if __name__ == "__main__":
    main()
