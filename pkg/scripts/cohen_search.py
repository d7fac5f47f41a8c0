"""Grid search for Cohen switch points k and shifts a'/a that keep the
variance interval at 1 - alpha across mu/sigma."""

import argparse

from shrinkconf.evaluate.variance import cohen_grid_search


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=10)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--k", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.5, 1.0, 2.0])
    ap.add_argument("--factors", type=float, nargs="+", default=[1.01, 1.02, 1.05, 1.2])
    ap.add_argument("--mu", type=float, nargs="+", default=[0.0, 0.25, 0.5, 1.0, 2.0])
    ap.add_argument("--n-rep", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=8)
    args = ap.parse_args()
    rows = cohen_grid_search(args.n, args.alpha, args.k, args.factors, args.mu, args.n_rep, args.seed)
    level = 1 - args.alpha
    for r in rows:
        worst = min(r["cells"], key=lambda c: c["coverage"])
        z = (worst["coverage"] - level) / worst["std_error"]
        print(f"k={r['k']:<5} a'={r['a_prime_factor']:.2f}a  min coverage {worst['coverage']:.5f} "
              f"at mu={worst['mu']}  (z={z:+7.2f})  {'pass' if r['passes'] else 'fail'}")


if __name__ == "__main__":
    main()
