"""Coverage of intervals for the mean behind the largest observation."""

import argparse

from shrinkconf.numkit import SeedSpec
from shrinkconf.selection import SelectionScenario, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-p", type=int, default=100)
    ap.add_argument("--tau2", type=float, nargs="+", default=[0.0, 0.25, 1.0, 4.0])
    ap.add_argument("--n-rep", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=9)
    args = ap.parse_args()
    for tau2 in args.tau2:
        sc = SelectionScenario(args.p, tau2=tau2, ranks=(args.p,))
        for rule in ("naive", "he_selected"):
            res = run_scenario(sc, rule, args.n_rep, SeedSpec(args.seed, 0))
            r = res.per_rank[0]
            print(f"tau2={tau2:5.2f} {rule:12s} coverage={r['coverage']:.5f} +- {r['std_error']:.5f} "
                  f"mean half width={r['mean_half_width']:.4f}")


if __name__ == "__main__":
    main()
