"""Coverage of the usual, positive-part (a*) and empirical Bayes spheres
against |theta|, by quadrature and Monte Carlo; writes an SVG."""

import argparse
import math

from shrinkconf import regions as rg
from shrinkconf.cli import render_svg
from shrinkconf.evaluate.montecarlo import CoverageCurve, mc_curve
from shrinkconf.evaluate.quadrature import quad_coverage
from shrinkconf.evaluate.solvers import astar_solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-p", type=int, default=5)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--n-rep", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--svg", default="coverage_curves.svg")
    args = ap.parse_args()

    p, alpha = args.p, args.alpha
    c = math.sqrt(rg.chi2_cutoff(p, alpha))
    grid = [c * f for f in (0, 0.25, 0.5, 0.75, 1, 1.25, 1.5, 2, 3, 5)]
    procs = [rg.PosPart(p, alpha, astar_solve(p, alpha)), rg.EmpiricalBayes(p, alpha)]
    curves = []
    for k, proc in enumerate(procs):
        q = [quad_coverage(proc, t, p) for t in grid]
        curves.append(CoverageCurve(proc.id, grid, q, [0.0] * len(grid), "quadrature", 0, alpha, proc.params))
        curves.append(mc_curve(proc, grid, args.n_rep, args.seed + k))
    for i, t in enumerate(grid):
        cells = "  ".join(f"{cv.procedure_id}/{cv.method[:4]}={cv.estimates[i]:.5f}" for cv in curves)
        print(f"|theta|/c={t / c:5.2f}  {cells}")
    render_svg(curves, args.svg)
    print(f"# wrote {args.svg}")


if __name__ == "__main__":
    main()
