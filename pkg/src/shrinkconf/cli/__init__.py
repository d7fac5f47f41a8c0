"""Command line front end: ``shrinkconf run|astar|walpha|tateklett``."""

from __future__ import annotations

import argparse
import os
import sys

from .plans import PlanError, SimulationPlan, parse_plan, serialize
from .runner import COLUMNS, execute_plan, run_plans
from .svg import render_svg

__all__ = ["PlanError", "SimulationPlan", "parse_plan", "serialize", "run_plans", "execute_plan",
           "render_svg", "COLUMNS", "main"]


def _cmd_run(args):
    try:
        with open(args.planfile, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read plan file: {exc}", file=sys.stderr)
        return 2
    try:
        plans = parse_plan(text)
    except PlanError as exc:
        for ln, msg in exc.errors:
            print(f"{args.planfile}:{ln}: {msg}", file=sys.stderr)
        return 2
    from ..evaluate.engine import default_workers
    workers = args.workers if args.workers is not None else default_workers()
    if "SS_WORKERS" in os.environ:
        workers = default_workers()
    return run_plans(plans, workers)


def _cmd_astar(args):
    from ..evaluate.solvers import astar_details
    r = astar_details(args.p, args.alpha)
    print(f"a*        {r.a:.17g}")
    print(f"residual  {r.residual:.3e}")
    print(f"a*/(p-2)  {r.ratio:.17g}")
    return 0


def _cmd_walpha(args):
    from ..evaluate.solvers import w_alpha_solve
    from ..regions import chi2_cutoff
    w = w_alpha_solve(args.t, args.p, args.alpha, args.a)
    print(f"w_alpha   {w:.17g}")
    print(f"c^2       {chi2_cutoff(args.p, args.alpha):.17g}")
    return 0


def _cmd_tateklett(args):
    from ..regions import equal_tails_interval, tate_klett_interval
    tk = tate_klett_interval(args.n, args.alpha)
    et = equal_tails_interval(args.n, args.alpha)
    print(f"a         {tk.a:.17g}")
    print(f"b         {tk.b:.17g}")
    print(f"interval  [S^2 * {tk.lo:.17g}, S^2 * {tk.hi:.17g}]")
    print(f"length    {tk.length:.17g} (equal tails {et.length:.17g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shrinkconf", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute a plan file")
    r.add_argument("planfile")
    r.add_argument("--workers", type=int, default=None, help="replication threads (SS_WORKERS overrides)")
    r.set_defaults(fn=_cmd_run)

    a = sub.add_parser("astar", help="optimal positive-part shrink constant")
    a.add_argument("-p", type=int, required=True)
    a.add_argument("-alpha", "--alpha", type=float, default=0.05)
    a.set_defaults(fn=_cmd_astar)

    w = sub.add_parser("walpha", help="exact 1 - alpha squared radius at |theta| = t")
    w.add_argument("-p", type=int, required=True)
    w.add_argument("-alpha", "--alpha", type=float, default=0.05)
    w.add_argument("-a", type=float, default=None, help="shrink constant (default p - 2)")
    w.add_argument("-t", type=float, default=0.0, help="|theta|")
    w.set_defaults(fn=_cmd_walpha)

    t = sub.add_parser("tateklett", help="shortest variance interval cutoffs")
    t.add_argument("-n", type=int, required=True)
    t.add_argument("-alpha", "--alpha", type=float, default=0.05)
    t.set_defaults(fn=_cmd_tateklett)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
