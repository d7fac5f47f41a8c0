"""Plan execution and CSV output.

CSV columns (fixed order)::

    plan_id, procedure, p, alpha, param_json, theta_norm, method,
    coverage, std_error, n_rep, seed, volume_ratio

* region plans: one row per (theta_norm, method). Quadrature rows have
  std_error 0 and n_rep 0. ``volume_ratio`` is E[(r^2/c^2)^(p/2)] from the
  MC draws for explicit spheres, else empty.
* variance plans: ``theta_norm`` holds mu/sigma and ``p`` is empty (n is in
  param_json); ``coverage`` is that of sigma^2 = 1.
* selection plans: one row per selected rank plus a ``joint`` row for the
  simultaneous rectangle; ``theta_norm`` is empty and the rank sits in
  param_json.

Grid point i of a plan draws from ``SeedSpec(seed, i)``; the selection plan
uses stream 0.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys

from ..numkit import SeedSpec
from ..evaluate.montecarlo import CoverageCurve, mc_coverage_many
from ..evaluate.quadrature import quad_coverage
from ..evaluate.variance import cohen_coverage
from ..regions import default_a_prime
from ..selection import run_scenario
from .plans import scenario_from_plan
from .svg import render_svg

COLUMNS = ("plan_id", "procedure", "p", "alpha", "param_json", "theta_norm", "method",
           "coverage", "std_error", "n_rep", "seed", "volume_ratio")


def fmt_num(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, (bool,)):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def _param_json(d) -> str:
    def conv(v):
        if isinstance(v, float):
            return float(format(v, ".17g"))
        if isinstance(v, tuple):
            return [conv(x) for x in v]
        return v
    return json.dumps({k: conv(v) for k, v in sorted(d.items())}, sort_keys=True, separators=(",", ":"))


def _row(plan, params, theta, method, cov, se, n_rep, vr=None):
    return {
        "plan_id": plan.plan_id, "procedure": plan.procedure,
        "p": "" if plan.kind == "variance" else fmt_num(plan.p),
        "alpha": fmt_num(plan.alpha), "param_json": _param_json(params),
        "theta_norm": fmt_num(theta), "method": method, "coverage": fmt_num(cov),
        "std_error": fmt_num(se), "n_rep": fmt_num(n_rep), "seed": fmt_num(plan.seed),
        "volume_ratio": fmt_num(vr),
    }


def execute_plan(plan, workers=None):
    """Rows (dicts of strings) and CoverageCurves for one plan."""
    rows, curves = [], []
    if plan.kind == "region":
        proc = plan.build()
        params = proc.params
        by_method = {m: ([], []) for m in plan.methods()}
        for i, t in enumerate(plan.theta_grid):
            for m in plan.methods():
                if m == "mc":
                    r = mc_coverage_many([proc], t, plan.n_rep, SeedSpec(plan.seed, i), workers)["procedures"][0]
                    rows.append(_row(plan, params, t, "mc", r["estimate"], r["std_error"], plan.n_rep,
                                     r.get("volume_ratio")))
                    est, se = r["estimate"], r["std_error"]
                else:
                    est, se = quad_coverage(proc, t, plan.p), 0.0
                    rows.append(_row(plan, params, t, "quadrature", est, 0.0, 0))
                by_method[m][0].append(min(max(est, 0.0), 1.0))
                by_method[m][1].append(se)
        for m, (est, se) in by_method.items():
            curves.append(CoverageCurve(f"{plan.plan_id}:{proc.id}", list(plan.theta_grid), est, se, m,
                                        plan.n_rep if m == "mc" else 0, plan.alpha, params))
    elif plan.kind == "variance":
        kw = plan.param_dict
        n = kw["n"]
        k = kw.get("k", 0.1)
        a_prime = kw["a_prime"] if "a_prime" in kw else default_a_prime(n, plan.alpha)
        params = {"n": n} if plan.procedure == "tate_klett" else {"n": n, "k": k, "a_prime": a_prime}
        est_l, se_l = [], []
        for i, mu in enumerate(plan.theta_grid):
            r = cohen_coverage(n, plan.alpha, k, a_prime, mu, plan.n_rep, SeedSpec(plan.seed, i), workers)
            if plan.procedure == "tate_klett":
                est, se = r["coverage_tk"], r["std_error_tk"]
            else:
                est, se = r["coverage"], r["std_error"]
            rows.append(_row(plan, params, mu, "mc", est, se, plan.n_rep))
            est_l.append(est)
            se_l.append(se)
        curves.append(CoverageCurve(f"{plan.plan_id}:{plan.procedure}", list(plan.theta_grid), est_l, se_l,
                                    "mc", plan.n_rep, plan.alpha, params))
    else:
        sc = scenario_from_plan(plan)
        rule = plan.param_dict.get("rule", "naive")
        res = run_scenario(sc, rule, plan.n_rep, SeedSpec(plan.seed, 0), workers)
        base = {"mu": sc.mu, "tau2": sc.tau2, "rule": rule, "bonferroni": sc.bonferroni,
                "level_alpha": sc.level_alpha}
        for r in res.per_rank:
            rows.append(_row(plan, {**base, "rank": r["rank"], "mean_half_width": r["mean_half_width"]},
                             None, "mc", r["coverage"], r["std_error"], plan.n_rep))
        rows.append(_row(plan, {**base, "rank": "joint", "ranks": sc.ranks}, None, "mc",
                         res.simultaneous, res.simultaneous_se, plan.n_rep))
    return rows, curves


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _atomic_write(path, text):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _remove(path):
    try:
        os.remove(path)
    except FileNotFoundError:
        pass


def run_plans(plans, worker_count=None, base_dir=None, log=sys.stderr) -> int:
    """Run every plan and write its outputs; returns the exit status.

    Plans sharing a csv (or svg) path are written to one file in plan order.
    A file is written only when every plan feeding it succeeded; otherwise any
    stale copy is removed. Status 0 means every plan ran and every output was
    written, 1 otherwise.
    """
    def resolve(path):
        return path if base_dir is None or os.path.isabs(path) else os.path.join(base_dir, path)

    results, failed = {}, set()
    for plan in plans:
        try:
            results[plan.plan_id] = execute_plan(plan, worker_count)
            print(f"plan {plan.plan_id}: ok", file=log)
        except Exception as exc:  # reported, then the plan's outputs are dropped
            failed.add(plan.plan_id)
            print(f"plan {plan.plan_id}: FAILED: {type(exc).__name__}: {exc}", file=log)

    csv_groups, svg_groups = {}, {}
    for plan in plans:
        csv_groups.setdefault(resolve(plan.csv), []).append(plan)
        if plan.svg:
            svg_groups.setdefault(resolve(plan.svg), []).append(plan)

    status = 1 if failed else 0
    written = []
    for path, group in csv_groups.items():
        if any(pl.plan_id in failed for pl in group):
            _remove(path)
            continue
        try:
            _atomic_write(path, rows_to_csv([r for pl in group for r in results[pl.plan_id][0]]))
            written.append(path)
        except OSError as exc:
            print(f"cannot write {path}: {exc}", file=log)
            status = 1
    for path, group in svg_groups.items():
        if any(pl.plan_id in failed for pl in group):
            _remove(path)
            continue
        curves = [c for pl in group for c in results[pl.plan_id][1]]
        try:
            if not curves:
                raise ValueError("no coverage curves to plot")
            d = os.path.dirname(path)
            if d:
                os.makedirs(d, exist_ok=True)
            render_svg(curves, path)
            written.append(path)
        except (OSError, ValueError) as exc:
            _remove(path)
            print(f"cannot write {path}: {exc}", file=log)
            status = 1
    return status
