"""Monte Carlo risk and coverage for the variance procedures.

Samples are X_1..X_n i.i.d. N(mu, 1), so sigma^2 = 1 and mu is mu/sigma.
Both functions use common random numbers across the compared rules.
"""

from __future__ import annotations

import numpy as np

from ..numkit import SeedSpec
from ..regions import cohen_multipliers, tate_klett_interval
from ..shrinkers import stein_variance_arr
from .engine import map_blocks, mean_se, proportion


def _draw(gen, n_rep, n, mu):
    data = mu + gen.standard_normal((n_rep, n))
    mean = data.mean(axis=1)
    ss = np.sum((data - mean[:, None]) ** 2, axis=1)
    return mean, ss


def stein_risk(n: int, mu: float, n_rep: int, seed: SeedSpec, workers=None) -> dict:
    """Scaled squared-error risk of Stein's estimator and of S^2/(n+1)."""

    def block(gen, m):
        mean, ss = _draw(gen, m, n, mu)
        ls = (stein_variance_arr(n, mean, ss) - 1.0) ** 2
        lu = (ss / (n + 1) - 1.0) ** 2
        d = ls - lu
        return [ls.sum(), (ls * ls).sum(), lu.sum(), (lu * lu).sum(), d.sum(), (d * d).sum()]

    s = map_blocks(block, n_rep, seed, workers)
    rs, rs_se = mean_se(s[0], s[1], n_rep)
    ru, ru_se = mean_se(s[2], s[3], n_rep)
    dm, dse = mean_se(s[4], s[5], n_rep)
    return {"mu": mu, "risk_stein": rs, "risk_stein_se": rs_se, "risk_usual": ru,
            "risk_usual_se": ru_se, "diff": dm, "diff_se": dse}


def cohen_coverage(n: int, alpha: float, k: float, a_prime: float, mu: float, n_rep: int,
                   seed: SeedSpec, workers=None) -> dict:
    """Coverage of sigma^2 = 1 by the Cohen interval and the Tate-Klett interval."""
    tk, shifted = cohen_multipliers(n, alpha, a_prime)

    def block(gen, m):
        mean, ss = _draw(gen, m, n, mu)
        use_tk = n * mean ** 2 / ss > k
        lo = np.where(use_tk, tk.lo, shifted.lo) * ss
        hi = np.where(use_tk, tk.hi, shifted.hi) * ss
        hit_c = (lo <= 1.0) & (1.0 <= hi)
        hit_tk = (tk.lo * ss <= 1.0) & (1.0 <= tk.hi * ss)
        return [hit_c.sum(), hit_tk.sum()]

    s = map_blocks(block, n_rep, seed, workers)
    est, se = proportion(s[0], n_rep)
    est_tk, se_tk = proportion(s[1], n_rep)
    return {"mu": mu, "k": k, "a_prime": a_prime, "coverage": est, "std_error": se,
            "coverage_tk": est_tk, "std_error_tk": se_tk}


def cohen_grid_search(n: int, alpha: float, k_grid, a_prime_factors, mu_grid, n_rep: int,
                      base_seed: int, workers=None) -> list[dict]:
    """Coverage of each (k, a') pair over the mu grid, with a pass flag at 3 SE.

    ``a_prime_factors`` multiply the Tate-Klett lower cutoff a.
    """
    a = tate_klett_interval(n, alpha).a
    rows = []
    for k in k_grid:
        for f in a_prime_factors:
            cells = [cohen_coverage(n, alpha, k, f * a, mu, n_rep, SeedSpec(base_seed, i), workers)
                     for i, mu in enumerate(mu_grid)]
            ok = all(c["coverage"] >= 1 - alpha - 3 * c["std_error"] for c in cells)
            rows.append({"k": k, "a_prime_factor": f, "a_prime": f * a, "cells": cells, "passes": ok})
    return rows
