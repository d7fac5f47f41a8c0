"""Monte Carlo coverage estimators.

Every estimator takes a :class:`~shrinkconf.numkit.SeedSpec` and is a
deterministic function of it; the replication loop runs through
:func:`~shrinkconf.evaluate.engine.map_blocks`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numkit import SeedSpec
from ..regions import ConfigurationError, HeInterval, RegionProcedure, normal_cutoff
from ..shrinkers import he_shrink_factor_M, pospart_factor
from .engine import map_blocks, mean_se, proportion


@dataclass
class CoverageCurve:
    procedure_id: str
    theta_norms: list
    estimates: list
    std_errors: list
    method: str  # "mc" or "quadrature"
    n_rep: int = 0
    alpha: float = 0.05
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.theta_norms) == len(self.estimates) == len(self.std_errors)):
            raise ValueError("curve arrays must have equal length")
        if any(not 0.0 <= e <= 1.0 for e in self.estimates):
            raise ValueError("coverage estimates must lie in [0, 1]")


def _theta(theta_norm, p):
    theta = np.zeros(p)
    theta[0] = theta_norm
    return theta


def mc_coverage_many(procs, theta_norm: float, n_rep: int, seed: SeedSpec, workers=None) -> dict:
    """Coverage of several procedures on common random numbers.

    Returns per-procedure ``(estimate, se)``, per-procedure mean volume
    ratio against the usual sphere for explicit procedures, and paired
    differences against the first procedure with their standard errors.
    """
    procs = list(procs)
    p = procs[0].p
    if any(pr.p != p for pr in procs):
        raise ValueError("procedures compared on common draws must share p")
    theta = _theta(theta_norm, p)
    m = len(procs)

    def block(gen, n):
        x = theta + gen.standard_normal((n, p))
        hits = np.stack([np.asarray(pr.member(theta, x), dtype=float) for pr in procs])
        out = [hits.sum(axis=1)]
        d = hits - hits[0]
        out += [d.sum(axis=1), (d * d).sum(axis=1)]
        vr = np.zeros((m, n))
        for i, pr in enumerate(procs):
            if pr.explicit:
                r2 = pr.radius2_of(np.sum(x * x, axis=1))
                vr[i] = (r2 / pr.c2) ** (p / 2.0)
        out += [vr.sum(axis=1), (vr * vr).sum(axis=1)]
        return np.concatenate(out)

    sums = map_blocks(block, n_rep, seed, workers).reshape(5, m)
    result = {"theta_norm": float(theta_norm), "n_rep": n_rep, "procedures": []}
    for i, pr in enumerate(procs):
        est, se = proportion(sums[0, i], n_rep)
        dm, dse = mean_se(sums[1, i], sums[2, i], n_rep)
        row = {"id": pr.id, "estimate": est, "std_error": se, "diff_vs_first": dm, "diff_se": dse}
        if pr.explicit:
            vm, vse = mean_se(sums[3, i], sums[4, i], n_rep)
            row["volume_ratio"] = vm
            row["volume_ratio_se"] = vse
        result["procedures"].append(row)
    return result


def mc_coverage(proc: RegionProcedure, theta_norm: float, n_rep: int, seed: SeedSpec,
                workers=None) -> tuple[float, float]:
    """Coverage at theta = theta_norm * e1; by rotation invariance this is the
    coverage at every theta of that norm."""
    row = mc_coverage_many([proc], theta_norm, n_rep, seed, workers)["procedures"][0]
    return row["estimate"], row["std_error"]


def mc_curve(proc: RegionProcedure, theta_grid, n_rep: int, base_seed: int, workers=None) -> CoverageCurve:
    est, se = [], []
    for i, t in enumerate(theta_grid):
        e, s = mc_coverage(proc, t, n_rep, SeedSpec(base_seed, i), workers)
        est.append(e)
        se.append(s)
    return CoverageCurve(proc.id, list(map(float, theta_grid)), est, se, "mc", n_rep, proc.alpha,
                         proc.params)


def mc_risk(estimator, p: int, theta_norm: float, n_rep: int, seed: SeedSpec, workers=None):
    """E|delta(X) - theta|^2 with its standard error."""
    theta = _theta(theta_norm, p)

    def block(gen, n):
        x = theta + gen.standard_normal((n, p))
        loss = np.sum((estimator(x) - theta) ** 2, axis=1)
        return [loss.sum(), (loss * loss).sum()]

    s = map_blocks(block, n_rep, seed, workers)
    return mean_se(s[0], s[1], n_rep)


# --- empirical Bayes (Morris) coverage --------------------------------------

def _coord_interval(rule, x, j, alpha):
    """(center, squared half-width) of the interval for coordinate(s) j."""
    p = x.shape[1]
    rows = np.arange(x.shape[0])
    xj = x[rows, j]
    c = normal_cutoff(alpha)
    if rule == "naive":
        return xj, np.full_like(xj, c * c)
    if rule in ("he", "he_selected"):
        if p < 3:
            raise ConfigurationError("He interval needs p >= 3")
        if c <= 1:
            raise ConfigurationError("He interval needs c > 1")
        s = np.sum(x * x, axis=1)
        m = he_shrink_factor_M(s, p)
        return pospart_factor(s, p - 2) * xj, m * (c * c - np.log(m))
    raise ConfigurationError(f"unknown interval rule {rule!r}; valid: naive, he")


def eb_bayes_coverage(interval_rule: str, p: int, alpha: float, tau2: float, mu: float,
                      n_rep: int, seed: SeedSpec, workers=None) -> tuple[float, float]:
    """Bayes coverage of coordinate 1 under theta_i ~ N(mu, tau2), X_i ~ N(theta_i, 1)."""
    if not tau2 > 0:
        raise ValueError("tau2 must be positive")
    sd = np.sqrt(tau2)

    def block(gen, n):
        theta = mu + sd * gen.standard_normal((n, p))
        x = theta + gen.standard_normal((n, p))
        center, r2 = _coord_interval(interval_rule, x, np.zeros(n, dtype=int), alpha)
        return np.sum((theta[:, 0] - center) ** 2 <= r2)

    hits = map_blocks(block, n_rep, seed, workers)[0]
    return proportion(hits, n_rep)


# --- selected means ----------------------------------------------------------

def selection_block_sums(theta, x, ranks, rule: str, alpha: float) -> np.ndarray:
    """Sums over the rows of (theta, x): per-rank hits, per-rank half-widths,
    joint hits, and the unselected coverage averaged over coordinates.

    Ranks are 1-based positions in the ascending order statistics of each
    row of ``x``; ties go to the lowest index.
    """
    n, p = x.shape
    k = len(ranks)
    order = np.argsort(x, axis=1, kind="stable")
    rows = np.arange(n)
    per = np.zeros(k)
    half = np.zeros(k)
    all_in = np.ones(n, dtype=bool)
    for i, r in enumerate(ranks):
        j = order[:, r - 1]
        center, r2 = _coord_interval(rule, x, j, alpha)
        hit = (theta[rows, j] - center) ** 2 <= r2
        per[i] = hit.sum()
        half[i] = np.sqrt(r2).sum()
        all_in &= hit
    cover_all = 0.0
    for j in range(p):
        cj, r2j = _coord_interval(rule, x, np.full(n, j), alpha)
        cover_all += np.sum((theta[:, j] - cj) ** 2 <= r2j)
    return np.concatenate([per, half, [all_in.sum(), cover_all / p]])


def selection_sums(p: int, mu: float, tau2: float, ranks, rule: str, alpha: float, n_rep: int,
                   seed: SeedSpec, workers=None) -> dict:
    """Hit counts for theta_(r) at each rank r, joint coverage, and widths.

    ``alpha`` is the per-coordinate level. See :func:`selection_block_sums`.
    """
    ranks = [int(r) for r in ranks]
    if any(not 1 <= r <= p for r in ranks):
        raise ValueError("ranks must lie in [1, p]")
    sd = np.sqrt(tau2)
    k = len(ranks)

    def block(gen, n):
        theta = mu + sd * gen.standard_normal((n, p))
        x = theta + gen.standard_normal((n, p))
        return selection_block_sums(theta, x, ranks, rule, alpha)

    s = map_blocks(block, n_rep, seed, workers)
    return {
        "ranks": ranks,
        "hits": s[:k],
        "half_width_sum": s[k:2 * k],
        "joint_hits": s[2 * k],
        "bayes_hits": s[2 * k + 1],
        "n_rep": n_rep,
    }


def selection_coverage(p: int, mu: float, tau2: float, rank: int, interval_rule: str, alpha: float,
                       n_rep: int, seed: SeedSpec, workers=None) -> tuple[float, float]:
    """Bayes coverage of theta_(rank), the mean behind the rank-th smallest observation."""
    s = selection_sums(p, mu, tau2, [rank], interval_rule, alpha, n_rep, seed, workers)
    return proportion(s["hits"][0], n_rep)
