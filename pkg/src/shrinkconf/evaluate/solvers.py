"""Root solvers for the shrink bound a*, the exact-coverage cutoff w(t), and
finite-difference scans of coverage in the shrink constant."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..regions import PosPart, chi2_cutoff
from .quadrature import QuadratureSpec, SphereRule, quad_coverage
from ..shrinkers import pospart_factor


class BracketError(ArithmeticError):
    pass


def astar_equation(a, p: int, c2: float) -> float:
    """Log form of ((c^2 + sqrt(c^2 + a))/a)^(p-2) exp(-c sqrt(a)) = 1."""
    c = math.sqrt(c2)
    return (p - 2) * math.log((c2 + math.sqrt(c2 + a)) / a) - c * math.sqrt(a)


@dataclass(frozen=True)
class AStar:
    a: float
    p: int
    alpha: float
    residual: float  # |LHS - 1| of the multiplicative form

    @property
    def ratio(self) -> float:
        return self.a / (self.p - 2)


def astar_solve(p: int, alpha: float) -> float:
    return astar_details(p, alpha).a


def astar_details(p: int, alpha: float) -> AStar:
    if p < 3:
        raise ValueError("a* is defined for p >= 3")
    c2 = chi2_cutoff(p, alpha)
    lo, hi = 1e-8, 8.0 * (p - 2)
    glo, ghi = astar_equation(lo, p, c2), astar_equation(hi, p, c2)
    if not (glo > 0 > ghi):
        raise BracketError(f"a* bracket failed: g({lo}) = {glo}, g({hi}) = {ghi}")
    a = brentq(astar_equation, lo, hi, args=(p, c2), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    g = astar_equation(a, p, c2)
    return AStar(a=a, p=p, alpha=alpha, residual=abs(math.expm1(g)))


def pospart_rule(p: int, alpha: float, a: float, radius2: float | None = None) -> SphereRule:
    c2 = chi2_cutoff(p, alpha) if radius2 is None else radius2
    return SphereRule(
        gamma=lambda s: pospart_factor(s, a),
        rho2=lambda s: np.full_like(s, c2),
        breaks=(a,) if a > 0 else (),
    )


def coverage_derivative_scan(p: int, alpha: float, a_grid, t_grid, spec: QuadratureSpec | None = None,
                             step: float | None = None) -> list[dict]:
    """Central differences of the positive-part sphere's coverage in ``a``."""
    spec = spec or QuadratureSpec()
    rows = []
    for a in a_grid:
        h = step if step is not None else min(1e-2, 0.5 * a)
        for t in t_grid:
            up = quad_coverage(PosPart(p, alpha, a + h), t, p, spec)
            dn = quad_coverage(PosPart(p, alpha, a - h), t, p, spec)
            d = (up - dn) / (2 * h)
            rows.append({"a": float(a), "t": float(t), "step": h, "derivative": d,
                         "sign": int(np.sign(d))})
    return rows


@dataclass(frozen=True)
class WAlpha:
    w0: float
    w2: float
    w2_refined: float  # Richardson cross-check from steps h and h/2
    step: float


def w_alpha_solve(theta_norm: float, p: int, alpha: float, a: float | None = None,
                  spec: QuadratureSpec | None = None, tol: float = 1e-11) -> float:
    """Squared radius w with coverage 1 - alpha at |theta| = theta_norm for the
    positive-part-centered sphere."""
    if p < 3:
        raise ValueError("w_alpha_solve needs p >= 3")
    spec = spec or QuadratureSpec()
    a = float(p - 2) if a is None else float(a)
    c2 = chi2_cutoff(p, alpha)
    if a == 0:
        return c2
    target = 1.0 - alpha

    def cov(w):
        return quad_coverage(pospart_rule(p, alpha, a, w), theta_norm, p, spec)

    lo, hi = 1e-9, 4.0 * c2
    if not (cov(lo) < target < cov(hi)):
        raise BracketError("w_alpha bracket (0, 4 c^2] does not contain the 1 - alpha crossing")
    # coverage is increasing in w: plain bisection
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if cov(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def w_alpha_taylor(p: int, alpha: float, a: float | None = None, spec: QuadratureSpec | None = None,
                   step: float = 0.1) -> WAlpha:
    """w(0) and w''(0), using the even extension of w in |theta| (w'(0) = 0)."""
    w0 = w_alpha_solve(0.0, p, alpha, a, spec)
    wh = w_alpha_solve(step, p, alpha, a, spec)
    wh2 = w_alpha_solve(step / 2, p, alpha, a, spec)
    d_h = 2.0 * (wh - w0) / step ** 2
    d_h2 = 2.0 * (wh2 - w0) / (step / 2) ** 2
    # second-difference error is O(h^2)
    refined = (4.0 * d_h2 - d_h) / 3.0
    return WAlpha(w0=w0, w2=d_h, w2_refined=refined, step=step)
