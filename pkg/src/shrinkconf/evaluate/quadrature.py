"""Deterministic coverage of rotation-invariant recentered spheres.

For a set ``{theta: |theta - g(|x|^2) x|^2 <= r2(|x|^2)}`` and theta = t e1,
write x = theta + z with z1 the component along theta and w = |z_perp|^2 ~
chi2_{p-1}. Then |x|^2 = (t + z1)^2 + w and

    |theta - g x|^2 = t^2 - 2 g t (t + z1) + g^2 |x|^2.

For each z1 the set of w where membership holds is a union of intervals.
Their endpoints are bracketed on a w-grid and refined by bisection, and the
chi-square mass of each interval is taken from the exact CDF. The outer z1
integral uses adaptive composite Gauss-Legendre panels against the normal
density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import numkit


@dataclass(frozen=True)
class QuadratureSpec:
    n_z: int = 96  # initial Gauss-Legendre panels on the z1 axis
    n_w: int = 256  # bracketing grid points on the w axis
    z_cut: float = 8.0
    target_abs_err: float = 1e-5
    order: int = 8  # nodes per panel (the check rule uses 2 * order)
    max_depth: int = 30

    def __post_init__(self):
        if self.n_z < 16 or self.n_w < 16:
            raise ValueError("n_z and n_w must be >= 16")
        if self.z_cut < 6:
            raise ValueError("z_cut must be >= 6")


@dataclass(frozen=True)
class SphereRule:
    """Ad hoc center-factor / squared-radius pair for :func:`quad_coverage`."""

    gamma: object
    rho2: object
    breaks: tuple = ()

    def center_factor(self, s):
        return self.gamma(np.asarray(s, float))

    def radius2_of(self, s):
        return self.rho2(np.asarray(s, float))

    def breakpoints(self):
        return list(self.breaks)


def _w_grid(p, n_w):
    w_max = numkit.chi2_quantile(1.0 - 1e-15, p - 1)
    k = np.arange(n_w + 1) / n_w
    w = w_max * k * k
    return w, numkit.chi2_cdf(w, p - 1), w_max


def _conditional_coverage(z, t, rule, p, wgrid, fgrid, w_max):
    """P(theta in C | z1 = z) for an array of z values."""
    u = t + z
    u2 = u * u
    n = z.shape[0]
    bps = [float(b) for b in rule.breakpoints()]
    w = np.broadcast_to(wgrid, (n, wgrid.size))
    f = np.broadcast_to(fgrid, (n, fgrid.size))
    if bps:
        extra = np.clip(np.stack([b - u2 for b in bps], axis=1), 0.0, w_max)
        w = np.concatenate([w, extra], axis=1)
        f = np.concatenate([f, numkit.chi2_cdf(extra, p - 1)], axis=1)
        order = np.argsort(w, axis=1, kind="stable")
        w = np.take_along_axis(w, order, axis=1)
        f = np.take_along_axis(f, order, axis=1)

    def h(wv, uu, uu2):
        s = uu2 + wv
        g = rule.center_factor(s)
        return rule.radius2_of(s) - (t * t - 2.0 * g * t * uu + g * g * s)

    inside = h(w, u[:, None], u2[:, None]) >= 0
    fl, fr = f[:, :-1], f[:, 1:]
    total = np.sum(np.where(inside[:, :-1] & inside[:, 1:], fr - fl, 0.0), axis=1)

    rows, cols = np.nonzero(inside[:, :-1] != inside[:, 1:])
    if rows.size:
        lo = w[rows, cols].copy()
        hi = w[rows, cols + 1].copy()
        left_in = inside[rows, cols]
        uu, uu2 = u[rows], u2[rows]
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            m_in = h(mid, uu, uu2) >= 0
            same = m_in == left_in
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
            if np.all(hi - lo <= 1e-14 * np.maximum(hi, 1.0)):
                break
        froot = numkit.chi2_cdf(0.5 * (lo + hi), p - 1)
        part = np.where(left_in, froot - f[rows, cols], f[rows, cols + 1] - froot)
        np.add.at(total, rows, part)
    return total


def quad_coverage(rule, theta_norm: float, p: int, spec: QuadratureSpec | None = None) -> float:
    """Coverage probability at |theta| = ``theta_norm`` of the sphere described by ``rule``.

    ``rule`` needs ``center_factor(s)``, ``radius2_of(s)`` and
    ``breakpoints()`` with ``s = |x|^2``; every
    :class:`~shrinkconf.regions.SphereProcedure` qualifies.
    """
    if p < 2:
        raise ValueError("quad_coverage needs p >= 2 (p = 1 has no orthogonal chi-square part)")
    if not all(hasattr(rule, m) for m in ("center_factor", "radius2_of", "breakpoints")):
        raise TypeError("quad_coverage only handles explicit recentered spheres")
    spec = spec or QuadratureSpec()
    t = float(theta_norm)
    wgrid, fgrid, w_max = _w_grid(p, spec.n_w)

    x1, w1 = np.polynomial.legendre.leggauss(spec.order)
    x2, w2 = np.polynomial.legendre.leggauss(2 * spec.order)
    edges = np.linspace(-spec.z_cut, spec.z_cut, spec.n_z + 1)
    a, b = edges[:-1], edges[1:]
    total = 0.0
    span = 2.0 * spec.z_cut
    for depth in range(spec.max_depth + 1):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        z1 = (mid[:, None] + half[:, None] * x1[None, :]).ravel()
        z2 = (mid[:, None] + half[:, None] * x2[None, :]).ravel()
        zz = np.concatenate([z1, z2])
        vals = _conditional_coverage(zz, t, rule, p, wgrid, fgrid, w_max)
        vals = vals * np.exp(-0.5 * zz * zz) / math.sqrt(2 * math.pi)
        v1 = vals[: z1.size].reshape(-1, spec.order)
        v2 = vals[z1.size:].reshape(-1, 2 * spec.order)
        i1 = half * (v1 @ w1)
        i2 = half * (v2 @ w2)
        tol = 1e-3 * spec.target_abs_err * (b - a) / span
        ok = np.abs(i2 - i1) <= np.maximum(tol, 1e-16)
        if depth == spec.max_depth:
            ok[:] = True
        total += float(np.sum(i2[ok]))
        if ok.all():
            break
        a_bad, b_bad = a[~ok], b[~ok]
        m_bad = 0.5 * (a_bad + b_bad)
        a = np.concatenate([a_bad, m_bad])
        b = np.concatenate([m_bad, b_bad])
    return min(max(total, 0.0), 1.0)
