"""Volumes of explicit spheres and hit-or-miss volumes of implicit sets."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ..numkit import SeedSpec, std_normal_sample
from ..regions import RegionProcedure
from .engine import map_blocks, mean_se, proportion


class UnboundedRegionError(ArithmeticError):
    pass


def volume_sphere(radius2, p: int):
    radius2 = np.asarray(radius2, float)
    if np.any(radius2 <= 0):
        raise ValueError("radius2 must be positive")
    logv = 0.5 * p * math.log(math.pi) - gammaln(0.5 * p + 1) + 0.5 * p * np.log(radius2)
    out = np.exp(logv)
    return float(out) if out.ndim == 0 else out


def radial_extent(proc: RegionProcedure, x, directions, cap: float, iters: int = 60) -> np.ndarray:
    """Boundary distance from ``proc.anchor(x)`` along each unit direction."""
    x = np.asarray(x, float)
    center = proc.anchor(x)
    if not proc.member(center, x):
        raise UnboundedRegionError("radial scan anchor is not inside the region")
    d = np.asarray(directions, float)
    far = proc.member(center + cap * d, x)
    if np.any(far):
        raise UnboundedRegionError(
            f"region reaches the bracket cap {cap:.3g} in {int(np.sum(far))} probe direction(s)")
    lo = np.zeros(d.shape[0])
    hi = np.full(d.shape[0], cap)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = proc.member(center + mid[:, None] * d, x)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def _probe_directions(p, seed, extra=10):
    eye = np.eye(p)
    rng = seed.block_generator(2**32 - 1)
    r = rng.standard_normal((extra, p))
    r /= np.linalg.norm(r, axis=1, keepdims=True)
    return np.concatenate([eye, -eye, r])


def volume_mc(proc: RegionProcedure, x, n_rep: int, seed: SeedSpec, margin: float = 1.25,
              workers=None) -> tuple[float, float]:
    """Hit-or-miss volume inside a bounding ball around the region's anchor.

    The ball radius is ``margin`` times the largest boundary distance over
    2p + 10 probe directions; a hit in the outer 2% of the ball means the
    bound was too tight and raises.
    """
    x = np.asarray(getattr(x, "x", x), float)
    p = x.shape[-1]
    cap = 10.0 * math.sqrt(proc.c2)
    ext = radial_extent(proc, x, _probe_directions(p, seed), cap)
    R = margin * float(ext.max())
    center = proc.anchor(x)

    def block(gen, n):
        d = gen.standard_normal((n, p))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = R * gen.random(n) ** (1.0 / p)
        hit = np.asarray(proc.member(center + r[:, None] * d, x), bool)
        return [hit.sum(), np.sum(hit & (r > 0.98 * R))]

    s = map_blocks(block, n_rep, seed, workers)
    if s[1] > 0:
        raise UnboundedRegionError("hits at the bounding ball edge: bound too tight")
    frac, se = proportion(s[0], n_rep)
    vb = volume_sphere(R * R, p)
    return vb * frac, vb * se


def expected_volume(proc: RegionProcedure, theta_norm: float, n_rep: int, seed: SeedSpec,
                    tau2: float | None = None, inner_rep: int = 2000, workers=None) -> tuple[float, float]:
    """Mean x-section volume over X ~ N(theta, I), theta = theta_norm e1.

    With ``tau2`` set, theta is drawn from N(0, tau2 I) instead. Explicit
    spheres use the exact volume per draw; implicit sets call
    :func:`volume_mc` with ``inner_rep`` points per draw.
    """
    p = proc.p
    theta0 = np.zeros(p)
    theta0[0] = theta_norm

    def draws(gen, n):
        theta = theta0 if tau2 is None else math.sqrt(tau2) * gen.standard_normal((n, p))
        return theta + gen.standard_normal((n, p))

    if proc.explicit:
        # sums are shifted by the usual volume so a constant volume has zero SE
        ref = volume_sphere(proc.c2, p)

        def block(gen, n):
            x = draws(gen, n)
            v = volume_sphere(proc.radius2_of(np.sum(x * x, axis=1)), p) - ref
            return [v.sum(), (v * v).sum()]

        s = map_blocks(block, n_rep, seed, workers)
        m, se = mean_se(s[0], s[1], n_rep)
        return ref + m, se

    z = std_normal_sample(seed, n_rep, 2 * p)
    theta = theta0 if tau2 is None else math.sqrt(tau2) * z[:, p:]
    xs = theta + z[:, :p]
    vols = np.array([
        volume_mc(proc, x, inner_rep, SeedSpec(seed.base_seed, (seed.stream_id + 1 + i) % 2**64))[0]
        for i, x in enumerate(xs)
    ])
    se = float(vols.std(ddof=1) / math.sqrt(n_rep)) if n_rep > 1 else 0.0
    return float(vols.mean()), se
