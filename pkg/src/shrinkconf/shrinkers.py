"""Shrinkage point estimators used as centers of the confidence procedures.

All mean estimators act on the last axis, so a batch of observations
``x`` of shape (n, p) is shrunk row by row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .numkit import gammainc_lower


class SingularityError(ArithmeticError):
    """James-Stein evaluated exactly at its shrink target."""


@dataclass(frozen=True)
class Observation:
    x: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if x.ndim != 1:
            raise ValueError("observation must be a p-vector")
        if not np.all(np.isfinite(x)):
            raise ValueError("observation coordinates must be finite")
        object.__setattr__(self, "x", x)

    @property
    def p(self) -> int:
        return self.x.shape[0]

    @property
    def norm2(self) -> float:
        return float(self.x @ self.x)


@dataclass(frozen=True)
class ShrinkConfig:
    """Shrink constant ``a``, Brown-Joshi offset ``b`` and the shrink target.

    ``target`` may be ``None`` (origin), a p-vector, or ``"mean"`` for
    shrinkage toward the equal-coordinate subspace.
    """

    a: float
    b: float = 0.0
    target: object = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("shrink constant a must be positive")
        if not self.b >= 0:
            raise ValueError("offset b must be nonnegative")

    @classmethod
    def popular(cls, p: int, **kw) -> "ShrinkConfig":
        return cls(a=p - 2, **kw)


@dataclass(frozen=True)
class UnivariateSample:
    n: int
    mean: float
    ss: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        if not self.ss > 0:
            raise ValueError("sum of squares must be positive")

    @classmethod
    def from_data(cls, data) -> "UnivariateSample":
        data = np.asarray(data, dtype=float)
        m = data.mean()
        return cls(n=data.size, mean=float(m), ss=float(((data - m) ** 2).sum()))


def _as_x(obs):
    return obs.x if isinstance(obs, Observation) else np.asarray(obs, dtype=float)


def _target(x, target):
    if target is None:
        return np.zeros_like(x)
    if isinstance(target, str):
        if target != "mean":
            raise ValueError(f"unknown shrink target {target!r}")
        return np.broadcast_to(x.mean(axis=-1, keepdims=True), x.shape)
    return np.broadcast_to(np.asarray(target, dtype=float), x.shape)


def _shrink(x, cfg, factor_fn):
    t = _target(x, cfg.target)
    d = x - t
    r2 = np.sum(d * d, axis=-1, keepdims=True)
    return t + factor_fn(r2) * d


def james_stein(obs, cfg: ShrinkConfig) -> np.ndarray:
    x = _as_x(obs)
    t = _target(x, cfg.target)
    r2 = np.sum((x - t) ** 2, axis=-1, keepdims=True)
    if np.any(r2 == 0):
        raise SingularityError("james_stein is undefined at the shrink target")
    return t + (1.0 - cfg.a / r2) * (x - t)


def positive_part(obs, cfg: ShrinkConfig) -> np.ndarray:
    x = _as_x(obs)

    def factor(r2):
        with np.errstate(divide="ignore"):
            return np.where(r2 > cfg.a, 1.0 - cfg.a / np.where(r2 > 0, r2, 1.0), 0.0)

    return _shrink(x, cfg, factor)


def brown_joshi(obs, cfg: ShrinkConfig) -> np.ndarray:
    x = _as_x(obs)

    def factor(r2):
        den = cfg.b + r2
        if np.any(den == 0):
            raise SingularityError("brown_joshi with b = 0 is undefined at the target")
        return 1.0 - cfg.a / den

    return _shrink(x, cfg, factor)


def pospart_factor(t2, a):
    """Center factor (1 - a/|x|^2)^+ as a function of |x|^2."""
    t2 = np.asarray(t2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.where(t2 > a, 1.0 - a / np.where(t2 > 0, t2, 1.0), 0.0)


def _lambda_moment(s, t):
    """int_0^1 lam^s exp(-lam t / 2) dlam for s > -1, t >= 0."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    y = t / 2.0
    small = y < 1e-8
    ys = np.where(small, 1.0, y)
    exact = np.exp(gammaln(s + 1.0) - (s + 1.0) * np.log(ys)) * gammainc_lower(s + 1.0, ys)
    # two-term series in y near t = 0
    series = 1.0 / (s + 1.0) - y / (s + 2.0)
    return np.where(small, series, exact)


def strawderman_shrink_factor(t, p: int, a: float = 0.0):
    """Posterior mean of the Strawderman mixing variable, E(lam | x).

    ``t`` is |x|^2. The Bayes estimator is ``(1 - E(lam|x)) x``.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if not 0 <= a < 1:
        raise ValueError("Strawderman hyperparameter must lie in [0, 1)")
    s = p / 2.0 - a
    out = _lambda_moment(s + 1.0, t) / _lambda_moment(s, t)
    return float(out) if np.ndim(out) == 0 else out


def strawderman(obs, p: int | None = None, a: float = 0.0) -> np.ndarray:
    x = _as_x(obs)
    p = x.shape[-1] if p is None else p
    t = np.sum(x * x, axis=-1, keepdims=True)
    return (1.0 - strawderman_shrink_factor(t, p, a)) * x


def stein_variance(s: UnivariateSample) -> float:
    """Stein's truncated variance estimator min{1/(n+1), (1 + n xbar^2/S^2)/(n+2)} S^2."""
    return float(stein_variance_arr(s.n, s.mean, s.ss))


def stein_variance_arr(n, mean, ss):
    # min{1/(n+1), (1 + n xbar^2/S^2)/(n+2)} S^2, written so the saturated branch is exactly S^2/(n+1)
    ss = np.asarray(ss, dtype=float)
    return np.minimum(ss / (n + 1), (ss + n * np.asarray(mean) ** 2) / (n + 2))


def eb_shrink_factor_M(t, p: int, c2: float):
    if p < 3:
        raise ValueError("empirical Bayes factor needs p >= 3")
    if c2 <= p - 2:
        raise ValueError(f"c2 = {c2} must exceed p - 2 = {p - 2}")
    out = 1.0 - (p - 2) / np.maximum(np.asarray(t, dtype=float), c2)
    return float(out) if np.ndim(out) == 0 else out


def he_shrink_factor_M(t, p: int):
    if p < 3:
        raise ValueError("He's factor needs p >= 3")
    t = np.asarray(t, dtype=float)
    pp = pospart_factor(t, p - 2)
    out = np.maximum(pp, 1.0 / (p - 1))
    return float(out) if np.ndim(out) == 0 else out
