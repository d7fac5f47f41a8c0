"""Confidence procedures for a normal mean and intervals for a normal variance.

Every mean procedure exposes ``member(theta, x)``, broadcasting over the
leading axes of both arguments. Procedures with an explicit spherical
x-section additionally expose ``center_factor(s)`` and ``radius2_of(s)``
as functions of ``s = |x|^2``; the center is always ``center_factor * x``.

Radii throughout are squared: a region is ``{theta: |theta - center|^2 <= radius2}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import numkit
from .shrinkers import (
    Observation,
    UnivariateSample,
    eb_shrink_factor_M,
    he_shrink_factor_M,
    pospart_factor,
)


class ConfigurationError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


@lru_cache(maxsize=None)
def chi2_cutoff(p: int, alpha: float) -> float:
    """c^2 with P(chi2_p <= c^2) = 1 - alpha."""
    return numkit.chi2_quantile(1.0 - alpha, p)


@lru_cache(maxsize=None)
def normal_cutoff(alpha: float) -> float:
    return numkit.normal_two_sided_cutoff(alpha)


def _x(x):
    return x.x if isinstance(x, Observation) else np.asarray(x, dtype=float)


def _norm2(v):
    return np.sum(v * v, axis=-1)


@dataclass(frozen=True)
class SphericalRegion:
    center: np.ndarray
    radius2: float

    def __post_init__(self):
        if not self.radius2 > 0:
            raise ValueError("radius2 must be positive")
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, float)))

    @property
    def p(self) -> int:
        return self.center.shape[-1]

    def member(self, theta) -> np.ndarray | bool:
        d = np.asarray(theta, float) - self.center
        out = _norm2(d) <= self.radius2
        return bool(out) if np.ndim(out) == 0 else out


# --- procedures --------------------------------------------------------------

@dataclass(frozen=True)
class RegionProcedure:
    p: int
    alpha: float = 0.05

    id = "base"
    explicit = False

    def __post_init__(self):
        if self.p < 1:
            raise ConfigurationError("p must be >= 1")
        if not 0 < self.alpha < 1:
            raise ConfigurationError("alpha must lie in (0, 1)")

    @property
    def c2(self) -> float:
        return chi2_cutoff(self.p, self.alpha)

    @property
    def params(self) -> dict:
        return {}

    def member(self, theta, x):
        raise NotImplementedError

    def anchor(self, x) -> np.ndarray:
        """A point of the x-section used as the center for radial scans."""
        return _x(x)

    def describe(self) -> dict:
        return {"procedure": self.id, "p": self.p, "alpha": self.alpha, **self.params}


@dataclass(frozen=True)
class SphereProcedure(RegionProcedure):
    """Procedure whose x-section is the sphere ``|theta - g(s) x|^2 <= r2(s)``."""

    explicit = True

    def center_factor(self, s):
        raise NotImplementedError

    def radius2_of(self, s):
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        """Values of s = |x|^2 where center or radius change formula."""
        return []

    def sphere(self, x):
        x = _x(x)
        s = _norm2(x)
        return self.center_factor(s)[..., None] * x, self.radius2_of(s)

    def region(self, x) -> SphericalRegion:
        x = _x(x)
        center, r2 = self.sphere(x)
        return SphericalRegion(center, float(r2))

    def member(self, theta, x):
        center, r2 = self.sphere(x)
        out = _norm2(np.asarray(theta, float) - center) <= r2
        return bool(out) if np.ndim(out) == 0 else out

    def anchor(self, x):
        return self.sphere(x)[0]


@dataclass(frozen=True)
class Usual(SphereProcedure):
    id = "usual"

    def center_factor(self, s):
        return np.ones_like(np.asarray(s, float))

    def radius2_of(self, s):
        return np.full_like(np.asarray(s, float), self.c2)


@dataclass(frozen=True)
class PosPart(SphereProcedure):
    """Usual-radius sphere recentered at the positive-part estimator."""

    a: float | None = None
    id = "pospart"

    def __post_init__(self):
        super().__post_init__()
        if self.a is None:
            object.__setattr__(self, "a", float(self.p - 2))
        if not self.a >= 0:
            raise ConfigurationError("shrink constant must be nonnegative")

    @property
    def params(self):
        return {"a": self.a}

    def center_factor(self, s):
        return pospart_factor(s, self.a)

    def radius2_of(self, s):
        return np.full_like(np.asarray(s, float), self.c2)

    def breakpoints(self):
        return [self.a]


def eb_radius2(s, p: int, c2: float):
    """Squared radius M (c^2 - p log M) with the truncated estimate of M."""
    if c2 <= p:
        raise ConfigurationError(f"empirical Bayes radius needs c^2 > p (c^2 = {c2:.4f}, p = {p})")
    m = eb_shrink_factor_M(s, p, c2)
    return m * (c2 - p * np.log(m))


@dataclass(frozen=True)
class EmpiricalBayes(SphereProcedure):
    id = "eb"

    def __post_init__(self):
        super().__post_init__()
        if self.p < 3:
            raise ConfigurationError("eb region needs p >= 3")
        if self.c2 <= self.p:
            raise ConfigurationError("eb region needs c^2 > p, i.e. 1 - alpha > 0.55 or so")

    def center_factor(self, s):
        return pospart_factor(s, self.p - 2)

    def radius2_of(self, s):
        return np.asarray(eb_radius2(s, self.p, self.c2), float)

    def breakpoints(self):
        return [float(self.p - 2), self.c2]


@dataclass(frozen=True)
class Samworth(SphereProcedure):
    """Positive-part center with the truncated Taylor radius min(w0 + w2 s / 2, c^2)."""

    w0: float = 0.0
    w2: float = 0.0
    a: float | None = None
    id = "samworth"

    def __post_init__(self):
        super().__post_init__()
        if self.a is None:
            object.__setattr__(self, "a", float(self.p - 2))
        if not self.w0 > 0:
            raise ConfigurationError("w0 must be positive (see evaluate.w_alpha_solve)")

    @property
    def params(self):
        return {"a": self.a, "w0": self.w0, "w2": self.w2}

    def center_factor(self, s):
        return pospart_factor(s, self.a)

    def radius2_of(self, s):
        return np.minimum(self.w0 + 0.5 * self.w2 * np.asarray(s, float), self.c2)

    def breakpoints(self):
        bps = [self.a]
        if self.w2 > 0:
            bps.append((self.c2 - self.w0) / (0.5 * self.w2))
        return bps


@dataclass(frozen=True)
class HPDOracle(SphereProcedure):
    """Known-tau^2 Bayes sets centered at M x.

    ``form="hpd"`` uses radius^2 c^2 M; ``form="linear"`` the linear-loss
    radius^2 M (c^2 - p log M).
    """

    tau2: float = 1.0
    form: str = "hpd"
    id = "hpd"

    def __post_init__(self):
        super().__post_init__()
        if not self.tau2 > 0:
            raise ConfigurationError("tau2 must be positive")
        if self.form not in ("hpd", "linear"):
            raise ConfigurationError("form must be 'hpd' or 'linear'")

    @property
    def params(self):
        return {"tau2": self.tau2, "form": self.form}

    @property
    def M(self):
        return self.tau2 / (self.tau2 + 1.0)

    def center_factor(self, s):
        return np.full_like(np.asarray(s, float), self.M)

    def radius2_of(self, s):
        m = self.M
        r2 = self.c2 * m if self.form == "hpd" else m * (self.c2 - self.p * math.log(m))
        return np.full_like(np.asarray(s, float), r2)


@dataclass(frozen=True)
class HeInterval(RegionProcedure):
    """Interval for one coordinate, |theta_i - delta+_i(X)|^2 <= nu(|X|)."""

    coord: int = 0
    id = "he"

    def __post_init__(self):
        super().__post_init__()
        if self.p < 3:
            raise ConfigurationError("He interval needs p >= 3")
        if self.c <= 1:
            raise ConfigurationError("He interval needs c > 1 (1 - alpha > 0.68)")

    @property
    def params(self):
        return {"coord": self.coord}

    @property
    def c(self) -> float:
        return normal_cutoff(self.alpha)

    def nu(self, s):
        m = he_shrink_factor_M(s, self.p)
        return m * (self.c ** 2 - np.log(m))

    def interval(self, x, i=None):
        """(center, radius2) for coordinate ``i`` (default ``coord``)."""
        x = _x(x)
        i = self.coord if i is None else i
        s = _norm2(x)
        return pospart_factor(s, self.p - 2) * x[..., i], self.nu(s)

    def member(self, theta, x):
        theta = np.asarray(theta, float)
        center, r2 = self.interval(x)
        out = (theta[..., self.coord] - center) ** 2 <= r2
        return bool(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Faith(RegionProcedure):
    """Region bounded by the multivariate-t posterior ratio inequality.

    Membership, in log form:
    (c^2 - |x - theta|^2)/(p + 2a) >= log(2b + |theta|^2) - log(2b + |x|^2).
    """

    a: float = 0.0
    b: float = 1.0
    id = "faith"

    def __post_init__(self):
        super().__post_init__()
        if self.p + 2 * self.a <= 0:
            raise ConfigurationError("need p + 2a > 0")
        if not self.b > 0:
            raise ConfigurationError("b must be positive")

    @property
    def params(self):
        return {"a": self.a, "b": self.b}

    @property
    def convex(self) -> bool:
        return self.a > -self.p / 2 and self.b > (self.a + self.p / 2) / 8

    def member(self, theta, x):
        theta = np.asarray(theta, float)
        x = _x(x)
        lhs = (self.c2 - _norm2(x - theta)) / (self.p + 2 * self.a)
        rhs = np.log(2 * self.b + _norm2(theta)) - np.log(2 * self.b + _norm2(x))
        out = lhs >= rhs
        return bool(out) if np.ndim(out) == 0 else out


class _TsengBrown(RegionProcedure):
    """Sets of the form |x - s(theta) theta|^2 <= k(lam(theta)), with k the
    1 - alpha noncentral chi-square quantile; coverage is exactly 1 - alpha."""

    def scale_and_noncentrality(self, theta):
        raise NotImplementedError

    def _slack(self, theta, x):
        theta = np.asarray(theta, float)
        scale, lam = self.scale_and_noncentrality(theta)
        k = numkit.noncentral_chi2_quantile(1.0 - self.alpha, self.p, lam)
        ok = np.isfinite(scale)
        with np.errstate(invalid="ignore"):
            d = _norm2(x - np.where(ok, scale, 0.0)[..., None] * theta)
        return np.where(ok, k - d, -np.inf)

    def member(self, theta, x):
        out = self._slack(theta, _x(x)) >= 0
        return bool(out) if np.ndim(out) == 0 else out

    def anchor(self, x):
        # point of the segment [0, x] with the largest slack
        x = _x(x)
        pts = np.linspace(0.0, 1.0, 401)[:, None] * x[None, :]
        return pts[int(np.argmax(self._slack(pts, x)))]


@dataclass(frozen=True)
class TsengBrownB(_TsengBrown):
    """Fixed tau^2: |x - theta (1 + tau2)/tau2|^2 <= k(|theta|^2 / tau2^2)."""

    tau2: float = 1.0
    id = "tseng_brown_B"

    def __post_init__(self):
        super().__post_init__()
        if not self.tau2 > 0:
            raise ConfigurationError("tau2 must be positive")

    @property
    def params(self):
        return {"tau2": self.tau2}

    def scale_and_noncentrality(self, theta):
        t2 = _norm2(theta)
        return np.full_like(t2, (1.0 + self.tau2) / self.tau2), t2 / self.tau2 ** 2

    def anchor(self, x):
        return _x(x) * self.tau2 / (1.0 + self.tau2)


@dataclass(frozen=True)
class TsengBrownTB(_TsengBrown):
    """tau^2 replaced by g = A + B|theta|^2."""

    A: float = 1.0
    B: float = 1.0
    id = "tseng_brown_TB"

    def __post_init__(self):
        super().__post_init__()
        if not self.A >= 0:
            raise ConfigurationError("A must be >= 0")
        if not self.B > 0:
            raise ConfigurationError("B must be > 0")

    @property
    def params(self):
        return {"A": self.A, "B": self.B}

    def scale_and_noncentrality(self, theta):
        t2 = _norm2(theta)
        g = self.A + self.B * t2
        # A = 0 at theta = 0: the scaled point diverges and theta = 0 is excluded
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(g > 0, 1.0 + 1.0 / np.where(g > 0, g, 1.0), np.inf)
            lam = np.where(g > 0, t2 / np.where(g > 0, g, 1.0) ** 2, 0.0)
        return scale, lam


PROCEDURES = {
    cls.id: cls
    for cls in (Usual, PosPart, EmpiricalBayes, HeInterval, Faith, TsengBrownB, TsengBrownTB,
                Samworth, HPDOracle)
}


def make_procedure(id: str, p: int, alpha: float, **params) -> RegionProcedure:
    try:
        cls = PROCEDURES[id]
    except KeyError:
        raise ConfigurationError(
            f"unknown procedure {id!r}; valid ids: {', '.join(sorted(PROCEDURES))}"
        ) from None
    return cls(p=p, alpha=alpha, **params)


# --- functional interface ----------------------------------------------------

def usual_region(x, alpha: float) -> SphericalRegion:
    x = _x(x)
    return Usual(x.shape[-1], alpha).region(x)


def pospart_region(x, alpha: float, a: float) -> SphericalRegion:
    if not a > 0:
        raise ConfigurationError("a must be positive")
    x = _x(x)
    return PosPart(x.shape[-1], alpha, a).region(x)


def eb_region(x, alpha: float) -> SphericalRegion:
    x = _x(x)
    return EmpiricalBayes(x.shape[-1], alpha).region(x)


def he_interval(X, i: int, alpha: float) -> SphericalRegion:
    X = _x(X)
    center, r2 = HeInterval(X.shape[-1], alpha, coord=i).interval(X)
    return SphericalRegion(np.array([center]), float(r2))


def faith_member(theta, x, a: float, b: float, alpha: float):
    x = _x(x)
    return Faith(x.shape[-1], alpha, a=a, b=b).member(theta, x)


def tseng_brown_member(theta, x, variant: str, alpha: float, **params):
    x = _x(x)
    cls = {"B": TsengBrownB, "TB": TsengBrownTB}.get(variant)
    if cls is None:
        raise ConfigurationError(f"unknown Tseng-Brown variant {variant!r}; valid: B, TB")
    return cls(x.shape[-1], alpha, **params).member(theta, x)


def samworth_region(x, alpha: float, w0: float, w2: float) -> SphericalRegion:
    x = _x(x)
    return Samworth(x.shape[-1], alpha, w0=w0, w2=w2).region(x)


def hpd_oracle_region(x, tau2: float, alpha: float, form: str = "hpd") -> SphericalRegion:
    x = _x(x)
    return HPDOracle(x.shape[-1], alpha, tau2=tau2, form=form).region(x)


# --- variance intervals ------------------------------------------------------

@dataclass(frozen=True)
class VarianceInterval:
    """Interval for sigma^2. From :func:`tate_klett_interval` the endpoints are
    multipliers of S^2 (``lo = 1/b``, ``hi = 1/a``)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not 0 <= self.lo < self.hi:
            raise ValueError("need 0 <= lo < hi")

    @property
    def a(self) -> float:
        return 1.0 / self.hi

    @property
    def b(self) -> float:
        return 1.0 / self.lo

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def scaled(self, ss: float) -> "VarianceInterval":
        return VarianceInterval(ss * self.lo, ss * self.hi)

    def contains(self, sigma2) -> bool:
        return self.lo <= sigma2 <= self.hi


@lru_cache(maxsize=None)
def _tate_klett_cutoffs(nu: int, alpha: float) -> tuple[float, float]:
    conf = 1.0 - alpha

    def upper(a):
        return numkit.chi2_quantile(numkit.chi2_cdf(a, nu) + conf, nu)

    def h(a):
        b = upper(a)
        return a * a * numkit.chi2_pdf(a, nu) - b * b * numkit.chi2_pdf(b, nu)

    lo, hi = 1e-12, numkit.chi2_quantile(alpha, nu) * (1 - 1e-12)
    hlo, hhi = h(lo), h(hi)
    if not (hlo < 0 < hhi):
        raise ConvergenceError(f"Tate-Klett bracket failed: h({lo})={hlo}, h({hi})={hhi}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    a = 0.5 * (lo + hi)
    return a, upper(a)


def tate_klett_interval(n: int, alpha: float) -> VarianceInterval:
    """Shortest 1 - alpha interval (S^2/b, S^2/a) for sigma^2, as S^2 multipliers."""
    if n - 1 < 1:
        raise ConfigurationError("need n >= 2")
    a, b = _tate_klett_cutoffs(int(n - 1), float(alpha))
    return VarianceInterval(1.0 / b, 1.0 / a)


def equal_tails_interval(n: int, alpha: float) -> VarianceInterval:
    nu = n - 1
    a = numkit.chi2_quantile(alpha / 2, nu)
    b = numkit.chi2_quantile(1 - alpha / 2, nu)
    return VarianceInterval(1.0 / b, 1.0 / a)


def cohen_multipliers(n: int, alpha: float, a_prime: float) -> tuple[VarianceInterval, VarianceInterval]:
    """(Tate-Klett piece, shifted piece) as S^2 multipliers, both of equal length."""
    tk = tate_klett_interval(n, alpha)
    a = tk.a
    if not a_prime >= a:
        raise ConfigurationError(f"a_prime must be >= a = {a}")
    inv_b_prime = 1.0 / a_prime - tk.length
    if not inv_b_prime > 0:
        raise ConfigurationError("a_prime too large: shifted piece would have b' <= 0")
    return tk, VarianceInterval(inv_b_prime, 1.0 / a_prime)


def default_a_prime(n: int, alpha: float) -> float:
    """1.02 a, or halfway to the largest admissible a' when that is closer."""
    tk = tate_klett_interval(n, alpha)
    f_max = 1.0 / (tk.a * tk.length)
    return tk.a * min(1.02, 1.0 + 0.5 * (f_max - 1.0))


def cohen_interval(s: UnivariateSample, alpha: float, k: float, a_prime: float) -> VarianceInterval:
    """Two-piece interval: the shortest interval when n xbar^2/S^2 > k, else the
    same-length interval shifted toward zero."""
    if not k > 0:
        raise ConfigurationError("k must be positive")
    tk, shifted = cohen_multipliers(s.n, alpha, a_prime)
    piece = tk if s.n * s.mean ** 2 / s.ss > k else shifted
    return piece.scaled(s.ss)
