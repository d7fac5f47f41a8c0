"""Random streams and the chi-square special-function kernel.

Everything here is vectorized over numpy arrays and also accepts plain
floats; scalar inputs give scalar outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

# Replications are generated in fixed blocks so that a replication's draws
# depend only on (base_seed, stream_id, replication index).
BLOCK_SIZE = 1 << 14

_EPS = 1e-16
_TINY = 1e-300
_POISSON_TAIL = 1e-13


@dataclass(frozen=True)
class SeedSpec:
    base_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("base_seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= int(v) < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def block_generator(self, block: int) -> np.random.Generator:
        ss = np.random.SeedSequence([int(self.base_seed), int(self.stream_id), int(block)])
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class DistParams:
    df: float
    noncentrality: float = 0.0
    alpha: float = 0.05

    def __post_init__(self):
        if not self.df > 0:
            raise ValueError("df must be positive")
        if not self.noncentrality >= 0:
            raise ValueError("noncentrality must be nonnegative")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")


def n_blocks(n: int) -> int:
    return -(-int(n) // BLOCK_SIZE)


def block_normals(seed: SeedSpec, block: int, n: int, dim: int = 1) -> np.ndarray:
    """Standard normal rows ``block*BLOCK_SIZE ... +n`` of the stream, shape (n, dim)."""
    z = seed.block_generator(block).standard_normal((BLOCK_SIZE, dim))
    return z[:n]


def std_normal_sample(seed: SeedSpec, n: int, dim: int | None = None) -> np.ndarray:
    """``n`` i.i.d. N(0, 1) deviates (or ``n`` rows of ``dim`` of them).

    Row ``r`` depends only on ``(seed, r)``: a longer request extends a
    shorter one without changing its prefix.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    d = 1 if dim is None else int(dim)
    parts = []
    for b in range(n_blocks(n)):
        parts.append(block_normals(seed, b, min(BLOCK_SIZE, n - b * BLOCK_SIZE), d))
    out = np.concatenate(parts, axis=0)
    return out[:, 0] if dim is None else out


def _ret(arr, scalar):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if scalar else arr


def _is_scalar(*xs):
    return all(np.ndim(x) == 0 for x in xs)


# --- regularized incomplete gamma -------------------------------------------

def _log_prefactor(a, x):
    # log(x^a e^-x / Gamma(a)), x > 0
    return a * np.log(x) - x - gammaln(a)


def _gamma_series(a, x):
    """P(a, x) by the power series, for x < a + 1."""
    term = 1.0 / a
    total = term.copy()
    ap = a.copy()
    active = np.ones(a.shape, dtype=bool)
    for _ in range(100000):
        ap = ap + 1.0
        term = np.where(active, term * x / ap, 0.0)
        total = total + term
        active = active & (np.abs(term) > np.abs(total) * _EPS)
        if not active.any():
            break
    return total * np.exp(_log_prefactor(a, x))


def _gamma_cfrac(a, x):
    """Q(a, x) by the Legendre continued fraction (modified Lentz), for x >= a + 1."""
    b = x + 1.0 - a
    c = np.full(a.shape, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    for i in range(1, 100000):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = c * d
        h = np.where(active, h * delta, h)
        active = active & (np.abs(delta - 1.0) > _EPS)
        if not active.any():
            break
    return np.exp(_log_prefactor(a, x)) * h


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma P(a, x), a > 0, x >= 0."""
    scalar = _is_scalar(a, x)
    a, x = np.broadcast_arrays(np.asarray(a, float), np.asarray(x, float))
    a = a.astype(float).ravel()
    xf = x.astype(float).ravel()
    if np.any(a <= 0):
        raise ValueError("shape parameter must be positive")
    if np.any(xf < 0):
        raise ValueError("incomplete gamma argument must be nonnegative")
    out = np.zeros_like(xf)
    ser = (xf > 0) & (xf < a + 1.0)
    cf = xf >= a + 1.0
    if ser.any():
        out[ser] = _gamma_series(a[ser], xf[ser])
    if cf.any():
        out[cf] = 1.0 - _gamma_cfrac(a[cf], xf[cf])
    out = np.clip(out, 0.0, 1.0).reshape(x.shape)
    return _ret(out, scalar)


def gammainc_lower_unreg(s, y):
    """Unregularized gamma(s, y) = Gamma(s) P(s, y)."""
    return np.exp(gammaln(s)) * gammainc_lower(s, y)


# --- central chi-square ------------------------------------------------------

def chi2_cdf(x, df):
    if np.any(np.asarray(x) < 0):
        raise ValueError("chi2_cdf: x must be nonnegative")
    if np.any(np.asarray(df) <= 0):
        raise ValueError("chi2_cdf: df must be positive")
    scalar = _is_scalar(x, df)
    return _ret(gammainc_lower(np.asarray(df, float) / 2.0, np.asarray(x, float) / 2.0), scalar)


def chi2_pdf(x, df):
    x = np.asarray(x, float)
    if np.any(x <= 0):
        raise ValueError("chi2_pdf: x must be positive")
    scalar = _is_scalar(x, df)
    h = np.asarray(df, float) / 2.0
    logf = (h - 1.0) * np.log(x) - x / 2.0 - h * math.log(2.0) - gammaln(h)
    return _ret(np.exp(logf), scalar)


def _wilson_hilferty(q, df):
    from scipy.special import ndtri  # normal quantile; only seeds the bracket

    z = ndtri(q)
    k = 2.0 / (9.0 * df)
    g = df * (1.0 - k + z * np.sqrt(k)) ** 3
    return np.maximum(g, 1e-3)


def _invert(cdf, q, guess, tol):
    """Vectorized inversion of a monotone ``cdf`` on [0, inf).

    The root is bracketed by doubling from the guess, then the bracket is
    shrunk by Illinois-modified false position; a step that lands outside
    the bracket, or fails to halve it twice running, falls back to bisection.
    """
    q = np.asarray(q, float)
    lo = np.zeros_like(q)
    hi = np.maximum(np.asarray(guess, float), 1e-3) * 1.5 + 1.0
    for _ in range(200):
        below = cdf(hi) < q
        if not below.any():
            break
        lo = np.where(below, hi, lo)
        hi = np.where(below, hi * 2.0, hi)
    else:
        raise ArithmeticError("quantile bracketing failed")
    fa = cdf(lo) - q
    fb = cdf(hi) - q
    side = np.zeros(q.shape, dtype=int)
    width = hi - lo
    for it in range(400):
        done = (hi - lo <= tol * np.maximum(hi, 1.0)) | (fa == 0) | (fb == 0)
        if np.all(done):
            break
        with np.errstate(invalid="ignore", divide="ignore"):
            x = (lo * fb - hi * fa) / (fb - fa)
        bisect = ~np.isfinite(x) | (x <= lo) | (x >= hi) | (it % 3 == 2) & (hi - lo > 0.5 * width)
        x = np.where(bisect, 0.5 * (lo + hi), x)
        if it % 3 == 2:
            width = hi - lo
        x = np.where(done, lo, x)
        f = cdf(x) - q
        left = f < 0
        upd = ~done
        fa_new = np.where(upd & ~left & (side == 1), 0.5 * fa, fa)
        fb_new = np.where(upd & left & (side == -1), 0.5 * fb, fb)
        lo = np.where(upd & left, x, lo)
        fa = np.where(upd & left, f, fa_new)
        hi = np.where(upd & ~left, x, hi)
        fb = np.where(upd & ~left, f, fb_new)
        side = np.where(upd, np.where(left, -1, 1), side)
    return np.where(fa == 0, lo, np.where(fb == 0, hi, 0.5 * (lo + hi)))


def chi2_quantile(q, df):
    """x with P(chi2_df <= x) = q, by bisection seeded with Wilson-Hilferty."""
    q_arr = np.asarray(q, float)
    if np.any((q_arr <= 0) | (q_arr >= 1)):
        raise ValueError("chi2_quantile: q must lie in (0, 1)")
    scalar = _is_scalar(q, df)
    q_arr, df_arr = np.broadcast_arrays(q_arr, np.asarray(df, float))
    df_arr = df_arr.astype(float)
    out = _invert(lambda x: gammainc_lower(df_arr / 2.0, x / 2.0), q_arr,
                  _wilson_hilferty(q_arr, df_arr), 1e-15)
    return _ret(out, scalar)


# --- noncentral chi-square ---------------------------------------------------

def noncentral_chi2_cdf(x, df, lam):
    """Poisson mixture of central chi-square CDFs.

    Summation starts at the modal Poisson index and walks outwards in both
    directions, stopping once the unvisited Poisson mass is below 1e-13.
    Neighbouring incomplete-gamma terms come from the recurrence
    P(s+1, y) = P(s, y) - y^s e^-y / Gamma(s+1).
    """
    x = np.asarray(x, float)
    lam = np.asarray(lam, float)
    if np.any(x < 0) or np.any(lam < 0):
        raise ValueError("noncentral_chi2_cdf: negative input")
    scalar = _is_scalar(x, df, lam)
    x, df_a, lam = np.broadcast_arrays(x, np.asarray(df, float), lam)
    shape = x.shape
    x = x.ravel().astype(float)
    df_a = df_a.ravel().astype(float)
    lam = lam.ravel().astype(float)
    out = np.zeros_like(x)

    # lam/2 underflowing to 0 (subnormal lam) is the central case; so is a
    # subnormal x, where x/2 == 0 and the CDF is 0 at working precision
    pos = 0.5 * x > 0
    central = (0.5 * lam == 0) & pos
    if central.any():
        out[central] = gammainc_lower(df_a[central] / 2.0, x[central] / 2.0)
    m = (0.5 * lam > 0) & pos
    if m.any():
        out[m] = _ncx2_series(x[m], df_a[m], lam[m])
    return _ret(np.clip(out, 0.0, 1.0).reshape(shape), scalar)


def _ncx2_series(x, df, lam):
    y = x / 2.0
    mu = lam / 2.0
    j0 = np.floor(mu)
    s0 = df / 2.0 + j0
    w0 = np.exp(j0 * np.log(mu) - mu - gammaln(j0 + 1.0))
    p0 = gammainc_lower(s0, y)
    # term(s) = y^s e^-y / Gamma(s+1)
    log_y = np.log(y)
    t0 = np.exp(s0 * log_y - y - gammaln(s0 + 1.0))

    total = w0 * p0
    mass = w0.copy()
    # upward state
    wu, pu, tu, su = w0.copy(), p0.copy(), t0.copy(), s0.copy()
    ju = j0.copy()
    # downward state
    wd, pd, td, sd = w0.copy(), p0.copy(), t0.copy(), s0.copy()
    jd = j0.copy()

    active = np.ones(x.shape, dtype=bool)
    for _ in range(1000000):
        # step up: j -> j+1
        pu = np.maximum(pu - tu, 0.0)
        ju = ju + 1.0
        wu = wu * mu / ju
        su = su + 1.0
        tu = tu * y / (su)
        # step down: j -> j-1 (where possible)
        can = jd > 0
        # term(s-1) directly: the ratio form term(s) * s / y cannot recover
        # from term(s) underflowing when y is tiny
        with np.errstate(divide="ignore", invalid="ignore"):
            td_new = np.where(can, np.exp((sd - 1.0) * log_y - y - gammaln(sd)), 0.0)
        pd = np.where(can, pd + td_new, pd)
        wd_new = np.where(can, wd * jd / mu, 0.0)
        sd = np.where(can, sd - 1.0, sd)
        jd = np.where(can, jd - 1.0, jd)
        td = np.where(can, td_new, td)
        wd = wd_new

        total = total + np.where(active, wu * pu + wd * pd, 0.0)
        mass = mass + np.where(active, wu + wd, 0.0)
        rest = 1.0 - mass
        # the upward tail must also be small in absolute terms; guards the
        # float saturation of ``mass`` near 1
        # rounding can leave ``rest`` just above the bound, so also stop once
        # the weights in both directions are negligible
        live = (wu > _POISSON_TAIL * 1e-6) | (wd > _POISSON_TAIL * 1e-6)
        active = active & live & ((rest >= _POISSON_TAIL) | (wu > _POISSON_TAIL * 1e-3))
        if not active.any():
            break
    return total


def noncentral_chi2_quantile(q, df, lam):
    """Inverse of :func:`noncentral_chi2_cdf` in x, by bracketing and bisection."""
    q_arr = np.asarray(q, float)
    if np.any((q_arr <= 0) | (q_arr >= 1)):
        raise ValueError("noncentral_chi2_quantile: q must lie in (0, 1)")
    scalar = _is_scalar(q, df, lam)
    q_arr, df_a, lam_a = np.broadcast_arrays(q_arr, np.asarray(df, float), np.asarray(lam, float))
    df_a = df_a.astype(float)
    lam_a = lam_a.astype(float)
    # Patnaik two-moment approximation as the starting guess
    scale = (df_a + 2 * lam_a) / (df_a + lam_a)
    dfp = (df_a + lam_a) ** 2 / (df_a + 2 * lam_a)
    guess = scale * _wilson_hilferty(q_arr, dfp)
    out = _invert(lambda x: noncentral_chi2_cdf(x, df_a, lam_a), q_arr, guess, 1e-14)
    return _ret(out, scalar)


def normal_two_sided_cutoff(alpha: float) -> float:
    """c with P(|Z| <= c) = 1 - alpha."""
    return math.sqrt(chi2_quantile(1.0 - alpha, 1))
