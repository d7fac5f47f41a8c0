import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats
from scipy.stats import ortho_group

from shrinkconf import regions as rg
from shrinkconf.evaluate.montecarlo import mc_coverage
from shrinkconf.numkit import SeedSpec
from shrinkconf.shrinkers import ShrinkConfig, positive_part

# 40-digit mpmath reference values
C2_P3 = 7.8147279032511800
C2_P5 = 11.070497693516354
EB_FLOOR_P5 = 9.2225825368572861  # M (c^2 - 5 log M), M = 1 - 3/c^2
HE_NU_P5_T12 = 3.0968556698594302
HE_HALF_P5_T12 = 1.7597885298692653
# Faith, p=3, a=0, b=1, x=3 e1: boundary of the displayed (exp-form) inequality along e1
FAITH_UPPER = 5.2113754002248101
FAITH_LOWER = 3.0 - 3.5387119696867314


def test_usual_region():
    x = np.array([0.2, -1.0, 3.0])
    r = rg.usual_region(x, 0.05)
    assert abs(r.radius2 - C2_P3) < 1e-12
    assert r.member(x)
    edge = x + np.array([math.sqrt(r.radius2), 0, 0])
    assert rg.Usual(3, 0.05).member(x + np.array([0, 0, math.sqrt(C2_P3) * (1 - 1e-12)]), x)
    assert r.member(r.center + (edge - r.center) * (1 - 1e-15))


def test_usual_boundary_is_closed():
    r = rg.SphericalRegion(np.zeros(2), 25.0)
    assert r.member([3.0, 4.0])
    assert not r.member([3.0, 4.0 + 1e-12])


def test_pospart_region():
    x = np.array([0.5, 0.5, 0.0])
    r = rg.pospart_region(x, 0.05, a=1.0)
    assert np.array_equal(r.center, np.zeros(3))
    x = np.array([1.0, 2.0, -2.0])
    tiny = rg.pospart_region(x, 0.05, a=1e-14)
    np.testing.assert_allclose(tiny.center, x, rtol=1e-13)
    assert tiny.radius2 == rg.usual_region(x, 0.05).radius2
    with pytest.raises(rg.ConfigurationError):
        rg.pospart_region(x, 0.05, a=0.0)


def test_pospart_region_coverage_at_2c():
    from shrinkconf.evaluate.solvers import astar_solve
    proc = rg.PosPart(4, 0.05, astar_solve(4, 0.05))
    est, se = mc_coverage(proc, 2 * math.sqrt(proc.c2), 10**6, SeedSpec(31, 0))
    assert est > 0.95 + 3 * se


def test_eb_region_values():
    r = rg.eb_region(np.array([1.0, 1.0, 1.0, 0.0, 0.0]), 0.05)
    assert abs(r.radius2 - EB_FLOOR_P5) < 1e-12
    np.testing.assert_allclose(r.center, 0.0)
    far = rg.eb_region(np.array([1e7, 0, 0, 0, 0]), 0.05)
    assert abs(far.radius2 - C2_P5) < 1e-9
    with pytest.raises(rg.ConfigurationError):
        rg.EmpiricalBayes(5, 0.5)


@given(st.floats(0, 1e8), st.integers(3, 40), st.sampled_from([0.01, 0.05, 0.1, 0.2]))
def test_eb_radius_strictly_below_c2(s, p, alpha):
    proc = rg.EmpiricalBayes(p, alpha)
    r2 = proc.radius2_of(s)
    floor = proc.radius2_of(0.0)
    assert floor - 1e-12 <= r2
    if s < 1e6:
        assert r2 < proc.c2
    assert (r2 / proc.c2) ** (p / 2) <= 1.0


def test_he_interval_values():
    x = np.array([2.0, 2.0, 2.0, 0.0, 0.0])  # |X|^2 = 12
    r = rg.he_interval(x, 0, 0.05)
    assert abs(r.radius2 - HE_NU_P5_T12) < 1e-12
    assert abs(math.sqrt(r.radius2) - HE_HALF_P5_T12) < 1e-12
    assert r.center[0] == pytest.approx(0.75 * 2.0, rel=1e-15)
    proc = rg.HeInterval(5, 0.05)
    c2 = proc.c ** 2
    assert proc.nu(3.0) == pytest.approx((c2 + math.log(4)) / 4, rel=1e-14)
    assert proc.nu(1e14) == pytest.approx(c2, rel=1e-12)
    with pytest.raises(rg.ConfigurationError):
        rg.HeInterval(5, 0.4)


@given(st.floats(0, 1e9), st.integers(3, 60), st.sampled_from([0.01, 0.05, 0.1, 0.3]))
def test_he_half_width_below_c(s, p, alpha):
    proc = rg.HeInterval(p, alpha)
    if s < 1e8:
        assert proc.nu(s) < proc.c ** 2


def test_faith_examples():
    x = np.array([3.0, 0.0, 0.0])
    assert rg.faith_member(x, x, 0.0, 1.0, 0.05)
    # b -> infinity recovers the usual sphere
    rng = np.random.default_rng(4)
    th = x + rng.normal(size=(2000, 3)) * 2
    big_b = rg.Faith(3, 0.05, a=0.0, b=1e12).member(th, x)
    usual = rg.Usual(3, 0.05).member(th, x)
    assert np.array_equal(big_b, usual)


@pytest.mark.parametrize("direction,expected", [(1.0, FAITH_UPPER), (-1.0, FAITH_LOWER)])
def test_faith_single_flip_along_ray(direction, expected):
    proc = rg.Faith(3, 0.05, a=0.0, b=1.0)
    x = np.array([3.0, 0.0, 0.0])
    r = np.linspace(0, 12, 24001)
    theta = x + direction * r[:, None] * np.array([1.0, 0, 0])
    inside = proc.member(theta, x)
    flips = np.flatnonzero(inside[1:] != inside[:-1])
    assert len(flips) == 1
    lo, hi = r[flips[0]], r[flips[0] + 1]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if proc.member(x + direction * mid * np.array([1.0, 0, 0]), x):
            lo = mid
        else:
            hi = mid
    assert abs((3.0 + direction * lo) - expected) < 1e-9


def test_faith_validation_and_convexity():
    with pytest.raises(rg.ConfigurationError):
        rg.Faith(3, 0.05, a=-1.5)
    assert rg.Faith(3, 0.05, a=0.0, b=1.0).convex
    assert not rg.Faith(3, 0.05, a=0.0, b=0.1).convex


def test_tseng_brown_at_origin_is_usual_test():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(3000, 3)) * 2
    usual = np.sum(x * x, axis=1) <= C2_P3
    for variant, kw in (("B", {"tau2": 1.0}), ("TB", {"A": 1.0, "B": 1.0})):
        got = rg.tseng_brown_member(np.zeros(3), x, variant, 0.05, **kw)
        assert np.array_equal(got, usual)


def test_tseng_brown_large_tau_limit():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(3, )) * 2
    theta = x + rng.normal(size=(4000, 3)) * 1.7
    proc = rg.TsengBrownB(3, 0.05, tau2=1e9)
    got = proc.member(theta, x)
    want = np.sum((x - theta) ** 2, axis=1) <= C2_P3
    # disagreement only within rounding distance of the boundary
    d = np.abs(np.sum((x - theta) ** 2, axis=1) - C2_P3)
    assert np.all((got == want) | (d < 1e-6))


def test_tseng_brown_validation():
    with pytest.raises(rg.ConfigurationError):
        rg.TsengBrownB(3, 0.05, tau2=0.0)
    with pytest.raises(rg.ConfigurationError):
        rg.TsengBrownTB(3, 0.05, A=1.0, B=0.0)
    with pytest.raises(rg.ConfigurationError):
        rg.tseng_brown_member(np.zeros(3), np.zeros(3), "C", 0.05)
    # A = 0 excludes theta = 0
    assert not rg.TsengBrownTB(3, 0.05, A=0.0, B=1.0).member(np.zeros(3), np.zeros(3))


def test_samworth_region():
    x0 = np.zeros(5)
    r = rg.samworth_region(x0, 0.05, w0=5.88, w2=0.77)
    assert r.radius2 == 5.88
    big = rg.samworth_region(np.full(5, 10.0), 0.05, w0=5.88, w2=0.77)
    assert big.radius2 == pytest.approx(C2_P5, rel=1e-15)
    with pytest.raises(rg.ConfigurationError):
        rg.Samworth(5, 0.05, w0=0.0, w2=1.0)


def test_hpd_oracle_limits_and_forms():
    x = np.array([1.0, -2.0, 0.5])
    h = rg.hpd_oracle_region(x, 1.0, 0.05)
    assert h.radius2 == pytest.approx(0.5 * C2_P3, rel=1e-15)
    lin = rg.hpd_oracle_region(x, 1.0, 0.05, form="linear")
    assert lin.radius2 == pytest.approx(0.5 * (C2_P3 - 3 * math.log(0.5)), rel=1e-15)
    for form in ("hpd", "linear"):
        far = rg.hpd_oracle_region(x, 1e12, 0.05, form=form)
        assert far.radius2 == pytest.approx(C2_P3, rel=1e-10)
        np.testing.assert_allclose(far.center, x, rtol=1e-11)


def test_hpd_posterior_coverage_exact():
    tau2, p = 2.0, 4
    proc = rg.HPDOracle(p, 0.05, tau2=tau2)
    m = proc.M
    # theta | x ~ N(Mx, M I): |theta - Mx|^2 / M is chi2_p
    assert stats.chi2.cdf(proc.radius2_of(0.0) / m, p) == pytest.approx(0.95, abs=1e-12)
    rng = np.random.default_rng(9)
    x = np.array([0.3, 2.0, -1.0, 4.0])
    theta = m * x + math.sqrt(m) * rng.normal(size=(400000, p))
    cov = proc.member(theta, x).mean()
    assert abs(cov - 0.95) < 3 * math.sqrt(0.95 * 0.05 / 400000)


def test_hpd_frequentist_coverage_dips():
    proc = rg.HPDOracle(3, 0.05, tau2=1.0)
    hi, se0 = mc_coverage(proc, 0.0, 10**5, SeedSpec(41, 0))
    lo, se1 = mc_coverage(proc, 3 * math.sqrt(proc.c2), 10**5, SeedSpec(41, 1))
    assert hi > 0.95 + 3 * se0
    assert lo < 0.95 - 3 * se1


# --- variance intervals --------------------------------------------------------------

def test_tate_klett_equations():
    for n in (3, 5, 10, 30):
        for alpha in (0.05, 0.1):
            tk = rg.tate_klett_interval(n, alpha)
            nu = n - 1
            a, b = tk.a, tk.b
            assert abs(stats.chi2.cdf(b, nu) - stats.chi2.cdf(a, nu) - (1 - alpha)) < 1e-10
            assert abs(a * a * stats.chi2.pdf(a, nu) - b * b * stats.chi2.pdf(b, nu)) < 1e-10


def test_tate_klett_nu2_closed_form():
    tk = rg.tate_klett_interval(3, 0.1)
    a, b = tk.a, tk.b
    assert abs(math.exp(-a / 2) - math.exp(-b / 2) - 0.9) < 1e-10
    assert abs(a * a * math.exp(-a / 2) - b * b * math.exp(-b / 2)) < 1e-10


@pytest.mark.parametrize("n,alpha", [(10, 0.1), (6, 0.05)])
def test_tate_klett_is_shortest(n, alpha):
    tk = rg.tate_klett_interval(n, alpha)
    nu = n - 1
    best = 1 / tk.a - 1 / tk.b
    grid = np.linspace(1e-4, stats.chi2.ppf(alpha, nu) * (1 - 1e-6), 4000)
    b = stats.chi2.ppf(stats.chi2.cdf(grid, nu) + 1 - alpha, nu)
    length = 1 / grid - 1 / b
    away = np.abs(grid - tk.a) > 1e-3
    assert np.all(length[away] > best)
    assert best < rg.equal_tails_interval(n, alpha).length


def test_cohen_pieces():
    tk, shifted = rg.cohen_multipliers(10, 0.1, 1.2 * rg.tate_klett_interval(10, 0.1).a)
    assert shifted.length == pytest.approx(tk.length, rel=1e-13)
    assert shifted.hi < tk.hi
    same_tk, same = rg.cohen_multipliers(10, 0.1, rg.tate_klett_interval(10, 0.1).a)
    assert same.lo == pytest.approx(same_tk.lo, rel=1e-13) and same.hi == same_tk.hi
    with pytest.raises(rg.ConfigurationError):
        rg.cohen_multipliers(10, 0.1, 0.5 * rg.tate_klett_interval(10, 0.1).a)


@given(st.floats(0.01, 5.0), st.floats(1.0, 1.2), st.floats(-3, 3), st.floats(0.1, 40))
def test_cohen_interval_length(k, factor, mean, ss):
    from shrinkconf.shrinkers import UnivariateSample
    a = rg.tate_klett_interval(10, 0.1).a
    iv = rg.cohen_interval(UnivariateSample(10, mean, ss), 0.1, k, factor * a)
    assert iv.length == pytest.approx(ss * rg.tate_klett_interval(10, 0.1).length, rel=1e-12)


# --- invariants ------------------------------------------------------------------------

def _procedures(p):
    return [
        rg.Usual(p, 0.05), rg.PosPart(p, 0.05), rg.EmpiricalBayes(p, 0.05), rg.HeInterval(p, 0.05),
        rg.Faith(p, 0.05, a=0.5, b=2.0), rg.TsengBrownB(p, 0.05, tau2=1.0),
        rg.TsengBrownTB(p, 0.05, A=1.0, B=1.0), rg.Samworth(p, 0.05, w0=5.0, w2=0.8),
        rg.HPDOracle(p, 0.05, tau2=1.0),
    ]


@pytest.mark.parametrize("proc", _procedures(5), ids=lambda pr: pr.id)
def test_orthogonal_invariance(proc):
    rng = np.random.default_rng(17)
    p = proc.p
    for _ in range(100):
        q, r = np.linalg.qr(rng.normal(size=(p, p)))
        q = q * np.sign(np.diag(r))
        if proc.id == "he":
            # He's interval is coordinatewise; rotations fixing coordinate 0 only
            q[0, :] = 0
            q[:, 0] = 0
            q[0, 0] = 1
            sub, rr = np.linalg.qr(rng.normal(size=(p - 1, p - 1)))
            q[1:, 1:] = sub * np.sign(np.diag(rr))
        x = rng.normal(size=p) * rng.uniform(0.1, 4)
        theta = x + rng.normal(size=(20, p)) * 2
        a = proc.member(theta, x)
        b = proc.member(theta @ q.T, q @ x)
        assert np.array_equal(a, b)


@pytest.mark.parametrize("proc", [pr for pr in _procedures(4) if pr.explicit], ids=lambda pr: pr.id)
def test_duality_explicit(proc):
    rng = np.random.default_rng(23)
    for _ in range(50):
        x = rng.normal(size=4) * 2
        theta = x + rng.normal(size=(40, 4)) * 2
        reg = proc.region(x)
        assert np.array_equal(reg.member(theta), proc.member(theta, x))


def test_duality_tseng_brown_theta_section():
    proc = rg.TsengBrownB(3, 0.05, tau2=2.0)
    rng = np.random.default_rng(29)
    for _ in range(30):
        theta = rng.normal(size=3) * 2
        scale, lam = proc.scale_and_noncentrality(theta)
        k = stats.ncx2.ppf(0.95, 3, lam)
        x = scale * theta + rng.normal(size=(50, 3)) * 3
        in_theta_section = np.sum((x - scale * theta) ** 2, axis=1) <= k
        via_x = proc.member(theta, x)
        d = np.abs(np.sum((x - scale * theta) ** 2, axis=1) - k)
        assert np.all((in_theta_section == via_x) | (d < 1e-8))


@pytest.mark.parametrize("p", [3, 5])
def test_lemma_pospart_stays_within_c(p):
    rng = np.random.default_rng(p)
    c = math.sqrt(rg.chi2_cutoff(p, 0.05))
    n = 10**5
    u = rng.normal(size=(n, p))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    theta = u * c * rng.uniform(0, 1, size=(n, 1)) ** (1 / p) * (1 - 1e-12)
    v = rng.normal(size=(n, p))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    rad = c * rng.uniform(0, 1, size=(n, 1)) ** (1 / p)
    rad[: n // 10] = c  # boundary points
    x = theta + v * rad
    a = rng.uniform(0, 4 * (p - 2), size=(n, 1))
    a[a == 0] = 1e-3
    out = x * np.where(np.sum(x * x, 1, keepdims=True) > a, 1 - a / np.sum(x * x, 1, keepdims=True), 0.0)
    assert np.all(np.linalg.norm(out - theta, axis=1) <= c * (1 + 1e-12))


def test_pospart_far_shell_excluded():
    p = 4
    proc = rg.PosPart(p, 0.05, a=3.0)
    rng = np.random.default_rng(3)
    c = math.sqrt(proc.c2)
    for _ in range(500):
        theta = rng.normal(size=p)
        theta *= (c + rng.uniform(1e-6, 3)) / np.linalg.norm(theta)
        x = rng.normal(size=p)
        x *= math.sqrt(rng.uniform(0, 3.0)) / np.linalg.norm(x)
        assert not proc.member(theta, x)
        np.testing.assert_array_equal(positive_part(x, ShrinkConfig(a=3.0)), 0.0)


def test_make_procedure_lists_ids():
    with pytest.raises(rg.ConfigurationError, match="valid ids"):
        rg.make_procedure("nope", 3, 0.05)
    proc = rg.make_procedure("tseng_brown_B", 3, 0.05, tau2=2.0)
    assert proc.describe() == {"procedure": "tseng_brown_B", "p": 3, "alpha": 0.05, "tau2": 2.0}
    with pytest.raises(rg.ConfigurationError):
        rg.Usual(3, 1.5)


@given(st.integers(2, 40), st.floats(0.005, 0.4))
def test_default_a_prime_is_admissible(n, alpha):
    a = rg.tate_klett_interval(n, alpha).a
    ap = rg.default_a_prime(n, alpha)
    assert a < ap <= 1.02 * a * (1 + 1e-15)
    rg.cohen_multipliers(n, alpha, ap)
