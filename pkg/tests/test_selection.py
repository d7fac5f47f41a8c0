import numpy as np
import pytest
from hypothesis import given, strategies as st

from shrinkconf.evaluate.montecarlo import selection_block_sums
from shrinkconf.numkit import SeedSpec
from shrinkconf.regions import normal_cutoff
from shrinkconf.selection import SelectionScenario, run_scenario


def _draws(seed, n, p, mu=0.0, tau2=1.0):
    rng = np.random.default_rng(seed)
    theta = mu + np.sqrt(tau2) * rng.normal(size=(n, p))
    return theta, theta + rng.normal(size=(n, p))


def test_scenario_validation():
    sc = SelectionScenario(p=10, ranks=(10, 1, 5), bonferroni=True)
    assert sc.k == 3 and sc.level_alpha == pytest.approx(0.05 / 3)
    assert SelectionScenario(p=7).ranks == (7,)
    for bad in (dict(p=5, ranks=(1, 1)), dict(p=5, ranks=(0,)), dict(p=5, ranks=(6,)),
                dict(p=5, alpha=1.0), dict(p=5, tau2=-1.0)):
        with pytest.raises(ValueError):
            SelectionScenario(**bad)


@pytest.mark.parametrize("rule", ["naive", "he_selected"])
@given(seed=st.integers(0, 2**32 - 1))
def test_exchangeability(rule, seed):
    theta, x = _draws(seed, 200, 8)
    perm = np.random.default_rng(seed + 1).permutation(8)
    ranks = [1, 4, 8]
    a = selection_block_sums(theta, x, ranks, rule, 0.05)
    b = selection_block_sums(theta[:, perm], x[:, perm], ranks, rule, 0.05)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)


@pytest.mark.parametrize("rule", ["naive", "he_selected"])
def test_mirror_symmetry_paired(rule):
    theta, x = _draws(5, 5000, 12, mu=0.7)
    a = selection_block_sums(theta, x, [1, 12], rule, 0.05)
    b = selection_block_sums(-theta, -x, [12, 1], rule, 0.05)
    np.testing.assert_array_equal(a[:2], b[:2])
    np.testing.assert_allclose(a[2:4], b[2:4], rtol=1e-12)
    assert a[4] == b[4]


def test_mirror_symmetry_in_distribution():
    up = run_scenario(SelectionScenario(p=12, mu=1.0, ranks=(1,)), "naive", 10**5, SeedSpec(9, 0))
    down = run_scenario(SelectionScenario(p=12, mu=-1.0, ranks=(12,)), "naive", 10**5, SeedSpec(9, 1))
    d = up.per_rank[0]["coverage"] - down.per_rank[0]["coverage"]
    assert abs(d) <= 3 * np.hypot(up.per_rank[0]["std_error"], down.per_rank[0]["std_error"])


def test_rank_p_selects_max():
    theta, x = _draws(3, 50, 6)
    out = selection_block_sums(theta, x, [6], "naive", 0.05)
    c = normal_cutoff(0.05)
    j = np.argmax(x, axis=1)
    rows = np.arange(50)
    assert out[0] == np.sum(np.abs(theta[rows, j] - x[rows, j]) <= c)


def test_p1_no_selection():
    res = run_scenario(SelectionScenario(p=1, tau2=2.0), "naive", 10**6, SeedSpec(12, 0))
    r = res.per_rank[0]
    assert abs(r["coverage"] - 0.95) <= 3 * r["std_error"]
    assert res.simultaneous == r["coverage"]


@pytest.mark.parametrize("rule", ["naive", "he_selected"])
def test_bonferroni_rectangle(rule):
    sc = SelectionScenario(p=20, tau2=1.0, ranks=(1, 10, 20), bonferroni=True)
    res = run_scenario(sc, rule, 10**5, SeedSpec(13, 0))
    misses = sum(1 - r["coverage"] for r in res.per_rank)
    # the union bound holds exactly on empirical frequencies
    assert res.simultaneous >= 1 - misses - 1e-12
    assert res.simultaneous <= res.min_marginal


def test_he_rectangle_narrower_than_naive():
    sc = SelectionScenario(p=20, tau2=1.0, ranks=(1, 10, 20), bonferroni=True)
    c = normal_cutoff(sc.level_alpha)
    assert c > 1
    he = run_scenario(sc, "he_selected", 20000, SeedSpec(14, 0))
    naive = run_scenario(sc, "naive", 20000, SeedSpec(14, 0))
    for h, nv in zip(he.per_rank, naive.per_rank):
        assert h["mean_half_width"] < nv["mean_half_width"] == pytest.approx(c, rel=1e-12)


def test_naive_max_undercovers():
    res = run_scenario(SelectionScenario(p=100, tau2=0.0, ranks=(100,)), "naive", 10**5, SeedSpec(15, 0))
    r = res.per_rank[0]
    assert r["coverage"] < 0.95 - 3 * r["std_error"]


def test_run_scenario_deterministic():
    sc = SelectionScenario(p=15, tau2=2.0, ranks=(15, 1))
    a = run_scenario(sc, "he_selected", 40000, SeedSpec(16, 0), workers=1)
    b = run_scenario(sc, "he_selected", 40000, SeedSpec(16, 0), workers=3)
    assert a.per_rank == b.per_rank and a.simultaneous == b.simultaneous
