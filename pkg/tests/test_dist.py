import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from spatex.dist import (
    EsnParams,
    esn_cdf,
    esn_mean,
    esn_pdf,
    inclusion_exclusion_rect,
    mvn_cdf,
    mvt_cdf,
    sample_esn,
    sample_trunc_mvn,
    sample_trunc_mvt,
    trunc_mvn_cdf,
    trunc_mvt_cdf,
)
from spatex.errors import DomainError, NotPositiveDefiniteError, UnderflowError

from conftest import random_corr


# ---------------------------------------------------------------- mvn / mvt


def test_mvn_univariate_half():
    r = mvn_cdf([-np.inf], [0.0], [0.0], [[1.0]])
    assert r.value == pytest.approx(0.5, abs=1e-15)


def test_mvn_bivariate_orthant_closed_form():
    r = mvn_cdf(None, [0, 0], None, [[1, 0.5], [0.5, 1]])
    assert r.value == pytest.approx(0.25 + math.asin(0.5) / (2 * math.pi), abs=1e-12)
    assert r.value == pytest.approx(1 / 3, abs=1e-12)


def test_mvn_diagonal_factorizes():
    r = mvn_cdf(None, np.zeros(5), None, np.diag([1.0, 2.0, 3.0, 4.0, 5.0]))
    assert r.value == pytest.approx(0.5 ** 5, abs=1e-14)


@pytest.mark.parametrize("d", [3, 4, 6])
def test_mvn_matches_scipy(rng, d):
    corr = random_corr(rng, d)
    lo = rng.uniform(-2, 0, d)
    hi = lo + rng.uniform(0.5, 3, d)
    ours = mvn_cdf(lo, hi, None, corr, 1e-6, seed=1)
    ref = stats.multivariate_normal.cdf(hi, np.zeros(d), corr, maxpts=2_000_000, abseps=1e-8,
                                        releps=1e-8, lower_limit=lo)
    assert ours.value == pytest.approx(ref, abs=1e-5)
    assert ours.error_estimate >= 0


def test_mvn_deterministic_and_seeded(rng):
    corr = random_corr(rng, 6)
    a = mvn_cdf(None, np.ones(6), None, corr, 1e-5, seed=3)
    b = mvn_cdf(None, np.ones(6), None, corr, 1e-5, seed=3)
    assert a == b


def test_mvn_errors():
    with pytest.raises(DomainError):
        mvn_cdf([1.0], [0.0], None, [[1.0]])
    with pytest.raises(NotPositiveDefiniteError):
        mvn_cdf(None, [0, 0], None, [[1, 2], [2, 1]])


def test_mvn_monotone_and_partition(rng):
    corr = random_corr(rng, 4)
    full = mvn_cdf([-1, -1, -1, -1], [1, 1, 1, 1], None, corr, 1e-7).value
    left = mvn_cdf([-1, -1, -1, -1], [0.2, 1, 1, 1], None, corr, 1e-7).value
    right = mvn_cdf([0.2, -1, -1, -1], [1, 1, 1, 1], None, corr, 1e-7).value
    assert left < full
    assert left + right == pytest.approx(full, abs=5e-6)


def test_mvt_univariate_df2():
    r = mvt_cdf([math.sqrt(2)], [0.0], [[1.0]], 2.0)
    assert r.value == pytest.approx(0.5 + math.sqrt(2) / (2 * math.sqrt(4)), abs=1e-12)
    assert mvt_cdf([0.0], [0.0], [[1.0]], 5.0).value == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("rho", [-0.6, 0.0, 0.3, 0.9])
def test_mvt_centred_orthant_equals_normal(rho):
    cov = [[1, rho], [rho, 1]]
    assert mvt_cdf([0, 0], None, cov, 3.0).value == pytest.approx(
        mvn_cdf(None, [0, 0], None, cov).value, abs=1e-10)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_mvt_large_df_approaches_normal(rng, d):
    corr = random_corr(rng, d)
    hi = rng.uniform(-0.5, 1.5, d)
    t = mvt_cdf(hi, None, corr, 1e6, 1e-5)
    n = mvn_cdf(None, hi, None, corr, 1e-5)
    assert t.value == pytest.approx(n.value, abs=1e-4)


def test_mvt_matches_scipy(rng):
    corr = random_corr(rng, 4)
    hi = rng.uniform(0, 2, 4)
    ours = mvt_cdf(hi, None, corr, 4.0, 1e-5)
    ref = stats.multivariate_t(np.zeros(4), corr, df=4).cdf(hi, maxpts=4_000_000, random_state=1)
    assert ours.value == pytest.approx(ref, abs=5e-5)


# ---------------------------------------------------------------- truncated


def test_trunc_cdf_at_infinity_is_one(rng):
    corr = random_corr(rng, 3)
    assert trunc_mvn_cdf(np.full(3, np.inf), np.zeros(3), corr) == pytest.approx(1.0, abs=1e-12)
    assert trunc_mvt_cdf(np.full(2, np.inf), [0.3, -0.2], corr[:2, :2], 3.0) == pytest.approx(1.0, abs=1e-12)


def test_trunc_univariate_values():
    assert trunc_mvn_cdf([1.0], [0.0], [[1.0]]) == pytest.approx(0.682689492, abs=1e-8)
    assert trunc_mvt_cdf([math.sqrt(2)], [0.0], [[1.0]], 2.0) == pytest.approx(0.70710678, abs=1e-7)


def test_trunc_negative_y_rejected():
    with pytest.raises(DomainError):
        trunc_mvn_cdf([-1.0, 1.0], [0, 0], np.eye(2))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_trunc_mvn_matches_inclusion_exclusion(rng, d):
    corr = random_corr(rng, d)
    mean = rng.normal(0, 0.5, d)
    y = rng.uniform(0.3, 2.5, d)
    cdf = lambda u: mvn_cdf(None, u, mean, corr, 1e-9).value
    oracle = inclusion_exclusion_rect(cdf, y) / mvn_cdf(np.zeros(d), np.full(d, np.inf), mean, corr, 1e-9).value
    assert trunc_mvn_cdf(y, mean, corr, target_abs_err=1e-9) == pytest.approx(oracle, abs=1e-6)


def test_trunc_mvt_matches_inclusion_exclusion(rng):
    corr = random_corr(rng, 2)
    mean = np.array([0.4, -0.3])
    y = np.array([1.2, 0.7])
    cdf = lambda u: mvt_cdf(u, mean, corr, 3.0).value
    den = mvt_cdf(np.full(2, np.inf), mean, corr, 3.0, lower=np.zeros(2)).value
    assert trunc_mvt_cdf(y, mean, corr, 3.0) == pytest.approx(inclusion_exclusion_rect(cdf, y) / den, abs=1e-6)


def test_trunc_sampler_half_normal_mean():
    x = sample_trunc_mvn([0.0], [[1.0]], 100_000, seed=5)
    assert x.min() >= 0
    assert x.mean() == pytest.approx(math.sqrt(2 / math.pi), abs=4 * 0.6028 / math.sqrt(1e5))


def test_trunc_sampler_bivariate_marginal_ks():
    mean = np.array([0.2, -0.4])
    cov = np.array([[1.0, 0.6], [0.6, 1.5]])
    x = sample_trunc_mvn(mean, cov, 100_000, seed=7)
    den = mvn_cdf(np.zeros(2), np.full(2, np.inf), mean, cov).value

    def marg_cdf(v):
        return np.array([mvn_cdf([0, 0], [t, np.inf], mean, cov).value / den for t in np.atleast_1d(v)])

    grid = np.quantile(x[:, 0], np.linspace(0.01, 0.99, 60))
    emp = np.searchsorted(np.sort(x[:, 0]), grid, side="right") / x.shape[0]
    assert np.max(np.abs(emp - marg_cdf(grid))) < 0.02


def test_trunc_gibbs_agrees_with_exact(rng):
    corr = random_corr(rng, 4)
    mean = np.array([0.3, -0.2, 0.1, 0.0])
    a = sample_trunc_mvn(mean, corr, 20_000, seed=1, method="exact")
    b = sample_trunc_mvn(mean, corr, 20_000, seed=2, method="gibbs")
    assert b.min() >= 0
    for j in range(4):
        assert stats.ks_2samp(a[:, j], b[:, j]).statistic < 0.03


def test_trunc_t_sampler_support_and_seed():
    a = sample_trunc_mvt([0.1, 0.2], np.eye(2), 3.0, 1000, seed=4)
    b = sample_trunc_mvt([0.1, 0.2], np.eye(2), 3.0, 1000, seed=4)
    assert a.min() >= 0
    assert np.array_equal(a, b)


# ---------------------------------------------------------------- extended skew-normal


def _esn(rng, d=2, tau=0.4):
    A = rng.normal(size=(d, d))
    return EsnParams(rng.normal(size=d), A @ A.T + 0.5 * np.eye(d), rng.normal(size=d), tau)


def test_esn_zero_slant_is_gaussian(rng):
    p = EsnParams(np.zeros(2), np.array([[1, 0.3], [0.3, 2]]), np.zeros(2), 0.0)
    x = np.array([0.3, -0.5])
    g = stats.multivariate_normal(np.zeros(2), p.cov)
    assert esn_pdf(x, p) == pytest.approx(g.pdf(x), rel=1e-12)
    assert esn_cdf(x, p) == pytest.approx(mvn_cdf(None, x, None, p.cov).value, abs=1e-10)


def test_esn_cdf_at_infinity(rng):
    assert esn_cdf(np.full(2, np.inf), _esn(rng)) == pytest.approx(1.0, abs=1e-12)


def test_esn_univariate_cdf_vs_quadrature(rng):
    for _ in range(10):
        p = EsnParams([rng.normal()], [[rng.uniform(0.5, 3)]], [rng.normal(0, 2)], rng.normal())
        x = rng.normal()
        q, _ = integrate.quad(lambda t: float(esn_pdf([t], p)), -np.inf, x, epsabs=1e-12)
        assert esn_cdf([x], p) == pytest.approx(q, abs=1e-6)


def test_esn_pdf_integrates_to_one(rng):
    p = _esn(rng)
    val, _ = integrate.dblquad(lambda y, x: float(esn_pdf([x, y], p)), -15, 15, -15, 15, epsabs=1e-8)
    assert val == pytest.approx(1.0, abs=1e-5)


def test_esn_underflow_guard():
    with pytest.raises(UnderflowError):
        EsnParams([0.0], [[1.0]], [1.0], -60.0).log_norm


def test_esn_sampling_moments(rng):
    p = EsnParams(np.array([1.0, -1.0]), np.eye(2), np.zeros(2), 0.0)
    x = sample_esn(p, 100_000, seed=1)
    assert np.all(np.abs(x.mean(axis=0) - p.mu) < 4 / math.sqrt(1e5))
    q = _esn(rng, tau=-0.7)
    y = sample_esn(q, 100_000, seed=2)
    se = y.std(axis=0) / math.sqrt(1e5)
    assert np.all(np.abs(y.mean(axis=0) - esn_mean(q)) < 4 * se)
    for _ in range(5):
        pt = q.mu + rng.normal(size=2)
        emp = np.mean(np.all(y <= pt, axis=1))
        assert emp == pytest.approx(esn_cdf(pt, q), abs=4 * math.sqrt(0.25 / 1e5))


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-0.95, 0.95))
def test_bvn_in_unit_interval_and_monotone(a, b, r):
    cov = [[1, r], [r, 1]]
    lo = mvn_cdf(None, [a, b], None, cov).value
    hi = mvn_cdf(None, [a + 0.5, b], None, cov).value
    assert 0.0 <= lo <= hi + 1e-15 <= 1.0 + 1e-15


def test_trivariate_t_tight_tolerance_is_deterministic():
    corr = np.array([[1, 0.3, 0.2], [0.3, 1, -0.4], [0.2, -0.4, 1]])
    mean, y = np.array([0.2, -0.3, 0.1]), np.array([1.0, 2.0, 0.7])
    tight = mvt_cdf(y, mean, corr, 3.0, 1e-10, lower=np.zeros(3))
    qmc = mvt_cdf(y, mean, corr, 3.0, 1e-6, lower=np.zeros(3))
    assert tight.converged and tight.error_estimate < 1e-10
    assert tight.value == pytest.approx(qmc.value, abs=4 * qmc.error_estimate)
    ref = stats.multivariate_t(mean, corr, df=3.0).cdf(y, lower_limit=np.zeros(3), maxpts=4_000_000,
                                                       random_state=1)
    assert tight.value == pytest.approx(ref, abs=1e-5)
