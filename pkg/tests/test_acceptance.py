"""Acceptance suite: one test per criterion, at the stated tolerances."""

import math
import time

import numpy as np
import pytest
from scipy import stats

from spatex.dependence import depmap, empirical_theta2, pair_theta2, theta2_br, theta2_et, theta2_sbr, theta2_tet
from spatex.dist import inclusion_exclusion_rect, mvn_cdf, mvt_cdf, trunc_mvn_cdf, trunc_mvt_cdf
from spatex.inference import ObservationSet, ThresholdConfig, fit
from spatex.model import (
    BrownResnick,
    ModelSpec,
    SiteSet,
    SkewBrownResnick,
    SkewFieldSpec,
    TruncatedExtremalT,
    VariogramSpec,
    tet_normalizers,
)
from spatex.oracle import finite_diff_partial, kappa_quadrature, spectral_logpdf
from spatex.simulate import RiskSpec, acceptance_rates, sample_maxstable, sample_rpareto_l1, table_grid_model

from conftest import random_corr, random_cov


def random_model(rng, variant, D, cdf_tol=None):
    if variant == "br":
        return BrownResnick(random_cov(rng, D), cdf_tol)
    if variant == "sbr":
        return SkewBrownResnick(random_cov(rng, D), rng.normal(0, 1.0, D), cdf_tol)
    return TruncatedExtremalT(random_corr(rng, D), rng.uniform(0.5, 4.0), cdf_tol)


# ---------------------------------------------------------------- 1


TABLE = [(4, 2, 59.0, 59.0), (4, 3, 13.0, 52.0), (16, 3, 1.80, 29.0), (64, 2, 25.0, 25.0),
         (100, 5, None, 14.0)]


@pytest.mark.slow
def test_c01_acceptance_table():
    for D, p, base_ref, scaled_ref in TABLE:
        t0 = time.perf_counter()
        base, scaled = acceptance_rates(table_grid_model(D), RiskSpec("lp", p), 100_000, seed=D * 10 + p)
        assert time.perf_counter() - t0 < 600
        assert scaled == pytest.approx(scaled_ref, abs=1.0), (D, p)
        if base_ref is not None:
            assert base == pytest.approx(base_ref, abs=1.0), (D, p)


# ---------------------------------------------------------------- 2


@pytest.mark.parametrize("variant", ["br", "sbr", "tet"])
def test_c02_intensity_matches_quadrature(variant):
    rng = np.random.default_rng({"br": 1, "sbr": 2, "tet": 3}[variant])
    for D in (2, 3):
        for _ in range(20):
            m = random_model(rng, variant, D)
            x = rng.uniform(0.3, 3.0, D)
            ref = kappa_quadrature(spectral_logpdf(m), x, tol=1e-9)
            assert ref.ok
            assert m.intensity(x) == pytest.approx(ref.value, rel=1e-4)


# ---------------------------------------------------------------- 3


@pytest.mark.parametrize("variant", ["sbr", "tet"])
def test_c03_partials_and_boundary(variant):
    rng = np.random.default_rng({"sbr": 4, "tet": 5}[variant])
    for size in (1, 2):
        for _ in range(10):
            m = random_model(rng, variant, 3)
            x = rng.uniform(0.5, 2.5, 3)
            B = sorted(rng.choice(3, size, replace=False))
            ref = finite_diff_partial(lambda y: -m.exponent(y), x, B)
            assert m.partial(x, B) == pytest.approx(ref.value, rel=1e-3)
    # boundary continuity: the partial over B vanishes as the other coordinates shrink
    for _ in range(5):
        m = random_model(rng, variant, 3)
        if variant == "tet":
            m = TruncatedExtremalT(m.corr, 0.5)
        for B in ([0], [0, 2]):
            xb = rng.uniform(0.8, 1.5, len(B))
            vals = []
            for eps in (1e-1, 1e-2, 1e-3, 1e-4):
                x = np.full(3, eps)
                x[B] = xb
                vals.append(m.partial(x, B))
            assert np.all(np.diff(vals) < 0), vals
            assert vals[-1] < 1e-6


# ---------------------------------------------------------------- 4


@pytest.mark.parametrize("variant", ["br", "sbr", "tet"])
@pytest.mark.parametrize("D", [2, 5, 10])
def test_c04_homogeneity(variant, D):
    # cdf tolerance is loose here: scaling leaves the cdf arguments unchanged
    rng = np.random.default_rng(100 * D + len(variant))
    n_models = 2 if D == 10 else 5
    for _ in range(n_models):
        m = random_model(rng, variant, D, 1e-4)
        for _ in range(50 // n_models):
            x = rng.uniform(0.3, 3.0, D)
            t = rng.uniform(0.2, 5.0)
            assert m.exponent(t * x) * t == pytest.approx(m.exponent(x), rel=1e-9)
            assert m.intensity(t * x) * t ** (D + 1) == pytest.approx(m.intensity(x), rel=1e-9)


# ---------------------------------------------------------------- 5


def test_c05_reduction_identities():
    rng = np.random.default_rng(6)
    for D in (2, 3, 4):
        for _ in range(5):
            cov = random_cov(rng, D)
            br, sbr = BrownResnick(cov), SkewBrownResnick(cov, np.zeros(D))
            x = rng.uniform(0.3, 3.0, D)
            B = sorted(rng.choice(D, rng.integers(1, D + 1), replace=False))
            assert sbr.exponent(x) == pytest.approx(br.exponent(x), rel=1e-10)
            assert sbr.intensity(x) == pytest.approx(br.intensity(x), rel=1e-10)
            assert sbr.partial(x, B) == pytest.approx(br.partial(x, B), rel=1e-10)
    for _ in range(20):
        cov = random_cov(rng, 2)
        g = (cov[0, 0] + cov[1, 1] - 2 * cov[0, 1]) / 2
        assert theta2_sbr(cov, np.zeros(2)) == pytest.approx(theta2_br(g), abs=1e-10)
        assert theta2_br(g) == pytest.approx(2 * stats.norm.cdf(math.sqrt(g / 2)), abs=1e-12)
    t2 = stats.t.cdf(math.sqrt(2), 2)
    assert theta2_tet(0.0, 1.0) == pytest.approx(4 * t2 - 2, abs=1e-12)
    assert theta2_tet(0.0, 1.0) == pytest.approx(1.41421, abs=1e-5)
    assert theta2_et(0.0, 1.0) == pytest.approx(2 * t2, abs=1e-12)
    assert theta2_et(0.0, 1.0) == pytest.approx(1.70711, abs=1e-5)


@pytest.mark.xfail(strict=True, reason="2*Phi(sqrt(g)/2) is the coefficient when g is the variogram; "
                                       "with g the semivariogram the coefficient is 2*Phi(sqrt(g/2)), "
                                       "which criteria 1 and 6 confirm (see the decisions ledger)")
def test_c05_literal_br_coefficient_form():
    rng = np.random.default_rng(7)
    cov = random_cov(rng, 2)
    g = (cov[0, 0] + cov[1, 1] - 2 * cov[0, 1]) / 2
    assert theta2_sbr(cov, np.zeros(2)) == pytest.approx(2 * stats.norm.cdf(math.sqrt(g) / 2), abs=1e-10)


# ---------------------------------------------------------------- 6


def test_c06_simulation_fidelity(specs4):
    frechet = lambda t: np.exp(-1.0 / t)
    pareto = lambda t: np.where(t > 1, 1.0 - 1.0 / t, 0.0)
    for name, spec in specs4.items():
        z = sample_maxstable(spec, 10_000, seed=61).samples
        for j in range(4):
            assert stats.kstest(z[:, j], frechet).statistic < 0.02, (name, j)
        for i, j in [(0, 1), (0, 3), (1, 2)]:
            assert empirical_theta2(z, i, j) == pytest.approx(pair_theta2(spec, i, j), abs=0.05), (name, i, j)
        y = sample_rpareto_l1(spec, 10_000, seed=62).samples
        assert stats.kstest(y.sum(axis=1), pareto).statistic < 0.02, name


# ---------------------------------------------------------------- 7 and 8


TRUE_LAM, TRUE_SMOOTH, TRUE_B = 3.0, 1.0, (-1.0, -2.0)


@pytest.fixture(scope="module")
def recovery_fits():
    sites = SiteSet.grid(8)
    skew = SkewFieldSpec([[2.5, 2.5], [6.5, 6.5]], list(TRUE_B), 4.0)
    truth = ModelSpec("sbr", sites, VariogramSpec(TRUE_LAM, TRUE_SMOOTH), skew=skew)
    sbr_start = truth.replace(vario=VariogramSpec(2.0, 0.8), skew=skew.with_coef([0.0, 0.0]))
    br_start = ModelSpec("br", sites, VariogramSpec(2.0, 0.8))
    threshold = ThresholdConfig(q=0.95)
    out = []
    for rep in range(20):
        z = sample_rpareto_l1(truth, 1000, seed=700 + rep).samples
        data = ObservationSet.from_array(z, "frechet", sites)
        f_sbr = fit(sbr_start, data, RiskSpec("l1"), threshold, seed=rep)
        f_br = fit(br_start, data, RiskSpec("l1"), threshold, seed=rep) if rep < 10 else None
        out.append((f_sbr, f_br))
    return out


@pytest.mark.slow
def test_c07_parameter_recovery(recovery_fits):
    lam = np.array([f.estimates["lam"] for f, _ in recovery_fits])
    smooth = np.array([f.estimates["smooth"] for f, _ in recovery_fits])
    signs = sum(f.estimates["b1"] < 0 and f.estimates["b2"] < 0 for f, _ in recovery_fits)
    assert len(recovery_fits) == 20
    assert abs(np.median(lam / TRUE_LAM - 1)) <= 0.15
    assert abs(np.median(smooth / TRUE_SMOOTH - 1)) <= 0.15
    assert signs >= 16


@pytest.mark.slow
def test_c08_model_selection(recovery_fits):
    pairs = [(s.aic, b.aic) for s, b in recovery_fits if b is not None]
    assert len(pairs) == 10
    diff = np.array([s - b for s, b in pairs])
    assert np.median(diff) <= 0
    assert np.median([s for s, _ in pairs]) <= np.median([b for _, b in pairs])


# ---------------------------------------------------------------- 9


def test_c09_distribution_cross_checks():
    assert mvn_cdf(None, [0, 0], None, [[1, 0.5], [0.5, 1]]).value == pytest.approx(1 / 3, abs=1e-5)
    rng = np.random.default_rng(9)
    for D in (1, 2, 3, 4):
        corr = random_corr(rng, D)
        mean = rng.normal(0, 0.5, D)
        y = rng.uniform(0.3, 2.5, D)
        num = inclusion_exclusion_rect(lambda u: mvn_cdf(None, u, mean, corr, 1e-10).value, y)
        den = mvn_cdf(np.zeros(D), np.full(D, np.inf), mean, corr, 1e-10).value
        assert trunc_mvn_cdf(y, mean, corr, target_abs_err=1e-10) == pytest.approx(num / den, abs=1e-6)
        if D <= 3:
            df = rng.uniform(1.5, 6.0)
            num = inclusion_exclusion_rect(lambda u: mvt_cdf(u, mean, corr, df, 1e-10).value, y)
            den = mvt_cdf(np.full(D, np.inf), mean, corr, df, 1e-10, lower=np.zeros(D)).value
            assert trunc_mvt_cdf(y, mean, corr, df, target_abs_err=1e-10) == pytest.approx(num / den, abs=1e-6)
    one = ModelSpec("tet", SiteSet([[0.0, 0.0]]), VariogramSpec(1.0), nu=2.0)
    assert tet_normalizers(one)[0] == pytest.approx(1.0, abs=1e-8)


# ---------------------------------------------------------------- 10


def test_c10_nonstationarity_witness():
    # stands in for the real-data tables, which are not reproducible here
    sites = SiteSet.grid(33, start=0.5, step=1.0)
    skew = SkewFieldSpec([[8.0, 8.0], [24.0, 24.0]], [-1.0, -2.0], 64.0,
                         0.1 * (sites.coords[:, 1] >= 16))
    spec = ModelSpec("sbr", sites, VariogramSpec(8.0), skew=skew)
    index = {tuple(c): k for k, c in enumerate(sites.coords)}
    a = depmap(spec, index[(10.5, 10.5)]).theta
    b = depmap(spec, index[(26.5, 26.5)]).theta
    shift = np.array([16.0, 16.0])
    gaps = [abs(a[k] - b[index[tuple(c + shift)]]) for k, c in enumerate(sites.coords)
            if tuple(c + shift) in index]
    assert max(gaps) > 0.05
