import numpy as np
import pytest

from spatex.model import ModelSpec, SiteSet, SkewFieldSpec, VariogramSpec


def random_cov(rng, D, lam=2.0, smooth=1.2):
    s = rng.uniform(0.0, 4.0, (D, 2))
    g = lambda h: (np.linalg.norm(h, axis=-1) / lam) ** smooth
    return g(s)[:, None] + g(s)[None, :] - g(s[:, None] - s[None])


def random_corr(rng, D, scale=2.0):
    s = rng.uniform(0.0, 3.0, (D, 2))
    return np.exp(-np.linalg.norm(s[:, None] - s[None], axis=-1) / scale)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def grid4():
    return SiteSet.grid(2)


@pytest.fixture(scope="session")
def specs4(grid4):
    skew = SkewFieldSpec(np.array([[1.0, 1.0], [2.0, 2.0]]), np.array([-1.0, -2.0]), 2.0)
    return {
        "br": ModelSpec("br", grid4, VariogramSpec(2.0)),
        "sbr": ModelSpec("sbr", grid4, VariogramSpec(2.0), skew=skew),
        "tet": ModelSpec("tet", grid4, VariogramSpec(2.0), nu=2.0, cdf_tol=1e-4),
    }
