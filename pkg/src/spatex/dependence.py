"""Pairwise extremal coefficients: closed forms, empirical estimators and
maps of the coefficient against a reference site."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .dist.mvn import _bvn_rect
from .errors import DataError, DomainError
from .model.geometry import xi_from_eta
from .model.spec import ModelSpec

MIN_PAIRS = 30


def theta2_br(gamma12: float) -> float:
    """Brown-Resnick coefficient from the semivariogram value gamma12.

    The Gaussian increment Y_1 - Y_2 has variance 2 * gamma12, giving
    2 Phi(sqrt(gamma12 / 2)).
    """
    g = float(gamma12)
    if not g >= 0:
        raise DomainError("semivariogram value must be nonnegative")
    return float(2.0 * special.ndtr(math.sqrt(g / 2.0)))


def theta2_sbr(cov2, xi2) -> float:
    cov2 = np.asarray(cov2, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    if cov2.shape != (2, 2) or xi2.shape != (2,):
        raise DomainError("need a 2x2 covariance and a 2-vector")
    if np.any(np.abs(xi2) >= np.sqrt(np.diag(cov2))):
        raise DomainError("xi outside its admissible range")
    g = (cov2[0, 0] + cov2[1, 1] - 2.0 * cov2[0, 1]) / 2.0
    if not g > 0:
        raise DomainError("covariance must be positive definite")
    lphi = special.log_ndtr(xi2)
    total = 0.0
    for i, j in ((0, 1), (1, 0)):
        upper = np.array([(lphi[j] - lphi[i] + g) / math.sqrt(2.0 * g), xi2[i]])
        r = (xi2[i] - xi2[j]) / math.sqrt(2.0 * g)
        # standardized second coordinate has unit variance already
        p = _bvn_rect(np.array([-np.inf, -np.inf]), upper, float(r))
        total += p / math.exp(lphi[i])
    return float(min(2.0, max(1.0, total)))


def _check_rho(rho):
    rho = float(rho)
    if not -1.0 <= rho <= 1.0:
        raise DomainError("correlation must lie in [-1, 1]")
    return rho


def theta2_tet(rho: float, nu: float) -> float:
    rho = _check_rho(rho)
    if not nu > 0:
        raise DomainError("nu must be positive")
    if rho == 1.0:
        return 1.0
    if rho == -1.0:
        return 2.0
    df = nu + 1.0
    k = math.sqrt(df / (1.0 - rho * rho))
    # survival form keeps precision when the denominator is small
    lower_sf = special.stdtr(df, rho * k)
    upper_sf = special.stdtr(df, -(1.0 - rho) * k)
    val = 2.0 * (lower_sf - upper_sf) / lower_sf
    return float(min(2.0, max(1.0, val)))


def theta2_et(rho: float, nu: float) -> float:
    rho = _check_rho(rho)
    if not nu > 0:
        raise DomainError("nu must be positive")
    if rho == 1.0:
        return 1.0
    if rho == -1.0:
        return 2.0
    df = nu + 1.0
    return float(2.0 * special.stdtr(df, (1.0 - rho) * math.sqrt(df / (1.0 - rho * rho))))


# ---------------------------------------------------------------- empirical


def _columns(data):
    values = getattr(data, "values", data)
    values = np.asarray(values, dtype=float)
    mask = getattr(data, "missing", None)
    if mask is None:
        mask = np.isnan(values)
    return values, np.asarray(mask, dtype=bool)


def madogram_theta2(x, y) -> float:
    """F-madogram estimator on complete pairs, clipped to [1, 2]."""
    n = x.size
    fx = stats.rankdata(x) / (n + 1.0)
    fy = stats.rankdata(y) / (n + 1.0)
    nu = 0.5 * np.mean(np.abs(fx - fy))
    theta = (1.0 + 2.0 * nu) / (1.0 - 2.0 * nu)
    return float(min(2.0, max(1.0, theta)))


def empirical_theta2(data, i: int, j: int, mode: str = "madogram", u: float | None = None,
                     risk=None) -> float:
    """Empirical pairwise coefficient between columns i and j.

    ``mode='madogram'`` suits block maxima.  ``mode='exceedance'`` uses
    rows with r(x) > u and returns 2 - Pr(X_i > u | X_j > u).
    """
    values, missing = _columns(data)
    both = ~(missing[:, i] | missing[:, j])
    if both.sum() < MIN_PAIRS:
        raise DataError(f"only {int(both.sum())} complete pairs for sites {i},{j}; need {MIN_PAIRS}")
    if mode == "madogram":
        return madogram_theta2(values[both, i], values[both, j])
    if mode != "exceedance":
        raise DomainError(f"unknown estimator mode {mode!r}")
    if u is None or not u > 0:
        raise DomainError("exceedance mode needs a positive level u")
    rows = both
    if risk is not None:
        filled = np.where(missing, 0.0, values)
        rows = rows & (risk(filled) > u)
    xi, xj = values[rows, i], values[rows, j]
    cond = xj > u
    if cond.sum() == 0:
        raise DataError(f"no exceedances of u={u:g} at site {j}")
    ratio = float(np.mean(xi[cond] > u))
    return float(min(2.0, max(1.0, 2.0 - ratio)))


# ---------------------------------------------------------------- maps


@dataclass
class DepMap:
    reference: int
    coords: np.ndarray
    theta: np.ndarray
    source: str

    def to_csv(self, path) -> None:
        from .io import fmt

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["site_x", "site_y", "theta2", "source"])
            for (sx, sy), t in zip(self.coords, self.theta):
                w.writerow([fmt(sx), fmt(sy), fmt(t), self.source])


def pair_theta2(m: ModelSpec, i: int, j: int) -> float:
    """Closed-form coefficient between sites i and j of a model."""
    if i == j:
        return 1.0
    if m.variant == "tet":
        return theta2_tet(m.cov[i, j], m.nu)
    cov = m.cov
    g = (cov[i, i] + cov[j, j] - 2.0 * cov[i, j]) / 2.0
    if m.variant == "br":
        return theta2_br(g)
    xi = xi_from_eta(m.eta, cov)
    idx = [i, j]
    return theta2_sbr(cov[np.ix_(idx, idx)], xi[idx])


def depmap(source, reference: int, mode: str = "madogram", u: float | None = None, risk=None,
           sites=None) -> DepMap:
    """Coefficient of every site against ``reference``.

    ``source`` is a ModelSpec (closed forms) or an observation set
    (empirical estimator given by ``mode``).
    """
    if isinstance(source, ModelSpec):
        D = source.dim
        if not 0 <= reference < D:
            raise DomainError("reference site out of range")
        theta = np.array([pair_theta2(source, reference, j) for j in range(D)])
        return DepMap(reference, source.sites.coords, theta, f"analytic-{source.variant}")
    sites = getattr(source, "sites", None) if sites is None else sites
    if sites is None:
        raise DomainError("empirical maps need site coordinates")
    D = sites.dim
    if not 0 <= reference < D:
        raise DomainError("reference site out of range")
    theta = np.array([1.0 if j == reference else
                      empirical_theta2(source, j, reference, mode, u, risk) for j in range(D)])
    return DepMap(reference, sites.coords, theta, f"empirical-{mode}")
