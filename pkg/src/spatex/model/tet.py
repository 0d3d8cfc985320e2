"""Truncated extremal-t model.

W = Y^nu / a with Y a unit-variance Gaussian vector conditioned on the
nonnegative orthant and a_k = E Y_k^nu.  Every quantity reduces to
Student-t probabilities of rectangles [0, c].
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..dist.mvn import mvn_cdf, mvt_cdf
from ..errors import DomainError
from .base import ExponentModel, check_point, check_subset, complement

_LOG_PI = math.log(math.pi)
_LOG_2 = math.log(2.0)


class TruncatedExtremalT(ExponentModel):
    def __init__(self, corr, nu: float, cdf_tol: float | None = None, seed: int = 0):
        corr = np.atleast_2d(np.asarray(corr, dtype=float))
        if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
            raise DomainError("truncated extremal-t needs a correlation matrix")
        if not nu > 0:
            raise DomainError("nu must be positive")
        self.corr = corr
        self.nu = float(nu)
        self.dim = corr.shape[0]
        self.cdf_tol = cdf_tol
        self.seed = seed
        L = np.linalg.cholesky(corr)
        self.logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
        inv = np.linalg.inv(corr)
        self.prec = (inv + inv.T) / 2.0
        D = self.dim
        self.orthant = mvn_cdf(np.zeros(D), np.full(D, np.inf), None, corr, cdf_tol, seed).value
        self._cond = [self._conditional(k) for k in range(D)]
        self.tail_mass = np.array([self._tcdf(np.full(D - 1, np.inf), k) for k in range(D)])
        self.log_moment_const = ((self.nu - 2) / 2 * _LOG_2 + special.gammaln((self.nu + 1) / 2)
                                 - 0.5 * _LOG_PI)
        self.a = np.exp(self.log_moment_const - math.log(self.orthant) + np.log(self.tail_mass))
        self.log_a = np.log(self.a)

    def _conditional(self, k):
        others = np.delete(np.arange(self.dim), k)
        rho = self.corr[others, k]
        resid = self.corr[np.ix_(others, others)] - np.outer(rho, rho)
        return others, rho, resid / (self.nu + 1.0)

    def _tcdf(self, upper, k):
        if self.dim == 1:
            return 1.0
        _, rho, scale = self._cond[k]
        return mvt_cdf(upper, rho, scale, self.nu + 1.0, self.cdf_tol, self.seed,
                       lower=np.zeros(self.dim - 1)).value

    def normalizers(self) -> np.ndarray:
        return self.a.copy()

    def exponent(self, x) -> float:
        x = check_point(x, self.dim)
        if self.dim == 1:
            return 1.0 / x[0]
        lxo = np.log(x) + self.log_a
        total = 0.0
        for k in range(self.dim):
            if np.isinf(x[k]):
                continue
            others = self._cond[k][0]
            upper = np.exp((lxo[others] - lxo[k]) / self.nu)
            total += self._tcdf(upper, k) / (x[k] * self.tail_mass[k])
        return total

    def _log_block(self, lx, idx):
        nu = self.nu
        return float(np.sum(self.log_a[idx] / nu + (1.0 / nu - 1.0) * lx[idx]))

    def log_intensity(self, x) -> float:
        x = check_point(x, self.dim, allow_inf=False)
        nu, D = self.nu, self.dim
        lx = np.log(x)
        y = np.exp((lx + self.log_a) / nu)
        quad = float(y @ self.prec @ y)
        return (self._log_block(lx, np.arange(D)) + (1 - D) * math.log(nu) - math.log(self.orthant)
                - 0.5 * self.logdet - 0.5 * D * _LOG_PI + (nu / 2 - 1) * _LOG_2
                + special.gammaln((D + nu) / 2) - (D + nu) / 2 * math.log(quad))

    def log_partial(self, x, subset) -> float:
        x = check_point(x, self.dim)
        b = check_subset(subset, self.dim)
        if b.size == self.dim:
            return self.log_intensity(x)
        if np.any(np.isinf(x[b])):
            raise DomainError("coordinates in the derivative set must be finite")
        nb = complement(b, self.dim)
        nu = self.nu
        k = b.size
        lx = np.log(x)
        y = np.exp((lx + self.log_a) / nu)
        cbb = self.corr[np.ix_(b, b)]
        cnb = self.corr[np.ix_(nb, b)]
        sol = np.linalg.solve(cbb, y[b])
        qb = math.sqrt(float(y[b] @ sol))
        loc = cnb @ sol / qb
        resid = self.corr[np.ix_(nb, nb)] - cnb @ np.linalg.solve(cbb, cnb.T)
        resid = (resid + resid.T) / 2.0
        upper = y[nb] / qb
        prob = mvt_cdf(upper, loc, resid / (k + nu), k + nu, self.cdf_tol, self.seed,
                       lower=np.zeros(nb.size)).value
        logdet_b = float(np.linalg.slogdet(cbb)[1])
        logpref = (self._log_block(lx, b) + (1 - k) * math.log(nu) - math.log(self.orthant)
                   - 0.5 * logdet_b - 0.5 * k * _LOG_PI + (nu / 2 - 1) * _LOG_2
                   + special.gammaln((k + nu) / 2) - (k + nu) * math.log(qb))
        return logpref + (math.log(prob) if prob > 0 else -math.inf)
