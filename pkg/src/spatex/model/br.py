"""Brown-Resnick model: W = exp(Y - diag(cov)/2) with Y ~ N(0, cov)."""

from __future__ import annotations

import math

import numpy as np

from ..dist.mvn import mvn_cdf
from ..errors import DomainError
from .base import ExponentModel, check_point, check_subset, complement, difference_cov

_LOG_2PI = math.log(2 * math.pi)


class BrownResnick(ExponentModel):
    def __init__(self, cov, cdf_tol: float | None = None, seed: int = 0):
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        self.cov = cov
        self.dim = cov.shape[0]
        self.cdf_tol = cdf_tol
        self.seed = seed
        L = np.linalg.cholesky(cov)
        self.logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
        prec = np.linalg.inv(cov)
        self.prec = (prec + prec.T) / 2.0
        self.q = self.prec.sum(axis=1)
        self.s = float(self.q.sum())
        self.M = self.prec - np.outer(self.q, self.q) / self.s
        self.half_var = np.diag(cov) / 2.0
        self.log_const = -0.5 * self.logdet - 0.5 * math.log(self.s) - 0.5 * (self.dim - 1) * _LOG_2PI

    def _cdf(self, upper, cov):
        return mvn_cdf(None, upper, None, cov, self.cdf_tol, self.seed).value

    def semivariogram(self) -> np.ndarray:
        d = np.diag(self.cov)
        return (d[:, None] + d[None, :] - 2 * self.cov) / 2.0

    def exponent(self, x) -> float:
        x = check_point(x, self.dim)
        if self.dim == 1:
            return 1.0 / x[0]
        lx = np.log(x)
        g = self.semivariogram()
        total = 0.0
        for k in range(self.dim):
            if np.isinf(x[k]):
                continue
            others = np.delete(np.arange(self.dim), k)
            upper = lx[others] - lx[k] + g[others, k]
            total += self._cdf(upper, difference_cov(self.cov, k)) / x[k]
        return total

    def _quad_terms(self, z):
        return float(z @ self.M @ z + 2.0 * (self.q @ z) / self.s - 1.0 / self.s)

    def log_intensity(self, x) -> float:
        x = check_point(x, self.dim, allow_inf=False)
        z = np.log(x) + self.half_var
        return self.log_const - float(np.sum(np.log(x))) - 0.5 * self._quad_terms(z)

    def log_partial(self, x, subset) -> float:
        x = check_point(x, self.dim)
        b = check_subset(subset, self.dim)
        if b.size == self.dim:
            return self.log_intensity(x)
        nb = complement(b, self.dim)
        if np.any(np.isinf(x[b])):
            raise DomainError("coordinates in the derivative set must be finite")
        z = np.log(x) + self.half_var
        zb = z[b]
        P = self.M[np.ix_(nb, nb)]
        S = np.linalg.inv(P)
        S = (S + S.T) / 2.0
        m = -S @ (self.M[np.ix_(nb, b)] @ zb + self.q[nb] / self.s)
        quad = -m @ P @ m + zb @ self.M[np.ix_(b, b)] @ zb + 2.0 * (self.q[b] @ zb) / self.s - 1.0 / self.s
        logdet_s = float(np.linalg.slogdet(S)[1])
        logpref = (self.log_const + 0.5 * nb.size * _LOG_2PI + 0.5 * logdet_s
                   - float(np.sum(np.log(x[b]))) - 0.5 * quad)
        prob = self._cdf(z[nb] - m, S)
        return logpref + (math.log(prob) if prob > 0 else -math.inf)
