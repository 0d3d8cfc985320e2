"""Skewed Brown-Resnick model.

W = exp(Y - a) with Y skew-normal, density 2 phi(y; cov) Phi(eta' y), and
a_k = log 2 + cov_kk / 2 + log Phi(xi_k), xi = cov eta / sqrt(1 + eta' cov eta).
The exponent function is a sum of extended skew-normal distribution
functions; intensity and partial derivatives come from integrating the
spectral density along rays, which keeps a single skew factor per term.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..dist.mvn import mvn_cdf
from ..errors import DomainError
from .base import check_point, check_subset, complement, difference_cov
from .br import BrownResnick
from .geometry import xi_from_eta

_LOG_2PI = math.log(2 * math.pi)
_LOG_2 = math.log(2.0)


class SkewBrownResnick(BrownResnick):
    def __init__(self, cov, eta, cdf_tol: float | None = None, seed: int = 0):
        super().__init__(cov, cdf_tol, seed)
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        if eta.shape != (self.dim,):
            raise DomainError("slant vector has the wrong length")
        self.eta = eta
        self.xi = xi_from_eta(eta, self.cov)
        self.log_phi_xi = special.log_ndtr(self.xi)
        self.a = _LOG_2 + self.half_var + self.log_phi_xi
        # skew factor of the ray-integrated density: Phi(beta' z + beta0)
        c = float(eta.sum())
        scale = math.sqrt(1.0 + c * c / self.s)
        self.beta = (eta - self.q * c / self.s) / scale
        self.beta0 = c / (self.s * scale)

    def exponent(self, x) -> float:
        x = check_point(x, self.dim)
        if self.dim == 1:
            return 1.0 / x[0]
        lx = np.log(x)
        D = self.dim
        total = 0.0
        for k in range(D):
            if np.isinf(x[k]):
                continue
            others = np.delete(np.arange(D), k)
            upper = np.empty(D)
            upper[:-1] = (self.a[others] - self.a[k] + lx[others] - lx[k]
                          - self.cov[others, k] + self.cov[k, k])
            upper[-1] = self.xi[k]
            joint = np.empty((D, D))
            joint[:-1, :-1] = difference_cov(self.cov, k)
            coupling = -(self.xi[others] - self.xi[k])
            joint[:-1, -1] = joint[-1, :-1] = coupling
            joint[-1, -1] = 1.0
            p = self._cdf(upper, joint)
            total += p / math.exp(self.log_phi_xi[k]) / x[k]
        return total

    def log_intensity(self, x) -> float:
        x = check_point(x, self.dim, allow_inf=False)
        z = np.log(x) + self.a
        t = float(self.beta @ z + self.beta0)
        return (_LOG_2 + float(special.log_ndtr(t)) + self.log_const
                - float(np.sum(np.log(x))) - 0.5 * self._quad_terms(z))

    def log_partial(self, x, subset) -> float:
        x = check_point(x, self.dim)
        b = check_subset(subset, self.dim)
        if b.size == self.dim:
            return self.log_intensity(x)
        if np.any(np.isinf(x[b])):
            raise DomainError("coordinates in the derivative set must be finite")
        nb = complement(b, self.dim)
        z = np.log(x) + self.a
        zb = z[b]
        P = self.M[np.ix_(nb, nb)]
        S = np.linalg.inv(P)
        S = (S + S.T) / 2.0
        m = -S @ (self.M[np.ix_(nb, b)] @ zb + self.q[nb] / self.s)
        quad = -m @ P @ m + zb @ self.M[np.ix_(b, b)] @ zb + 2.0 * (self.q[b] @ zb) / self.s - 1.0 / self.s
        logdet_s = float(np.linalg.slogdet(S)[1])
        logpref = (_LOG_2 + self.log_const + 0.5 * nb.size * _LOG_2PI + 0.5 * logdet_s
                   - float(np.sum(np.log(x[b]))) - 0.5 * quad)
        beta = self.beta[nb]
        t0 = float(self.beta[b] @ zb + beta @ m + self.beta0)
        k = nb.size
        joint = np.empty((k + 1, k + 1))
        joint[:k, :k] = S
        sb = S @ beta
        joint[:k, k] = joint[k, :k] = -sb
        joint[k, k] = 1.0 + beta @ sb
        upper = np.append(z[nb] - m, t0)
        prob = self._cdf(upper, joint)
        return logpref + (math.log(prob) if prob > 0 else -math.inf)
