"""Brute-force references used to validate the closed forms.

The oracles take plain callables (a spectral log-density, a sampler of
W, an exponent function).  ``spectral_logpdf`` builds the first from raw
parameters with scipy densities, recomputing every normalizer itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

from .errors import DomainError


@dataclass(frozen=True)
class OracleReport:
    value: float
    error: float
    method: str
    evaluations: int
    ok: bool = True


def kappa_quadrature(log_density, x, tol: float = 1e-8, max_dim: int = 4) -> OracleReport:
    """Integral over r > 0 of r^D f_W(r x), f_W given through its logarithm.

    Substituting r = e^t gives an integrand exp((D + 1) t + log f_W(e^t x))
    that is integrated panel by panel outwards from its peak until the
    panels stop contributing.
    """
    x = np.asarray(x, dtype=float)
    D = x.size
    if D > max_dim:
        raise DomainError(f"quadrature oracle limited to D <= {max_dim}")
    if np.any(x <= 0):
        raise DomainError("x must be positive")
    count = [0]

    def logg(t):
        count[0] += 1
        return (D + 1) * t + float(log_density(math.exp(t) * x))

    grid = np.linspace(-40.0, 40.0, 321)
    vals = np.array([logg(t) for t in grid])
    finite = np.isfinite(vals)
    if not finite.any():
        return OracleReport(0.0, 0.0, "radial-quadrature", count[0], False)
    peak = grid[finite][np.argmax(vals[finite])]
    shift = float(np.max(vals[finite]))

    def g(t):
        v = logg(t) - shift
        return math.exp(v) if np.isfinite(v) else 0.0

    width = 0.5
    total, err = integrate.quad(g, peak - width, peak + width, epsabs=0, epsrel=tol / 10, limit=200)
    ok = True
    for direction in (-1.0, 1.0):
        edge = peak + direction * width
        step = width
        for _ in range(200):
            lo, hi = sorted((edge, edge + direction * step))
            part, e = integrate.quad(g, lo, hi, epsabs=0, epsrel=tol / 10, limit=200)
            total += part
            err += e
            edge += direction * step
            step = min(step * 1.5, 4.0)
            if part <= 1e-3 * tol * total:
                break
        else:
            ok = False
    value = total * math.exp(shift)
    return OracleReport(value, err * math.exp(shift), "radial-quadrature", count[0], ok)


def exponent_mc(sampler, x, n: int, seed=None) -> OracleReport:
    """Monte Carlo mean of max_i W_i / x_i; ``sampler(n, rng)`` returns W draws."""
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    w = np.asarray(sampler(n, rng), dtype=float)
    m = np.max(w / x, axis=1)
    return OracleReport(float(m.mean()), float(m.std(ddof=1) / math.sqrt(n)), "monte-carlo", n)


def _mixed_difference(func, x, idx, steps):
    total = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=len(idx)):
        xx = x.copy()
        for i, s in zip(idx, signs):
            xx[i] += s * steps[i]
        total += np.prod(signs) * func(xx)
    return total / np.prod([2.0 * steps[i] for i in idx])


def finite_diff_partial(func, x, subset, h: float = 1e-4) -> OracleReport:
    """Mixed central difference of ``func`` over ``subset`` with one
    Richardson step (relative steps h and h/2)."""
    idx = sorted(set(int(i) for i in subset))
    if not 1 <= len(idx) <= 3:
        raise DomainError("finite differences support 1 to 3 coordinates")
    x = np.asarray(x, dtype=float)
    coarse = _mixed_difference(func, x, idx, h * x)
    fine = _mixed_difference(func, x, idx, h * x / 2)
    value = (4.0 * fine - coarse) / 3.0
    err = abs(value - fine)
    # agreement between the two step sizes signals the absence of cancellation
    ok = err <= 1e-2 * abs(value) + 1e-12
    return OracleReport(float(value), float(err), "finite-difference", 2 * 2 ** len(idx), bool(ok))


def _tet_moments(corr, nu):
    """P(Y >= 0) and a_k = E[Y_k^nu | Y >= 0] by quadrature over y_k."""
    D = corr.shape[0]
    orth = float(stats.multivariate_normal(np.zeros(D), corr).cdf(np.zeros(D))) if D > 1 else 0.5
    a = np.empty(D)
    for k in range(D):
        others = [j for j in range(D) if j != k]
        rho = corr[others, k]
        cond = corr[np.ix_(others, others)] - np.outer(rho, rho)

        def g(y):
            if not others:
                p = 1.0
            elif len(others) == 1:
                p = float(special.ndtr(rho[0] * y / math.sqrt(cond[0, 0])))
            else:
                p = float(stats.multivariate_normal(np.zeros(len(others)), cond).cdf(rho * y))
            return y ** nu * math.exp(-0.5 * y * y) / math.sqrt(2 * math.pi) * p

        val, _ = integrate.quad(g, 0.0, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
        a[k] = val / orth
    return orth, a


def spectral_logpdf(model):
    """log f_W for a BrownResnick, SkewBrownResnick or TruncatedExtremalT
    instance, built only from its covariance-type parameters."""
    name = type(model).__name__
    if name in ("BrownResnick", "SkewBrownResnick"):
        cov = np.array(model.cov)
        D = cov.shape[0]
        mvn = stats.multivariate_normal(np.zeros(D), cov)
        if name == "BrownResnick":
            shift = np.diag(cov) / 2.0

            def f(w):
                w = np.asarray(w, dtype=float)
                return float(mvn.logpdf(np.log(w) + shift) - np.sum(np.log(w)))
            return f
        eta = np.array(model.eta)
        xi = cov @ eta / math.sqrt(1.0 + eta @ cov @ eta)
        # log E exp(Y_k) for the skew-normal, from its moment generating function
        shift = math.log(2.0) + np.diag(cov) / 2.0 + special.log_ndtr(xi)

        def f(w):
            w = np.asarray(w, dtype=float)
            y = np.log(w) + shift
            return float(math.log(2.0) + mvn.logpdf(y) + special.log_ndtr(eta @ y) - np.sum(np.log(w)))
        return f
    if name == "TruncatedExtremalT":
        corr, nu = np.array(model.corr), float(model.nu)
        D = corr.shape[0]
        if D > 3:
            raise DomainError("truncated extremal-t oracle limited to D <= 3")
        orth, a = _tet_moments(corr, nu)
        mvn = stats.multivariate_normal(np.zeros(D), corr)

        def f(w):
            w = np.asarray(w, dtype=float)
            y = (a * w) ** (1.0 / nu)
            return float(mvn.logpdf(y) - math.log(orth)
                         + np.sum(np.log(a / nu) + (1.0 / nu - 1.0) * np.log(a * w)))
        return f
    raise DomainError(f"no spectral density for {name}")
