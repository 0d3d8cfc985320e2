"""Threshold choice for the risk values: empirical quantiles and a
generalized-Pareto shape-stability scan."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..errors import DataError, DomainError

MIN_EXCEED = 10
SHAPE_BOUNDS = (-0.5, 1.5)


def quantile(values, q: float) -> float:
    """Type-7 (linear interpolation) empirical quantile."""
    if not 0 <= q <= 1:
        raise DomainError("quantile level must lie in [0, 1]")
    return float(np.quantile(np.asarray(values, dtype=float), q, method="linear"))


def _gpd_nll(shape, scale, y):
    if scale <= 0:
        return math.inf
    z = y / scale
    if abs(shape) < 1e-9:
        return y.size * math.log(scale) + float(z.sum())
    t = 1.0 + shape * z
    if np.any(t <= 0):
        return math.inf
    return y.size * math.log(scale) + (1.0 + 1.0 / shape) * float(np.log(t).sum())


def gpd_mle(excess) -> tuple[float, float, float, float]:
    """Shape and scale MLEs of excesses over a threshold with asymptotic SEs.

    The shape is kept in (-0.5, 1.5) through a scaled tanh transform.
    """
    y = np.asarray(excess, dtype=float)
    if y.size < MIN_EXCEED:
        raise DataError(f"need at least {MIN_EXCEED} excesses, got {y.size}")
    lo, hi = SHAPE_BOUNDS
    mid, half = (lo + hi) / 2, (hi - lo) / 2

    def unpack(p):
        return mid + half * math.tanh(p[0]), math.exp(p[1])

    def obj(p):
        return _gpd_nll(*unpack(p), y)

    m = float(y.mean())
    start = np.array([math.atanh((0.1 - mid) / half), math.log(m)])
    res = optimize.minimize(obj, start, method="Nelder-Mead",
                            options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 4000})
    shape, scale = unpack(res.x)
    n = y.size
    se_shape = (1.0 + shape) / math.sqrt(n)
    se_scale = scale * math.sqrt(2.0 * (1.0 + shape) / n)
    return shape, scale, se_shape, se_scale


@dataclass
class GpdFit:
    thresholds: np.ndarray
    counts: np.ndarray
    shape: np.ndarray
    scale: np.ndarray
    shape_se: np.ndarray
    scale_se: np.ndarray
    selected: float
    stable: bool

    def rows(self):
        for i in range(self.thresholds.size):
            yield {"u": self.thresholds[i], "n_exceed": int(self.counts[i]), "shape": self.shape[i],
                   "shape_se": self.shape_se[i], "scale": self.scale[i], "scale_se": self.scale_se[i]}


def gpd_stability(values, probs=None, tol: float = 0.05) -> GpdFit:
    v = np.asarray(values, dtype=float)
    if v.size < 50:
        raise DataError("shape-stability selection needs at least 50 risk values")
    probs = np.arange(0.50, 0.99, 0.02) if probs is None else np.asarray(probs, dtype=float)
    rows = []
    for p in probs:
        u = quantile(v, p)
        exc = v[v > u] - u
        if exc.size < MIN_EXCEED:
            continue
        rows.append((u, exc.size, *gpd_mle(exc)))
    if not rows:
        raise DataError(f"fewer than {MIN_EXCEED} exceedances at every grid threshold")
    arr = np.array(rows)
    shapes = arr[:, 2]
    selected, stable = arr[-1, 0], False
    for i in range(len(rows)):
        tail = shapes[i:]
        if tail.size == 1 or np.all(np.abs(np.diff(tail)) < tol):
            selected, stable = arr[i, 0], tail.size > 1
            break
    return GpdFit(arr[:, 0], arr[:, 1].astype(int), shapes, arr[:, 3], arr[:, 4], arr[:, 5],
                  float(selected), bool(stable))


def select_threshold(values, method: str = "quantile", q: float = 0.95, probs=None,
                     tol: float = 0.05) -> tuple[float, GpdFit | None]:
    """Return (u, diagnostics).  Diagnostics are the per-threshold GPD
    table for ``gpd-stability`` and for ``quantile`` when enough data."""
    v = np.asarray(values, dtype=float)
    if method == "quantile":
        u = quantile(v, q)
        if np.sum(v > u) < MIN_EXCEED:
            raise DataError(f"quantile {q} leaves fewer than {MIN_EXCEED} exceedances")
        diag = gpd_stability(v, probs, tol) if v.size >= 50 else None
        return u, diag
    if method == "gpd-stability":
        fit = gpd_stability(v, probs, tol)
        return fit.selected, fit
    raise DomainError(f"unknown threshold method {method!r}")
