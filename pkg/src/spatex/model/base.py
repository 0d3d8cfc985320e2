"""Shared helpers for the exponent-measure models."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError


def check_point(x, dim: int, allow_inf: bool = True) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (dim,):
        raise DomainError(f"expected a point of dimension {dim}, got shape {x.shape}")
    if np.any(np.isnan(x)) or np.any(x <= 0):
        raise DomainError("coordinates must be positive")
    if not allow_inf and np.any(np.isinf(x)):
        raise DomainError("coordinates must be finite")
    return x


def check_subset(subset, dim: int) -> np.ndarray:
    idx = np.unique(np.asarray(list(subset), dtype=int))
    if idx.size == 0:
        raise DomainError("index subset must be nonempty")
    if idx.min() < 0 or idx.max() >= dim:
        raise DomainError("index subset out of range")
    return idx


def complement(idx: np.ndarray, dim: int) -> np.ndarray:
    mask = np.ones(dim, dtype=bool)
    mask[idx] = False
    return np.flatnonzero(mask)


def difference_cov(cov: np.ndarray, k: int) -> np.ndarray:
    """Covariance of (Y_j - Y_k)_{j != k}."""
    others = np.delete(np.arange(cov.shape[0]), k)
    c = cov[np.ix_(others, others)]
    ck = cov[others, k]
    return c - ck[:, None] - ck[None, :] + cov[k, k]


class ExponentModel:
    """Interface: exponent function, intensity and partial derivatives."""

    dim: int

    def exponent(self, x) -> float:
        raise NotImplementedError

    def log_intensity(self, x) -> float:
        raise NotImplementedError

    def intensity(self, x) -> float:
        return float(np.exp(self.log_intensity(x)))

    def log_partial(self, x, subset) -> float:
        raise NotImplementedError

    def partial(self, x, subset) -> float:
        """-V_B(x): minus the mixed derivative over the coordinates in ``subset``."""
        return float(np.exp(self.log_partial(x, subset)))

    def theta(self) -> float:
        """Extremal coefficient V(1, ..., 1)."""
        return self.exponent(np.ones(self.dim))

    def log_density_observed(self, x, observed) -> float:
        """Log intensity of the margin on ``observed`` (others unobserved)."""
        observed = np.asarray(observed, dtype=bool)
        if observed.all():
            return self.log_intensity(x)
        xx = np.where(observed, x, np.inf)
        return self.log_partial(xx, np.flatnonzero(observed))
