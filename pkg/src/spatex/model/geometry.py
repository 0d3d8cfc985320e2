"""Sites, anisotropic power-law semivariograms, covariance construction
and the kernel-spline slant field."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from ..errors import DomainError, NotPositiveDefiniteError


@dataclass(frozen=True)
class SiteSet:
    coords: np.ndarray
    site_ids: tuple = ()

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coords, dtype=float))
        if c.ndim != 2 or c.shape[1] != 2 or c.shape[0] < 1:
            raise DomainError("site coordinates must be a D x 2 array with D >= 1")
        if not np.all(np.isfinite(c)):
            raise DomainError("site coordinates must be finite")
        if c.shape[0] > 1 and np.min(pdist(c)) == 0.0:
            raise DomainError("duplicate site coordinates")
        ids = tuple(str(i) for i in self.site_ids) if self.site_ids else tuple(
            str(i) for i in range(c.shape[0]))
        if len(ids) != c.shape[0] or len(set(ids)) != len(ids):
            raise DomainError("site ids must be unique and match the coordinates")
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "site_ids", ids)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def __len__(self):
        return self.dim

    def subset(self, idx) -> "SiteSet":
        idx = list(idx)
        return SiteSet(self.coords[idx], tuple(self.site_ids[i] for i in idx))

    @classmethod
    def grid(cls, side: int, start: float = 1.0, step: float = 1.0) -> "SiteSet":
        """Square grid with ``side**2`` sites, x varying fastest."""
        g = start + step * np.arange(side)
        xx, yy = np.meshgrid(g, g)
        return cls(np.column_stack([xx.ravel(), yy.ravel()]))


@dataclass(frozen=True)
class VariogramSpec:
    """gamma(h) = (||A h|| / lam) ** smooth with a rotation/stretch matrix A."""

    lam: float
    smooth: float = 1.0
    rotation: float = 0.0
    stretch: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("range must be positive")
        if not 0 < self.smooth <= 2:
            raise DomainError("smoothness must lie in (0, 2]")
        if not abs(self.rotation) < math.pi / 4:
            raise DomainError("rotation must lie in (-pi/4, pi/4)")
        if not self.stretch > 0:
            raise DomainError("stretch must be positive")

    @property
    def matrix(self) -> np.ndarray:
        c, s, m = math.cos(self.rotation), math.sin(self.rotation), self.stretch
        return np.array([[c, -s], [m * s, m * c]])


def _scaled_norm(spec: VariogramSpec, h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    return np.linalg.norm(h @ spec.matrix.T, axis=-1) / spec.lam


def semivariogram(spec: VariogramSpec, h) -> np.ndarray:
    return _scaled_norm(spec, h) ** spec.smooth


def powered_exponential(spec: VariogramSpec, h) -> np.ndarray:
    """Correlation exp(-gamma(h)) used by the truncated extremal-t model."""
    return np.exp(-semivariogram(spec, h))


def cholesky_jitter(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cholesky factor, retrying once with a relative diagonal jitter.

    Returns the (possibly jittered) matrix and its lower factor.
    """
    mat = np.asarray(mat, dtype=float)
    try:
        return mat, np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        pass
    d = mat.shape[0]
    jittered = mat + np.eye(d) * 1e-10 * np.trace(mat) / d
    try:
        return jittered, np.linalg.cholesky(jittered)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            "matrix is not positive definite even after jitter; check for duplicate sites "
            "or a site at the anchor") from None


def build_br_cov(sites: SiteSet, vario: VariogramSpec, anchor=(0.0, 0.0)) -> np.ndarray:
    """Covariance of a Gaussian field with the given semivariogram that
    vanishes at ``anchor``."""
    s = sites.coords
    s0 = np.asarray(anchor, dtype=float)
    g0 = semivariogram(vario, s - s0)
    gij = semivariogram(vario, s[:, None, :] - s[None, :, :])
    cov = g0[:, None] + g0[None, :] - gij
    cov, _ = cholesky_jitter(cov)
    return cov


def build_tet_corr(sites: SiteSet, vario: VariogramSpec) -> np.ndarray:
    s = sites.coords
    corr = powered_exponential(vario, s[:, None, :] - s[None, :, :])
    corr, _ = cholesky_jitter(corr)
    return corr


@dataclass(frozen=True)
class SkewFieldSpec:
    """Slant field eta = sum_j b_j K_j + background with Gaussian kernels."""

    centers: np.ndarray
    coef: np.ndarray
    bandwidth: float
    background: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        b = np.atleast_1d(np.asarray(self.coef, dtype=float))
        if c.shape[1] != 2 or c.shape[0] != b.size:
            raise DomainError("need one coefficient per kernel centre")
        if not self.bandwidth > 0:
            raise DomainError("kernel bandwidth must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "coef", b)
        if self.background is not None:
            object.__setattr__(self, "background", np.asarray(self.background, dtype=float))

    def with_coef(self, coef) -> "SkewFieldSpec":
        return SkewFieldSpec(self.centers, coef, self.bandwidth, self.background)


def kernel_basis(sites: SiteSet, centers, bandwidth: float) -> np.ndarray:
    """D x J matrix of centred, unit-norm Gaussian kernel columns."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    dist = np.linalg.norm(sites.coords[:, None, :] - centers[None, :, :], axis=-1)
    raw = np.exp(-0.5 * (dist / (2.0 * bandwidth)) ** 2) / math.sqrt(2 * math.pi)
    raw = raw - raw.mean(axis=0)
    norm = np.sqrt(np.sum(raw ** 2, axis=0))
    if np.any(norm <= 1e-14 * np.sqrt(sites.dim)):
        raise DomainError("degenerate kernel: constant over the sites")
    return raw / norm


def eta_from_kernels(sites: SiteSet, skew: SkewFieldSpec) -> np.ndarray:
    eta = kernel_basis(sites, skew.centers, skew.bandwidth) @ skew.coef
    if skew.background is not None:
        if skew.background.shape != (sites.dim,):
            raise DomainError("background must have one value per site")
        eta = eta + skew.background
    return eta


def xi_from_eta(eta, cov) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    se = np.asarray(cov) @ eta
    return se / math.sqrt(1.0 + eta @ se)


def eta_from_xi(xi, cov) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    sol = np.linalg.solve(np.asarray(cov), xi)
    rest = 1.0 - xi @ sol
    if not rest > 0:
        raise DomainError("xi lies outside the admissible set (xi' inv(cov) xi >= 1)")
    return sol / math.sqrt(rest)
