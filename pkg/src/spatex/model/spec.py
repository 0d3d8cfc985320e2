"""Variant-tagged model description and function-style entry points."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import DomainError
from .base import ExponentModel
from .br import BrownResnick
from .geometry import (
    SiteSet,
    SkewFieldSpec,
    VariogramSpec,
    build_br_cov,
    build_tet_corr,
    eta_from_kernels,
)
from .sbr import SkewBrownResnick
from .tet import TruncatedExtremalT

VARIANTS = ("br", "sbr", "tet")


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of one of the three models at a fixed set of sites.

    For ``tet`` the variogram fields parametrize the correlation
    exp(-gamma(h)).  The built model is cached; use :meth:`replace` to
    change parameters.
    """

    variant: str
    sites: SiteSet
    vario: VariogramSpec
    skew: SkewFieldSpec | None = None
    nu: float | None = None
    anchor: tuple = (0.0, 0.0)
    cdf_tol: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown model variant {self.variant!r}")
        if self.variant == "sbr" and self.skew is None:
            raise DomainError("sbr needs a skew field")
        if self.variant == "tet" and not (self.nu is not None and self.nu > 0):
            raise DomainError("tet needs nu > 0")

    def replace(self, **changes) -> "ModelSpec":
        return dataclasses.replace(self, **changes)

    @property
    def dim(self) -> int:
        return self.sites.dim

    @cached_property
    def cov(self) -> np.ndarray:
        if self.variant == "tet":
            return build_tet_corr(self.sites, self.vario)
        return build_br_cov(self.sites, self.vario, self.anchor)

    @cached_property
    def eta(self) -> np.ndarray:
        if self.variant != "sbr":
            return np.zeros(self.dim)
        return eta_from_kernels(self.sites, self.skew)

    @cached_property
    def model(self) -> ExponentModel:
        if self.variant == "br":
            return BrownResnick(self.cov, self.cdf_tol, self.seed)
        if self.variant == "sbr":
            return SkewBrownResnick(self.cov, self.eta, self.cdf_tol, self.seed)
        return TruncatedExtremalT(self.cov, self.nu, self.cdf_tol, self.seed)


def _need(m: ModelSpec, variant: str) -> ExponentModel:
    if m.variant != variant:
        raise DomainError(f"expected a {variant} model, got {m.variant}")
    return m.model


def br_exponent(x, m: ModelSpec) -> float:
    return _need(m, "br").exponent(x)


def br_intensity(x, m: ModelSpec) -> float:
    return _need(m, "br").intensity(x)


def br_partial_V(x, subset, m: ModelSpec) -> float:
    return _need(m, "br").partial(x, subset)


def sbr_exponent(x, m: ModelSpec) -> float:
    return _need(m, "sbr").exponent(x)


def sbr_intensity(x, m: ModelSpec) -> float:
    return _need(m, "sbr").intensity(x)


def sbr_partial_V(x, subset, m: ModelSpec) -> float:
    return _need(m, "sbr").partial(x, subset)


def tet_normalizers(m: ModelSpec) -> np.ndarray:
    return _need(m, "tet").normalizers()


def tet_exponent(x, m: ModelSpec) -> float:
    return _need(m, "tet").exponent(x)


def tet_intensity(x, m: ModelSpec) -> float:
    return _need(m, "tet").intensity(x)


def tet_partial_V(x, subset, m: ModelSpec) -> float:
    return _need(m, "tet").partial(x, subset)


def theta_D(m: ModelSpec | ExponentModel) -> float:
    model = m.model if isinstance(m, ModelSpec) else m
    return model.theta()
