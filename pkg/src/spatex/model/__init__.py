"""Parametrization and exponent-measure functions of the three models."""

from .base import ExponentModel
from .br import BrownResnick
from .geometry import (
    SiteSet,
    SkewFieldSpec,
    VariogramSpec,
    build_br_cov,
    build_tet_corr,
    cholesky_jitter,
    eta_from_kernels,
    eta_from_xi,
    kernel_basis,
    powered_exponential,
    semivariogram,
    xi_from_eta,
)
from .sbr import SkewBrownResnick
from .spec import (
    ModelSpec,
    br_exponent,
    br_intensity,
    br_partial_V,
    sbr_exponent,
    sbr_intensity,
    sbr_partial_V,
    tet_exponent,
    tet_intensity,
    tet_normalizers,
    tet_partial_V,
    theta_D,
)
from .tet import TruncatedExtremalT

__all__ = [
    "BrownResnick", "ExponentModel", "ModelSpec", "SiteSet", "SkewBrownResnick", "SkewFieldSpec",
    "TruncatedExtremalT", "VariogramSpec", "br_exponent", "br_intensity", "br_partial_V",
    "build_br_cov", "build_tet_corr", "cholesky_jitter", "eta_from_kernels", "eta_from_xi",
    "kernel_basis", "powered_exponential", "sbr_exponent", "sbr_intensity", "sbr_partial_V",
    "semivariogram", "tet_exponent", "tet_intensity", "tet_normalizers", "tet_partial_V",
    "theta_D", "xi_from_eta",
]
