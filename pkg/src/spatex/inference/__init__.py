"""Marginal standardization, thresholds and spectral-likelihood fitting."""

from .data import ObservationSet, marginal_transform
from .fit import FitResult, OptimizerConfig, Packer, ThresholdConfig, fit, jackknife_se
from .likelihood import Exceedances, exceedances, lp_threshold_guard, risk_values, spectral_loglik
from .threshold import GpdFit, gpd_mle, gpd_stability, quantile, select_threshold

__all__ = [
    "Exceedances", "FitResult", "GpdFit", "ObservationSet", "OptimizerConfig", "Packer",
    "ThresholdConfig", "exceedances", "fit", "gpd_mle", "gpd_stability", "jackknife_se",
    "lp_threshold_guard", "marginal_transform", "quantile", "risk_values", "select_threshold",
    "spectral_loglik",
]
