"""Threshold exceedances and the spectral log-likelihood."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, DomainError
from ..model.spec import ModelSpec
from ..simulate import RiskSpec
from .data import ObservationSet


@dataclass(frozen=True)
class Exceedances:
    data: ObservationSet
    index: np.ndarray
    u: float
    risk: RiskSpec
    risk_values: np.ndarray

    @property
    def n(self) -> int:
        return int(self.index.size)

    @property
    def values(self) -> np.ndarray:
        return self.data.values[self.index]

    @property
    def missing(self) -> np.ndarray:
        return self.data.missing[self.index]

    def drop(self, k: int) -> "Exceedances":
        keep = np.delete(np.arange(self.n), k)
        return Exceedances(self.data, self.index[keep], self.u, self.risk, self.risk_values[keep])


def risk_values(data: ObservationSet, risk: RiskSpec) -> np.ndarray:
    """Risk of every row, missing cells counted as zero."""
    return risk(data.filled(0.0))


def exceedances(data: ObservationSet, risk: RiskSpec, u: float) -> Exceedances:
    if not u > 0:
        raise DomainError("threshold must be positive")
    r = risk_values(data, risk)
    idx = np.flatnonzero(r > u)
    if idx.size == 0:
        raise DataError(f"no row has risk above u={u:g}")
    rows_ok = ~data.missing[idx].all(axis=1)
    idx = idx[rows_ok]
    return Exceedances(data, idx, float(u), risk, r[idx])


def lp_threshold_guard(risk: RiskSpec, dim: int) -> float:
    """Smallest admissible threshold D^(1 - 1/p) for an Lp risk fitted
    with the L1 spectral likelihood (1 for L1, D for the maximum)."""
    if risk.kind == "l1":
        return 1.0
    if risk.kind == "linf":
        return float(dim)
    if risk.kind == "lp":
        return float(dim) ** (1.0 - 1.0 / risk.p)
    raise DomainError("threshold guard defined for Lp risks only")


def row_log_kappa(model, x, observed) -> float:
    if observed.all():
        return model.log_intensity(x)
    return model.log_density_observed(np.where(observed, x, np.inf), observed)


def spectral_loglik(m, exc: Exceedances) -> float:
    """Sum of log intensities over exceedances; rows with missing sites use
    the intensity of the observed margin."""
    model = m.model if isinstance(m, ModelSpec) else m
    x = exc.values
    obs = ~exc.missing
    total = 0.0
    for i in range(exc.n):
        v = row_log_kappa(model, x[i], obs[i])
        if not math.isfinite(v):
            return -math.inf
        total += v
    return total
