"""Observation matrices and rank-based marginal standardization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import DataError, DomainError
from ..model.geometry import SiteSet

MARGINS = ("raw", "frechet", "pareto")


@dataclass(frozen=True)
class ObservationSet:
    values: np.ndarray
    missing: np.ndarray
    margins: str = "raw"
    sites: SiteSet | None = None
    row_ids: tuple = ()

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        m = np.asarray(self.missing, dtype=bool)
        if m.shape != v.shape:
            raise DataError("missing mask does not match the values")
        if self.margins not in MARGINS:
            raise DomainError(f"unknown margins {self.margins!r}")
        if self.sites is not None and self.sites.dim != v.shape[1]:
            raise DataError(f"{v.shape[1]} data columns but {self.sites.dim} sites")
        if np.any(np.isnan(v[~m])):
            raise DataError("NaN in an observed cell")
        obs = v[~m]
        if self.margins == "frechet" and np.any(obs <= 0):
            raise DataError("Frechet-scale data must be positive")
        if self.margins == "pareto" and np.any(obs <= 1):
            raise DataError("Pareto-scale data must exceed 1")
        if self.row_ids and len(self.row_ids) != v.shape[0]:
            raise DataError("row ids do not match the number of rows")
        v = np.where(m, np.nan, v)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "missing", m)

    @classmethod
    def from_array(cls, values, margins="raw", sites=None) -> "ObservationSet":
        """Build from an array in which NaN marks missing cells."""
        v = np.atleast_2d(np.asarray(values, dtype=float))
        return cls(v, np.isnan(v), margins, sites)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def filled(self, fill: float = 0.0) -> np.ndarray:
        return np.where(self.missing, fill, self.values)

    def rows(self, idx) -> "ObservationSet":
        idx = np.asarray(idx)
        ids = tuple(self.row_ids[i] for i in idx) if self.row_ids else ()
        return ObservationSet(self.values[idx], self.missing[idx], self.margins, self.sites, ids)


def marginal_transform(data: ObservationSet, target: str, zero_policy: str = "missing") -> ObservationSet:
    """Empirical-cdf transform of each column to unit Frechet or unit Pareto.

    Ranks r among the n' observed values (ties averaged) map to
    -1 / log(r / (n' + 1)) or (n' + 1) / (n' + 1 - r).
    """
    if data.margins != "raw":
        raise DataError(f"data already on the {data.margins} scale; refusing to transform twice")
    if target not in ("frechet", "pareto"):
        raise DomainError(f"unknown target margins {target!r}")
    if zero_policy not in ("missing", "keep"):
        raise DomainError(f"unknown zero policy {zero_policy!r}")
    missing = data.missing.copy()
    if zero_policy == "missing":
        missing |= data.filled(np.nan) == 0.0
    out = np.full(data.values.shape, np.nan)
    for j in range(data.dim):
        obs = ~missing[:, j]
        k = int(obs.sum())
        if k == 0:
            raise DataError(f"column {j} has no observed values")
        r = stats.rankdata(data.values[obs, j], method="average")
        if target == "frechet":
            out[obs, j] = -1.0 / np.log(r / (k + 1.0))
        else:
            out[obs, j] = (k + 1.0) / (k + 1.0 - r)
    return ObservationSet(out, missing, target, data.sites, data.row_ids)
