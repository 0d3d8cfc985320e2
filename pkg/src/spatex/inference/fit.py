"""Spectral-likelihood fitting by Nelder-Mead in an unconstrained
parametrization, with delete-one jackknife standard errors."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from ..errors import ConfigError, DataError, SpatexError
from ..model.geometry import xi_from_eta
from ..model.spec import ModelSpec
from ..simulate import RiskSpec
from .data import ObservationSet
from .likelihood import Exceedances, exceedances, lp_threshold_guard, risk_values, spectral_loglik
from .threshold import select_threshold

SCALAR_PARAMS = ("lam", "smooth", "rotation", "stretch", "nu")
START_MAGNITUDES = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class ThresholdConfig:
    method: str = "quantile"
    q: float = 0.95
    u: float | None = None
    tol: float = 0.05


@dataclass(frozen=True)
class OptimizerConfig:
    free: tuple = ("lam", "smooth")
    starts: int | None = None
    max_evals: int = 4000
    xatol: float = 1e-4
    fatol: float = 1e-7
    jackknife: bool = False
    threads: int = 1


# transforms from the natural box to the real line and back
_TO_REAL = {
    "lam": math.log,
    "smooth": lambda v: math.log(v / (2.0 - v)) if v < 2.0 else 12.0,
    "rotation": lambda v: math.atanh(v / (math.pi / 4)),
    "stretch": math.log,
    "nu": math.log,
}
_FROM_REAL = {
    "lam": math.exp,
    "smooth": lambda t: 2.0 / (1.0 + math.exp(-t)),
    "rotation": lambda t: (math.pi / 4) * math.tanh(t),
    "stretch": math.exp,
    "nu": math.exp,
}


class Packer:
    """Maps between a parameter vector on the real line and ModelSpecs."""

    def __init__(self, template: ModelSpec, free):
        free = tuple(free)
        for name in free:
            if name not in SCALAR_PARAMS:
                raise ConfigError(f"unknown free parameter {name!r}")
        if "nu" in free and template.variant != "tet":
            raise ConfigError("nu is only a parameter of the tet model")
        self.template = template
        self.scalars = tuple(n for n in SCALAR_PARAMS if n in free)
        self.n_coef = template.skew.coef.size if template.variant == "sbr" else 0

    @property
    def names(self) -> list[str]:
        return list(self.scalars) + [f"b{j + 1}" for j in range(self.n_coef)]

    @property
    def size(self) -> int:
        return len(self.scalars) + self.n_coef

    def _get(self, spec, name):
        return spec.nu if name == "nu" else getattr(spec.vario, name)

    def to_real(self, spec: ModelSpec, coef=None) -> np.ndarray:
        t = [_TO_REAL[n](float(self._get(spec, n))) for n in self.scalars]
        if self.n_coef:
            t.extend(spec.skew.coef if coef is None else coef)
        return np.array(t, dtype=float)

    def natural(self, t) -> dict:
        out = {n: _FROM_REAL[n](float(v)) for n, v in zip(self.scalars, t)}
        for j in range(self.n_coef):
            out[f"b{j + 1}"] = float(t[len(self.scalars) + j])
        return out

    def spec(self, t) -> ModelSpec:
        nat = self.natural(t)
        vario = self.template.vario
        changes = {k: nat[k] for k in ("lam", "smooth", "rotation", "stretch") if k in nat}
        if changes:
            vario = type(vario)(**{**asdict(vario), **changes})
        kw = {"vario": vario}
        if "nu" in nat:
            kw["nu"] = nat["nu"]
        if self.n_coef:
            kw["skew"] = self.template.skew.with_coef(np.asarray(t[len(self.scalars):], dtype=float))
        return self.template.replace(**kw)


@dataclass
class FitResult:
    variant: str
    estimates: dict
    se: dict | None
    loglik: float
    aic: float
    k: int
    n_exceed: int
    u: float
    seed: int
    wall_time: float
    converged: bool
    n_evals: int
    jackknife: dict | None = None
    xi: list | None = None
    rows_with_missing: int = 0
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _objective(packer: Packer, exc: Exceedances):
    def f(t):
        try:
            ll = spectral_loglik(packer.spec(t), exc)
        except (SpatexError, np.linalg.LinAlgError, FloatingPointError, OverflowError):
            return math.inf
        return -ll if math.isfinite(ll) else math.inf
    return f


def _simplex(t0, packer: Packer):
    n = t0.size
    steps = np.full(n, 0.25)
    steps[len(packer.scalars):] = 0.5
    simplex = np.tile(t0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += steps[i]
    return simplex


def _minimize(f, t0, packer, opt: OptimizerConfig):
    return optimize.minimize(f, t0, method="Nelder-Mead", options={
        "initial_simplex": _simplex(t0, packer), "maxfev": opt.max_evals,
        "xatol": opt.xatol, "fatol": opt.fatol, "adaptive": t0.size > 4})


def _starts(template: ModelSpec, packer: Packer, opt: OptimizerConfig, seed: int):
    base = packer.to_real(template)
    if not packer.n_coef:
        return [base]
    n = opt.starts if opt.starts is not None else 5
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        t = base.copy()
        t[len(packer.scalars):] = rng.choice(START_MAGNITUDES, size=packer.n_coef)
        out.append(t)
    return out


def optimize_loglik(template, exc, opt: OptimizerConfig, seed: int = 0, starts=None):
    packer = Packer(template, opt.free)
    f = _objective(packer, exc)
    starts = _starts(template, packer, opt, seed) if starts is None else starts
    best, trace, evals = None, [], 0
    for t0 in starts:
        res = _minimize(f, np.asarray(t0, dtype=float), packer, opt)
        evals += res.nfev
        trace.append({"start": [float(v) for v in t0], "negloglik": float(res.fun),
                      "evals": int(res.nfev), "success": bool(res.success)})
        if best is None or res.fun < best.fun:
            best = res
    # one restart from the best point guards against a collapsed simplex
    res = _minimize(f, best.x, packer, opt)
    evals += res.nfev
    trace.append({"start": "restart", "negloglik": float(res.fun), "evals": int(res.nfev),
                  "success": bool(res.success)})
    if res.fun <= best.fun:
        best = res
    return packer, best, evals, trace


def jackknife_se(template: ModelSpec, exc: Exceedances, t_hat, opt: OptimizerConfig):
    """Delete-one jackknife over exceedances, each refit warm-started at t_hat."""
    n = exc.n
    if n < 3:
        raise DataError("jackknife needs at least 3 exceedances")
    packer = Packer(template, opt.free)

    def refit(i):
        sub = exc.drop(i)
        res = _minimize(_objective(packer, sub), np.asarray(t_hat, dtype=float), packer, opt)
        return packer.natural(res.x), bool(res.success and math.isfinite(res.fun))

    if opt.threads > 1:
        with ThreadPoolExecutor(max_workers=opt.threads) as pool:
            results = list(pool.map(refit, range(n)))
    else:
        results = [refit(i) for i in range(n)]
    names = packer.names
    est = np.array([[r[0][k] for k in names] for r in results])
    dev = est - est.mean(axis=0)
    se = np.sqrt((n - 1) / n * np.sum(dev ** 2, axis=0))
    failures = sum(not r[1] for r in results)
    return dict(zip(names, se.tolist())), {"scheme": "delete-one over exceedances",
                                           "refits": n, "failures": failures}


def fit(template: ModelSpec, data: ObservationSet, risk: RiskSpec,
        threshold: ThresholdConfig = ThresholdConfig(), opt: OptimizerConfig = OptimizerConfig(),
        seed: int = 0) -> FitResult:
    """Maximize the spectral log-likelihood over the free parameters.

    ``template`` fixes the variant, the sites, the fixed parameters and
    the starting values of the free ones.
    """
    start = time.perf_counter()
    if data.margins not in ("frechet", "pareto"):
        raise DataError("fit needs data on the Frechet or Pareto scale")
    if template.dim != data.dim:
        raise DataError(f"model has {template.dim} sites, data has {data.dim} columns")
    if threshold.u is not None:
        u = float(threshold.u)
    else:
        u, _ = select_threshold(risk_values(data, risk), threshold.method, threshold.q, tol=threshold.tol)
    if risk.kind in ("lp", "linf"):
        bound = lp_threshold_guard(risk, data.dim)
        if not u > bound:
            raise ConfigError(f"threshold {u:g} must exceed {bound:g} for the {risk.tag} risk "
                              "to be fitted through the L1 likelihood")
    elif risk.kind == "linear":
        raise ConfigError("fitting with a linear risk is not supported")
    exc = exceedances(data, risk, u)
    packer, best, evals, trace = optimize_loglik(template, exc, opt, seed)
    nat = packer.natural(best.x)
    loglik = -float(best.fun)
    k = packer.size
    se = jk = None
    if opt.jackknife:
        se, jk = jackknife_se(template, exc, best.x, opt)
    xi = None
    if template.variant == "sbr":
        fitted = packer.spec(best.x)
        xi = xi_from_eta(fitted.eta, fitted.cov).tolist()
    return FitResult(
        variant=template.variant, estimates=nat, se=se, loglik=loglik, aic=2.0 * k - 2.0 * loglik,
        k=k, n_exceed=exc.n, u=u, seed=seed, wall_time=time.perf_counter() - start,
        converged=bool(best.success), n_evals=evals, jackknife=jk, xi=xi,
        rows_with_missing=int(exc.missing.any(axis=1).sum()), trace=trace)

