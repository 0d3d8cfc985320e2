"""Exact simulation of max-stable and r-Pareto processes.

Max-stable draws use the extremal-function construction: for each site in
turn, Poisson points are proposed from the law of W / W(s_i) tilted by
W(s_i) and kept only if they do not exceed the running maximum at earlier
sites.  r-Pareto draws for the L1 risk pick a site uniformly, draw from
the same tilted law and rescale by a unit Pareto radius; other convex
risks are obtained by rejection from the L1 process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist.truncated import MAX_REJECTION_DIM, sample_trunc_mvt, truncnorm_below
from .errors import AcceptanceError, DomainError
from .model.br import BrownResnick
from .model.sbr import SkewBrownResnick
from .model.spec import ModelSpec
from .model.tet import TruncatedExtremalT

PILOT = 1000
PILOT_MAX = 1_000_000
MIN_ACCEPTANCE = 1e-5


# ---------------------------------------------------------------- risk


@dataclass(frozen=True)
class RiskSpec:
    """Risk functional: 'l1', 'lp' (with p), 'linf' or 'linear' (with weights)."""

    kind: str
    p: float | None = None
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("l1", "lp", "linf", "linear"):
            raise DomainError(f"unknown risk kind {self.kind!r}")
        if self.kind == "lp" and not (self.p is not None and self.p > 1):
            raise DomainError("Lp risk needs p > 1")
        if self.kind == "linear":
            if self.weights is None:
                raise DomainError("linear risk needs weights")
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < 0) or not np.any(w > 0):
                raise DomainError("linear risk weights must be nonnegative, not all zero")
            object.__setattr__(self, "weights", w)

    @property
    def tag(self) -> str:
        if self.kind == "lp":
            return f"lp{self.p:g}"
        return self.kind

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "l1":
            return x.sum(axis=-1)
        if self.kind == "linf":
            return x.max(axis=-1)
        if self.kind == "lp":
            # scale by the row maximum to avoid overflow for large p
            mx = x.max(axis=-1, keepdims=True)
            return mx[..., 0] * np.sum((x / mx) ** self.p, axis=-1) ** (1.0 / self.p)
        return x @ self.weights

    def unit_constants(self, dim: int) -> np.ndarray:
        """c_i = 1 / r(e_i)."""
        with np.errstate(divide="ignore"):
            return 1.0 / self(np.eye(dim))

    def c0(self, dim: int) -> float:
        return float(min(np.min(self.unit_constants(dim)), 1.0))

    def baseline_M(self, dim: int) -> float:
        if self.kind == "lp":
            return float(dim) ** (self.p - 2.0)
        if self.kind in ("linf", "l1"):
            return 1.0
        raise DomainError("no default constant for a linear risk; supply M")


# ---------------------------------------------------------------- batches


@dataclass
class SimBatch:
    samples: np.ndarray
    seed: int | None
    model: str
    risk: str | None = None
    proposals_used: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def acceptance_rate(self) -> float | None:
        if not self.proposals_used:
            return None
        return self.samples.shape[0] / self.proposals_used


# ---------------------------------------------------------------- tilted laws


class SpectralSampler:
    """Draws of W / W(s_i) under the measure tilted by W(s_i)."""

    def __init__(self, model):
        self.model = model
        self.dim = model.dim
        if isinstance(model, TruncatedExtremalT):
            self._pools = {}
        elif isinstance(model, BrownResnick):
            self._chol = np.linalg.cholesky(model.cov)
            if isinstance(model, SkewBrownResnick):
                cond = model.cov - np.outer(model.xi, model.xi)
                self._chol_cond = np.linalg.cholesky(cond)
        else:
            raise DomainError("unsupported model type")

    def draw(self, i: int, n: int, rng) -> np.ndarray:
        m = self.model
        if n == 0:
            return np.empty((0, self.dim))
        if isinstance(m, TruncatedExtremalT):
            return self._draw_tet(i, n, rng)
        if isinstance(m, SkewBrownResnick):
            u = truncnorm_below(-m.xi[i], n, rng)
            y = m.cov[:, i] + u[:, None] * m.xi + rng.standard_normal((n, self.dim)) @ self._chol_cond.T
            logw = y - y[:, [i]] + m.a[i] - m.a
        else:
            y = m.cov[:, i] + rng.standard_normal((n, self.dim)) @ self._chol.T
            logw = y - y[:, [i]] - m.half_var + m.half_var[i]
        w = np.exp(logw)
        w[:, i] = 1.0
        return w

    def _draw_tet(self, i, n, rng):
        m = self.model
        out = np.ones((n, self.dim))
        if self.dim == 1:
            return out
        others, rho, scale = m._cond[i]
        t = self._truncated_t(i, rho, scale, m.nu + 1.0, n, rng)
        out[:, others] = m.a[i] * t ** m.nu / m.a[others]
        return out

    def _truncated_t(self, i, loc, scale, df, n, rng):
        pool = self._pools.get(i)
        if pool is None:
            L = np.linalg.cholesky(scale)
            pool = {"buf": np.empty((0, loc.size)), "L": L, "acc": 0.5}
            self._pools[i] = pool
        buf = pool["buf"]
        while buf.shape[0] < n:
            need = n - buf.shape[0]
            if loc.size > MAX_REJECTION_DIM:
                fresh = sample_trunc_mvt(loc, scale, df, max(need, 2048), rng, method="gibbs")
            else:
                m = int(min(max(2 * need / pool["acc"], 1024), 2_000_000))
                z = rng.standard_normal((m, loc.size)) @ pool["L"].T
                z = loc + z / np.sqrt(rng.chisquare(df, size=m) / df)[:, None]
                fresh = z[np.all(z >= 0, axis=1)]
                pool["acc"] = max(fresh.shape[0] / m, 1e-6)
            buf = np.concatenate([buf, fresh])
        pool["buf"] = buf[n:]
        return buf[:n]


def _as_model(m):
    return m.model if isinstance(m, ModelSpec) else m


def _variant(m) -> str:
    if isinstance(m, ModelSpec):
        return m.variant
    return {SkewBrownResnick: "sbr", BrownResnick: "br", TruncatedExtremalT: "tet"}[type(m)]


# ---------------------------------------------------------------- max-stable


def sample_maxstable(m, n: int, seed=None) -> SimBatch:
    """n exact max-stable realizations with unit Frechet margins."""
    model = _as_model(m)
    rng = np.random.default_rng(seed)
    sampler = SpectralSampler(model)
    D = model.dim
    e = rng.exponential(size=n)
    Z = sampler.draw(0, n, rng) / e[:, None]
    for i in range(1, D):
        e = rng.exponential(size=n)
        active = 1.0 / e > Z[:, i]
        while active.any():
            idx = np.flatnonzero(active)
            z = 1.0 / e[idx]
            cand = z[:, None] * sampler.draw(i, idx.size, rng)
            keep = np.all(cand[:, :i] < Z[idx, :i], axis=1)
            rows = idx[keep]
            Z[rows] = np.maximum(Z[rows], cand[keep])
            e[idx] += rng.exponential(size=idx.size)
            active[idx] = 1.0 / e[idx] > Z[idx, i]
        assert np.all(Z[:, i] >= 1.0 / e), "running bound violated"
    return SimBatch(Z, seed, _variant(m))


# ---------------------------------------------------------------- r-Pareto


def _l1_proposals(sampler, n, rng):
    D = sampler.dim
    site = rng.integers(0, D, size=n)
    out = np.empty((n, D))
    for i in range(D):
        rows = np.flatnonzero(site == i)
        if rows.size:
            out[rows] = sampler.draw(i, rows.size, rng)
    radius = 1.0 / (1.0 - rng.random(n))
    return radius[:, None] * out / out.sum(axis=1, keepdims=True)


def sample_rpareto_l1(m, n: int, seed=None) -> SimBatch:
    """n draws of the r-Pareto process for the L1 risk (||row||_1 > 1)."""
    model = _as_model(m)
    rng = np.random.default_rng(seed)
    z = _l1_proposals(SpectralSampler(model), n, rng)
    return SimBatch(z, seed, _variant(m), "l1", n)


def _rejection_from_l1(model, accept, transform, n, rng, label):
    sampler = SpectralSampler(model)
    kept = []
    have = 0
    used = 0
    pilot = PILOT
    # pilot stage: grow until enough acceptances to estimate the rate
    while True:
        z = _l1_proposals(sampler, pilot, rng)
        used += pilot
        ok = accept(z)
        kept.append(transform(z[ok]))
        have += int(ok.sum())
        if have >= 10 or used >= PILOT_MAX:
            break
        pilot = min(pilot * 10, PILOT_MAX - used)
    rate = have / used
    if have == 0 or rate < MIN_ACCEPTANCE:
        raise AcceptanceError(
            f"{label}: acceptance {rate:.2e} after {used} proposals is below {MIN_ACCEPTANCE:g}; "
            "review the risk functional or model parameters")
    while have < n:
        batch = int(min(max(1.2 * (n - have) / rate, 100), 5_000_000))
        z = _l1_proposals(sampler, batch, rng)
        used += batch
        ok = accept(z)
        kept.append(transform(z[ok]))
        have += int(ok.sum())
    out = np.concatenate(kept)
    # count proposals actually needed for the first n acceptances is not
    # tracked row by row; the reported rate is the overall one
    return out[:n], used


def sample_rpareto_convex(m, risk: RiskSpec, n: int, seed=None) -> SimBatch:
    """r-Pareto draws for a convex risk: scaled L1 draws with r > 1/c0."""
    model = _as_model(m)
    rng = np.random.default_rng(seed)
    c0 = risk.c0(model.dim)
    out, used = _rejection_from_l1(model, lambda z: risk(z) > 1.0 / c0, lambda z: c0 * z, n, rng,
                                   "convex-risk sampler")
    return SimBatch(out, seed, _variant(m), risk.tag, used, {"c0": c0})


def sample_rpareto_baseline(m, risk: RiskSpec, M: float | None, n: int, seed=None) -> SimBatch:
    """Constant-M baseline: accept an L1 draw as Z / M when r(Z) >= M."""
    model = _as_model(m)
    M = risk.baseline_M(model.dim) if M is None else float(M)
    if not M > 0:
        raise DomainError("M must be positive")
    rng = np.random.default_rng(seed)
    out, used = _rejection_from_l1(model, lambda z: risk(z) >= M, lambda z: z / M, n, rng,
                                   "baseline sampler")
    return SimBatch(out, seed, _variant(m), risk.tag, used, {"M": M})


def acceptance_rates(m, risk: RiskSpec, reps: int, seed=None, M: float | None = None) -> tuple[float, float]:
    """Percent of ``reps`` L1 proposals accepted by the baseline and by the
    c0 scheme, using the same proposals for both."""
    model = _as_model(m)
    rng = np.random.default_rng(seed)
    sampler = SpectralSampler(model)
    D = model.dim
    M = risk.baseline_M(D) if M is None else float(M)
    c0 = risk.c0(D)
    hits_b = hits_c = 0
    done = 0
    chunk = max(1, min(reps, 2_000_000 // max(D, 1)))
    while done < reps:
        k = min(chunk, reps - done)
        r = risk(_l1_proposals(sampler, k, rng))
        hits_b += int(np.sum(r >= M))
        hits_c += int(np.sum(r > 1.0 / c0))
        done += k
    return 100.0 * hits_b / reps, 100.0 * hits_c / reps


def table_grid_model(D: int, lam: float = 2.0, smooth: float = 1.0) -> ModelSpec:
    """BR model with gamma(h) = (h/lam)^smooth on the grid {1..sqrt(D)}^2."""
    from .model.geometry import SiteSet, VariogramSpec

    side = int(round(math.sqrt(D)))
    if side * side != D:
        raise DomainError("D must be a perfect square for the grid layout")
    return ModelSpec("br", SiteSet.grid(side), VariogramSpec(lam, smooth))
