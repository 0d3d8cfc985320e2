"""Batch command line: simulate, fit, depmap, bench-accept, transform.

Exit codes: 0 success (non-converged fits included, flagged in the
output), 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfg
from . import io
from .dependence import depmap
from .errors import ConfigError, DataError, DomainError, NumericalError
from .inference import (
    OptimizerConfig,
    ThresholdConfig,
    fit,
    marginal_transform,
    risk_values,
    select_threshold,
)
from .simulate import (
    RiskSpec,
    acceptance_rates,
    sample_maxstable,
    sample_rpareto_baseline,
    sample_rpareto_convex,
    sample_rpareto_l1,
    table_grid_model,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _outdir(args, doc, base) -> Path:
    if args.out:
        out = Path(args.out)
    elif "out" in doc:
        out = cfg.resolve(base, doc["out"])
    else:
        out = Path("out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args, doc) -> int:
    return int(args.seed) if args.seed is not None else int(doc.get("seed", 0))


def cmd_simulate(args, doc, base, out):
    cfg.require(doc, "model", "sites", "simulate")
    sites = cfg.build_sites(doc, base)
    model = cfg.build_model(doc["model"], sites)
    block = doc["simulate"]
    n, kind, seed = block["n"], block.get("kind", "maxstable"), _seed(args, doc)
    if kind == "maxstable":
        batch = sample_maxstable(model, n, seed)
    elif kind == "rpareto-l1":
        batch = sample_rpareto_l1(model, n, seed)
    else:
        cfg.require(doc, "risk")
        risk = cfg.build_risk(doc["risk"])
        if kind == "rpareto-convex":
            batch = sample_rpareto_convex(model, risk, n, seed)
        else:
            batch = sample_rpareto_baseline(model, risk, block.get("M"), n, seed)
    path = out / "samples.csv"
    io.write_matrix(path, [str(i + 1) for i in range(n)], sites.site_ids, batch.samples)
    io.write_json(io.sidecar(path), {"margins": "frechet", "process": kind})
    extra = {"n": n, "kind": kind, "risk": batch.risk}
    if batch.proposals_used:
        extra.update(proposals_used=batch.proposals_used, acceptance_rate=batch.acceptance_rate)
    return extra


def _thresholds(doc) -> ThresholdConfig:
    t = doc.get("threshold", {})
    return ThresholdConfig(t.get("method", "quantile"), t.get("q", 0.95), t.get("u"), t.get("tol", 0.05))


def _optimizer(doc, args) -> OptimizerConfig:
    o = doc.get("optimizer", {})
    return OptimizerConfig(tuple(o.get("free", ("lam", "smooth"))), o.get("starts"),
                           o.get("max_evals", 4000), o.get("xatol", 1e-4), o.get("fatol", 1e-7),
                           o.get("jackknife", False), max(1, args.threads))


def cmd_fit(args, doc, base, out):
    cfg.require(doc, "model", "sites", "data")
    sites = cfg.build_sites(doc, base)
    template = cfg.build_model(doc["model"], sites)
    data = io.load_observations(cfg.resolve(base, doc["data"]), sites)
    risk = cfg.build_risk(doc.get("risk", {"kind": "l1"}))
    tcfg = _thresholds(doc)
    seed = _seed(args, doc)
    res = fit(template, data, risk, tcfg, _optimizer(doc, args), seed)
    io.write_json(out / "fit.json", res.to_dict())
    t = doc.get("threshold", {})
    if t.get("gpd_table") or tcfg.method == "gpd-stability":
        _, table = select_threshold(risk_values(data, risk), tcfg.method, tcfg.q, tol=tcfg.tol)
        if table is not None:
            rows = [[r["u"], r["n_exceed"], r["shape"], r["shape_se"], r["scale"], r["scale_se"]]
                    for r in table.rows()]
            io.write_rows(out / "gpd_stability.csv",
                          ["u", "n_exceed", "shape", "shape_se", "scale", "scale_se"], rows)
    return {"converged": res.converged, "aic": res.aic, "n_exceed": res.n_exceed}


def apply_estimates(block: dict, estimates: dict) -> dict:
    """Model block with fitted values substituted."""
    new = json.loads(json.dumps(block))
    for k in ("lam", "smooth", "rotation", "stretch", "nu"):
        if k in estimates:
            new[k] = estimates[k]
    coefs = sorted((int(k[1:]), v) for k, v in estimates.items() if k.startswith("b") and k[1:].isdigit())
    if coefs:
        if "skew" not in new:
            raise ConfigError("fitted skew coefficients need a skew block in the model")
        new["skew"]["coef"] = [v for _, v in coefs]
    return new


def cmd_depmap(args, doc, base, out):
    cfg.require(doc, "sites", "depmap")
    sites = cfg.build_sites(doc, base)
    block = doc["depmap"]
    written = []
    model = data = None
    if block.get("analytic", True):
        cfg.require(doc, "model")
        mblock = doc["model"]
        if "fit_result" in doc:
            fitted = json.loads(cfg.resolve(base, doc["fit_result"]).read_text())
            mblock = apply_estimates(mblock, fitted["estimates"])
        model = cfg.build_model(mblock, sites)
    mode = block.get("empirical")
    if mode:
        cfg.require(doc, "data")
        data = io.load_observations(cfg.resolve(base, doc["data"]), sites)
    for ref_id in block["references"]:
        if ref_id not in sites.site_ids:
            raise ConfigError(f"unknown reference site id {ref_id!r}")
        ref = sites.site_ids.index(ref_id)
        maps = []
        if model is not None:
            maps.append(depmap(model, ref))
        if data is not None:
            maps.append(depmap(data, ref, mode, block.get("u")))
        for dm in maps:
            name = f"depmap_{ref_id}_{dm.source}.csv"
            dm.to_csv(out / name)
            written.append(name)
    return {"files": written}


def cmd_bench(args, doc, base, out):
    cfg.require(doc, "bench")
    b = doc["bench"]
    reps, seed = b.get("reps", 100_000), _seed(args, doc)
    rows = []
    for D in b["D"]:
        model = table_grid_model(D, b.get("lam", 2.0), b.get("smooth", 1.0))
        for p in b["p"]:
            base_pct, scaled_pct = acceptance_rates(model, RiskSpec("lp", p), reps, seed)
            rows.append([D, p, base_pct, scaled_pct, reps, seed])
    io.write_rows(out / "bench_accept.csv",
                  ["D", "p", "accept_baseline_pct", "accept_scaled_pct", "reps", "seed"],
                  [[r[0], f"{r[1]:g}", float(r[2]), float(r[3]), r[4], r[5]] for r in rows])
    return {"cells": len(rows)}


def cmd_transform(args, doc, base, out):
    cfg.require(doc, "sites", "data")
    sites = cfg.build_sites(doc, base)
    data = io.load_observations(cfg.resolve(base, doc["data"]), sites)
    t = doc.get("transform", {})
    target, zero = t.get("target", "pareto"), t.get("zero_policy", "missing")
    res = marginal_transform(data, target, zero)
    io.write_observations(out / "transformed.csv", res, {"zero_policy": zero})
    return {"margins": target, "zero_policy": zero}


def cmd_oracle(args, doc, base, out):
    from .oracle import finite_diff_partial, kappa_quadrature, spectral_logpdf

    cfg.require(doc, "model", "sites", "oracle")
    sites = cfg.build_sites(doc, base)
    model = cfg.build_model(doc["model"], sites).model
    o = doc["oracle"]
    x = np.array(o["x"], dtype=float)
    if x.size != model.dim:
        raise ConfigError("oracle point has the wrong dimension")
    subset = o.get("subset")
    if subset is None or len(subset) == model.dim:
        ref = kappa_quadrature(spectral_logpdf(model), x, o.get("tol", 1e-8))
        closed = model.intensity(x)
    else:
        ref = finite_diff_partial(lambda y: -model.exponent(y), x, subset)
        closed = model.partial(x, subset)
    report = {"closed_form": closed, "oracle": ref.value, "oracle_error": ref.error,
              "method": ref.method, "ok": ref.ok}
    print(json.dumps(report, indent=2))
    return report


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "depmap": cmd_depmap,
            "bench-accept": cmd_bench, "transform": cmd_transform, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spatex", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="{simulate,fit,depmap,bench-accept,transform}")
    for name in COMMANDS:
        kw = {} if name == "oracle" else {"help": f"run the {name} step"}
        sp = sub.add_parser(name, **kw)
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("--threads", type=int, default=1, help="worker cap")
        sp.add_argument("--out", help="output directory")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        doc, base = cfg.load_config(args.config)
        out = _outdir(args, doc, base)
        extra = COMMANDS[args.command](args, doc, base, out)
        if args.command != "oracle":
            io.write_manifest(out / "manifest.json", args.command, doc, _seed(args, doc),
                              time.perf_counter() - start, extra)
    except (ConfigError, DataError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
