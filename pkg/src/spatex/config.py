"""Run configuration: a single JSON document checked against a strict
schema before anything is computed."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .model.geometry import SiteSet, SkewFieldSpec, VariogramSpec
from .model.spec import ModelSpec
from .simulate import RiskSpec

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}


def _obj(props: dict, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


SCHEMA = _obj({
    "model": _obj({
        "variant": {"enum": ["br", "sbr", "tet"]},
        "lam": _POS,
        "smooth": {"type": "number", "exclusiveMinimum": 0, "maximum": 2},
        "rotation": _NUM,
        "stretch": _POS,
        "nu": _POS,
        "anchor": _POINT,
        "cdf_tol": _POS,
        "skew": _obj({
            "centers": {"type": "array", "items": _POINT, "minItems": 1},
            "coef": {"type": "array", "items": _NUM, "minItems": 1},
            "bandwidth": _POS,
            "background": {"type": ["array", "null"], "items": _NUM},
        }, ["centers", "coef", "bandwidth"]),
    }, ["variant", "lam"]),
    "sites": {"oneOf": [
        {"type": "string"},
        _obj({"grid": _obj({"side": {"type": "integer", "minimum": 1}, "start": _NUM,
                            "step": _POS}, ["side"])}, ["grid"]),
    ]},
    "data": {"type": "string"},
    "fit_result": {"type": "string"},
    "risk": _obj({
        "kind": {"enum": ["l1", "lp", "linf", "linear"]},
        "p": {"type": "number", "exclusiveMinimum": 1},
        "weights": {"type": "array", "items": {"type": "number", "minimum": 0}},
    }, ["kind"]),
    "threshold": _obj({
        "method": {"enum": ["quantile", "gpd-stability"]},
        "q": {"type": "number", "minimum": 0, "maximum": 1},
        "u": _POS,
        "tol": _POS,
        "gpd_table": {"type": "boolean"},
    }),
    "optimizer": _obj({
        "free": {"type": "array", "items": {"enum": ["lam", "smooth", "rotation", "stretch", "nu"]},
                 "uniqueItems": True},
        "starts": {"type": "integer", "minimum": 1},
        "max_evals": {"type": "integer", "minimum": 10},
        "xatol": _POS,
        "fatol": _POS,
        "jackknife": {"type": "boolean"},
    }),
    "simulate": _obj({
        "n": {"type": "integer", "minimum": 1},
        "kind": {"enum": ["maxstable", "rpareto-l1", "rpareto-convex", "rpareto-baseline"]},
        "M": _POS,
    }, ["n"]),
    "depmap": _obj({
        "references": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "analytic": {"type": "boolean"},
        "empirical": {"enum": ["madogram", "exceedance", None]},
        "u": _POS,
    }, ["references"]),
    "bench": _obj({
        "D": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "p": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 1}, "minItems": 1},
        "reps": {"type": "integer", "minimum": 10000},
        "lam": _POS,
        "smooth": {"type": "number", "exclusiveMinimum": 0, "maximum": 2},
    }, ["D", "p"]),
    "transform": _obj({
        "target": {"enum": ["frechet", "pareto"]},
        "zero_policy": {"enum": ["missing", "keep"]},
    }),
    "oracle": _obj({
        "x": {"type": "array", "items": _POS, "minItems": 1},
        "subset": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "tol": _POS,
    }, ["x"]),
    "seed": {"type": "integer", "minimum": 0},
    "out": {"type": "string"},
})


def load_config(path) -> tuple[dict, Path]:
    """Parse and validate; returns the document and its directory (relative
    paths inside the config are resolved against it)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    validate(doc)
    return doc, path.parent


def validate(doc: dict) -> None:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None


def require(doc: dict, *keys) -> None:
    missing = [k for k in keys if k not in doc]
    if missing:
        raise ConfigError(f"config is missing required block(s): {', '.join(missing)}")


def resolve(base: Path, p: str) -> Path:
    q = Path(p)
    return q if q.is_absolute() else base / q


def build_sites(doc: dict, base: Path) -> SiteSet:
    from .io import load_sites

    require(doc, "sites")
    s = doc["sites"]
    if isinstance(s, str):
        return load_sites(resolve(base, s))
    g = s["grid"]
    return SiteSet.grid(g["side"], g.get("start", 1.0), g.get("step", 1.0))


def build_model(block: dict, sites: SiteSet) -> ModelSpec:
    vario = VariogramSpec(block["lam"], block.get("smooth", 1.0), block.get("rotation", 0.0),
                          block.get("stretch", 1.0))
    skew = None
    if "skew" in block:
        sk = block["skew"]
        bg = sk.get("background")
        skew = SkewFieldSpec(np.array(sk["centers"]), np.array(sk["coef"]), sk["bandwidth"],
                             None if bg is None else np.array(bg))
    return ModelSpec(block["variant"], sites, vario, skew, block.get("nu"),
                     tuple(block.get("anchor", (0.0, 0.0))), block.get("cdf_tol"))


def build_risk(block: dict) -> RiskSpec:
    w = block.get("weights")
    return RiskSpec(block["kind"], block.get("p"), None if w is None else np.array(w))
