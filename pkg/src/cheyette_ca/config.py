"""Experiment configuration: JSON schema, validation and construction of model objects."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

import jsonschema

from .adjusters import Cms, FraInArrears, Future, OisFuture
from .curves import CurveSet
from .errors import DomainError
from .mc import McConfig
from .model import (
    CheyetteSpec,
    HullWhiteSpec,
    MeanReversion,
    TimeDependentVol,
    hull_white_volatility,
    tanh_volatility,
)

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_PAIRS = {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}}

_ETA = {
    "type": "object",
    "minProperties": 1,
    "maxProperties": 1,
    "additionalProperties": False,
    "properties": {
        "tanh": {
            "type": "object",
            "required": ["sigma", "k", "c"],
            "additionalProperties": False,
            "properties": {"sigma": _NONNEG, "k": _NUM, "c": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1}},
        },
        "hull_white": {
            "type": "object",
            "required": ["sigma", "k"],
            "additionalProperties": False,
            "properties": {"sigma": _NONNEG, "k": _NUM},
        },
        "constant": {
            "type": "object",
            "required": ["sigma"],
            "additionalProperties": False,
            "properties": {"sigma": _NONNEG},
        },
    },
}

_MODEL = {
    "type": "object",
    "minProperties": 1,
    "maxProperties": 1,
    "additionalProperties": False,
    "properties": {
        "hull_white": {
            "type": "object",
            "required": ["sigma", "k"],
            "additionalProperties": False,
            "properties": {"sigma": _NONNEG, "k": _POS},
        },
        "cheyette": {
            "type": "object",
            "required": ["k", "eta"],
            "additionalProperties": False,
            "properties": {"k": {"oneOf": [_POS, _PAIRS]}, "eta": _ETA},
        },
    },
}

_CURVE = {
    "type": "object",
    "additionalProperties": False,
    "oneOf": [{"required": ["flat_rate"]}, {"required": ["knots"]}],
    "properties": {"flat_rate": _NUM, "knots": {**_PAIRS, "minItems": 1}, "basis": _PAIRS},
}

_PRODUCTS = {
    "futures": {
        "type": "object",
        "additionalProperties": False,
        "properties": {"tenor": _POS, "lag": _NONNEG},
    },
    "ois-future": {
        "type": "object",
        "additionalProperties": False,
        "properties": {"tenor": _POS, "mode": {"enum": ["compounding", "average"]}},
    },
    "fra-arrears": {
        "type": "object",
        "additionalProperties": False,
        "properties": {"tenor": _POS},
    },
    "cms": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "swap_tenor": _POS,
            "frequency": {"type": "integer", "minimum": 1},
            "payment_lag": {"oneOf": [_POS, {"type": "null"}]},
        },
    },
    "diagnostics": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "approx_error_times": {"type": "array", "items": _POS, "minItems": 1},
            "approx_error_paths": {"type": "integer", "minimum": 2},
        },
    },
}

_MC = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "paths": {"type": "integer", "minimum": 2},
        "steps_per_year": {"type": "integer", "minimum": 12},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "antithetic": {"type": "boolean"},
    },
}


def config_schema(subcommand: str) -> dict:
    return {
        "type": "object",
        "required": ["model", "curve", "grid"],
        "additionalProperties": False,
        "properties": {
            "model": _MODEL,
            "curve": _CURVE,
            "product": _PRODUCTS[subcommand],
            "grid": {"type": "array", "items": _POS, "minItems": 1},
            "mc": _MC,
            "output": {"type": "string", "minLength": 1},
        },
    }


class SchemaError(ValueError):
    """Configuration does not match the schema; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    model: dict
    curve: dict
    product: dict
    grid: tuple[float, ...]
    mc: McConfig
    output: str

    @property
    def model_hash(self) -> str:
        blob = json.dumps({"model": self.model, "curve": self.curve, "product": self.product}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def with_overrides(self, seed=None, paths=None, out=None) -> "ExperimentConfig":
        mc = self.mc
        if seed is not None:
            mc = replace(mc, seed=seed)
        if paths is not None:
            mc = replace(mc, paths=paths)
        return replace(self, mc=mc, output=out if out is not None else self.output)


def _path(error: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in error.absolute_path)


def parse_config(data: dict, subcommand: str) -> ExperimentConfig:
    """Validate a decoded JSON document; raises :class:`SchemaError`."""
    validator = jsonschema.Draft202012Validator(config_schema(subcommand))
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise SchemaError(_path(err), err.message)
    grid = tuple(float(t) for t in data["grid"])
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise SchemaError("$.grid", "expiries must be strictly increasing")
    try:
        mc = McConfig(**data.get("mc", {}))
    except DomainError as exc:
        raise SchemaError("$.mc", str(exc)) from exc
    cfg = ExperimentConfig(
        subcommand,
        data["model"],
        data["curve"],
        data.get("product", {}),
        grid,
        mc,
        data.get("output", f"out/{subcommand}"),
    )
    try:
        build_spec(cfg)
    except DomainError as exc:
        raise SchemaError("$.model/$.curve", str(exc)) from exc
    return cfg


def load_config(path: str | Path, subcommand: str) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError("$", f"cannot read config: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(data, subcommand)


def _mean_reversion(k) -> MeanReversion:
    return MeanReversion.constant(k) if isinstance(k, (int, float)) else MeanReversion.from_pairs(k)


def build_spec(cfg: ExperimentConfig) -> CheyetteSpec:
    curve = CurveSet.from_dict(cfg.curve)
    if "hull_white" in cfg.model:
        hw = cfg.model["hull_white"]
        return HullWhiteSpec(hw["sigma"], hw["k"]).to_cheyette(curve)
    block = cfg.model["cheyette"]
    k = _mean_reversion(block["k"])
    (name, params), = block["eta"].items()
    if name == "tanh":
        vol = tanh_volatility(params["sigma"], params["k"], params["c"])
    elif name == "hull_white":
        vol = hull_white_volatility(params["sigma"], params["k"])
    else:
        sigma = params["sigma"]
        vol = TimeDependentVol(lambda t: sigma + 0.0 * t)
    return CheyetteSpec(k, vol, curve, label=f"cheyette({name})")


def hull_white_of(cfg: ExperimentConfig) -> HullWhiteSpec | None:
    hw = cfg.model.get("hull_white")
    return HullWhiteSpec(hw["sigma"], hw["k"]) if hw else None


def build_product(cfg: ExperimentConfig, expiry: float):
    p = cfg.product
    if cfg.subcommand == "futures":
        t1 = expiry + p.get("lag", 0.0)
        return Future(expiry, t1, t1 + p.get("tenor", 0.25))
    if cfg.subcommand == "ois-future":
        return OisFuture(expiry, expiry + p.get("tenor", 0.25), p.get("mode", "compounding"))
    if cfg.subcommand == "fra-arrears":
        return FraInArrears(expiry, expiry + p.get("tenor", 0.5))
    if cfg.subcommand == "cms":
        return Cms.regular(expiry, p.get("swap_tenor", 5.0), p.get("frequency", 1), p.get("payment_lag"))
    raise DomainError(f"no product for subcommand {cfg.subcommand!r}")
