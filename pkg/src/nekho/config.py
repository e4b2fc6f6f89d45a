"""Experiment configuration: JSON schema, validation and object builders."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np

from .diophantine import ForcingVector, KNOWN_VECTORS
from .dynamics import Harmonic, HamiltonianSpec, State
from .errors import ConfigError

_num = {"type": "number"}
_int = {"type": "integer"}
_vec = {"type": "array", "items": _num}
_ivec = {"type": "array", "items": _int}
_box = {
    "type": "object",
    "properties": {"lo": _vec, "hi": _vec},
    "required": ["lo", "hi"],
    "additionalProperties": False,
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "problem": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 1},
                "alpha": _vec,
                "alpha_kind": {"enum": sorted(KNOWN_VECTORS)},
                "Q": {"type": "array", "items": _vec},
                "w": _vec,
                "harmonics": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"k": _ivec, "l": _ivec, "re": _num, "im": _num},
                        "required": ["k", "l"],
                        "additionalProperties": False,
                    },
                },
                "eps": {"type": "number", "minimum": 0},
                "eps_grid": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "eps_mode": {"enum": ["amplitude", "norm"]},
                "r0": {"type": "number", "exclusiveMinimum": 0},
                "s0": {"type": "number", "exclusiveMinimum": 0},
                "domain": _box,
                "gamma": {"type": "number", "exclusiveMinimum": 0},
                "tau": {"type": "number", "minimum": 0},
                "K_max": {"type": "integer", "minimum": 1},
                "ell": {"type": "number", "exclusiveMinimum": 0},
                "M": {"type": "number", "exclusiveMinimum": 0},
                "mbar": {"type": "number", "exclusiveMinimum": 0},
                "gamma_prime": {"type": "number", "exclusiveMinimum": 0},
                "tau_prime": {"type": "number", "minimum": 0},
            },
            "required": ["n", "m"],
            "additionalProperties": False,
        },
        "geometry": {
            "type": "object",
            "properties": {
                "K": {"type": "number", "minimum": 1},
                "K_grid": {"type": "array", "items": {"type": "number", "minimum": 1}},
                "box": _box,
                "samples": {"type": "integer", "minimum": 1},
                "certify_samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "d": {"type": "integer", "minimum": 0},
                "L": {"type": "array", "items": _ivec},
                "lambda_scale": {"type": "number", "minimum": 0},
                "svg": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "run": {
            "type": "object",
            "properties": {
                "T": {"type": "number"},
                "T_schedule": {"enum": ["fixed", "thm1"]},
                "h_step": {"type": "number", "exclusiveMinimum": 0},
                "stride": {"type": "integer", "minimum": 1},
                "I0": {"oneOf": [_vec, {"type": "array", "items": _vec}]},
                "theta0": _vec,
                "phi0": _vec,
                "J0": _vec,
                "initial_count": {"type": "integer", "minimum": 1},
                "theorem": {"enum": ["1", "2", "3", "33", "4"]},
                "printed_form": {"type": "boolean"},
                "outputs": {"type": "object", "additionalProperties": {"type": "string"}},
            },
            "additionalProperties": False,
        },
    },
    "required": ["problem"],
    "additionalProperties": False,
}


def _path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def validate(cfg: dict) -> dict:
    """Schema plus cross-field checks; raises ConfigError with field paths."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("; ".join(f"{_path(e)}: {e.message}" for e in errors))
    p = cfg["problem"]
    n, m = p["n"], p["m"]
    if "alpha" in p and "alpha_kind" in p:
        raise ConfigError("problem: give either alpha or alpha_kind, not both")
    a = alpha_of(cfg)
    if a.m != m:
        raise ConfigError(f"problem/alpha: length {a.m} does not match m={m}")
    if "Q" in p:
        Q = p["Q"]
        if len(Q) != n or any(len(r) != n for r in Q):
            raise ConfigError(f"problem/Q: must be {n}x{n}")
    if "w" in p and len(p["w"]) != n:
        raise ConfigError(f"problem/w: length must be n={n}")
    for i, h in enumerate(p.get("harmonics", [])):
        if len(h["k"]) != n or len(h["l"]) != m:
            raise ConfigError(f"problem/harmonics/{i}: k must have length {n} and l length {m}")
    if "domain" in p:
        for key in ("lo", "hi"):
            if len(p["domain"][key]) != n:
                raise ConfigError(f"problem/domain/{key}: length must be n={n}")
    g = cfg.get("geometry", {})
    if "box" in g:
        for key in ("lo", "hi"):
            if len(g["box"][key]) != n:
                raise ConfigError(f"geometry/box/{key}: length must be n={n}")
    for i, row in enumerate(g.get("L", [])):
        if len(row) != n + m:
            raise ConfigError(f"geometry/L/{i}: length must be n+m={n + m}")
    r = cfg.get("run", {})
    I0 = r.get("I0")
    if I0 is not None:
        rows = I0 if (I0 and isinstance(I0[0], list)) else [I0]
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ConfigError(f"run/I0/{i}: length must be n={n}")
    for key, size in (("theta0", n), ("phi0", m), ("J0", m)):
        if key in r and len(r[key]) != size:
            raise ConfigError(f"run/{key}: length must be {size}")
    return cfg


def load(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("<root>: config must be a JSON object")
    return validate(cfg)


def alpha_of(cfg: dict) -> ForcingVector:
    p = cfg["problem"]
    if "alpha_kind" in p:
        return ForcingVector.named(p["alpha_kind"])
    if "alpha" in p:
        return ForcingVector(tuple(p["alpha"]))
    raise ConfigError("problem: alpha or alpha_kind is required")


def spec_of(cfg: dict, eps: Optional[float] = None) -> HamiltonianSpec:
    """Hamiltonian from the problem block; eps defaults to problem.eps (or 0)."""
    p = cfg["problem"]
    n = p["n"]
    Q = np.asarray(p.get("Q", np.eye(n).tolist()), dtype=float)
    w = np.asarray(p.get("w", [0.0] * n), dtype=float)
    shape = [Harmonic(h["k"], h["l"], complex(h.get("re", 0.0), h.get("im", 0.0)))
             for h in p.get("harmonics", [])]
    dom = p.get("domain")
    domain = (np.asarray(dom["lo"]), np.asarray(dom["hi"])) if dom else None
    e = p.get("eps", 0.0) if eps is None else eps
    try:
        return HamiltonianSpec.build(Q, w, alpha_of(cfg), shape, e, r0=p.get("r0", 1.0),
                                     s0=p.get("s0", 1.0), domain=domain,
                                     eps_mode=p.get("eps_mode", "amplitude"))
    except ValueError as exc:
        raise ConfigError(f"problem: {exc}") from None


def initial_states(cfg: dict, spec: HamiltonianSpec, rng: np.random.Generator) -> list[State]:
    r = cfg.get("run", {})
    n, m = spec.n, spec.m
    th = r.get("theta0", [0.0] * n)
    ph = r.get("phi0", [0.0] * m)
    J0 = r.get("J0", [0.0] * m)
    if "I0" in r:
        I0 = r["I0"]
        rows = I0 if (I0 and isinstance(I0[0], list)) else [I0]
        return [State(th, ph, row, J0) for row in rows]
    count = r.get("initial_count", 1)
    lo, hi = spec.domain
    return [State(rng.uniform(0, 2 * math.pi, n), rng.uniform(0, 2 * math.pi, m),
                  rng.uniform(lo, hi), J0) for _ in range(count)]
