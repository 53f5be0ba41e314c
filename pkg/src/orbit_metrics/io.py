"""Instance files: schema, loading and canonical serialisation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import jsonschema
import numpy as np

from .atomic import AtomicHom, ModelSpec, atomic_from_json, matrix_model, model_from_json
from .errors import DimensionMismatch, SchemaError, ValidationError
from .k1 import K1Labeling
from .matrix import as_matrix, eigen_normal

_NUMBER_OR_RATIONAL = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}
_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_ELEMENT = {
    "type": "object",
    "required": ["free"],
    "properties": {
        "free": {"type": "array", "items": {"type": "integer"}},
        "torsion": {"type": "array", "items": {"type": "integer"}},
        "stage": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}
_GROUP = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["simplicial", "torsion", "bratteli"]},
        "k": {"type": "integer", "minimum": 1},
        "orders": {"type": "array", "items": {"type": "integer", "minimum": 2}},
        "maps": {"type": "array", "items": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}},
        "stage_cap": {"type": "integer", "minimum": 1},
    },
}
_MATRIX = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "array", "minItems": 1, "items": _POINT},
}
_SIDE = {
    "type": "object",
    "oneOf": [
        {
            "required": ["atomic"],
            "properties": {
                "atomic": {
                    "type": "object",
                    "required": ["atoms"],
                    "properties": {
                        "atoms": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "required": ["point", "class"],
                                "properties": {"point": _POINT, "class": _ELEMENT},
                            },
                        }
                    },
                }
            },
        },
        {"required": ["matrix"], "properties": {"matrix": _MATRIX}},
    ],
}

INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["x", "y"],
    "properties": {
        "name": {"type": "string"},
        "model": {
            "type": "object",
            "oneOf": [
                {"required": ["matrix"], "properties": {"matrix": {"type": "integer", "minimum": 1}}},
                {
                    "required": ["group", "unit", "pairing"],
                    "properties": {
                        "group": _GROUP,
                        "unit": _ELEMENT,
                        "pairing": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _NUMBER_OR_RATIONAL}},
                        "simple": {"type": "boolean"},
                    },
                },
            ],
        },
        "x": _SIDE,
        "y": _SIDE,
        "relation": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}},
        "k1": {
            "type": "object",
            "required": ["h"],
            "properties": {
                "h": {"type": "number", "exclusiveMinimum": 0},
                "labels": {
                    "type": "object",
                    "additionalProperties": {
                        "type": "object",
                        "required": ["x", "y"],
                        "properties": {
                            "x": {"type": "array", "items": {"type": "integer"}},
                            "y": {"type": "array", "items": {"type": "integer"}},
                        },
                    },
                },
            },
        },
        "options": {
            "type": "object",
            "properties": {
                "grid_pitch": {"type": "number", "exclusiveMinimum": 0},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "budget": {"type": "integer", "minimum": 1},
                "stage_cap": {"type": "integer", "minimum": 1},
                "C": {"type": "number", "exclusiveMinimum": 0},
                "exact_discs": {"type": "boolean"},
                "cluster_tol": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "expected": {"type": "array"},
        "provenance": {"type": "array", "items": {"type": "string"}},
    },
}

DEFAULT_OPTIONS = {
    "grid_pitch": 0.05,
    "tol": 1e-9,
    "seed": 0,
    "budget": 4,
    "C": 1 / 3,
    "exact_discs": False,
    "cluster_tol": None,
}


@dataclass
class ProblemInstance:
    model: ModelSpec
    x: AtomicHom
    y: AtomicHom
    x_matrix: np.ndarray | None = None
    y_matrix: np.ndarray | None = None
    relation: list | None = None
    k1: dict | None = None
    options: dict = field(default_factory=dict)
    name: str = ""

    @property
    def matrix_mode(self) -> bool:
        return self.x_matrix is not None

    def labeling(self) -> K1Labeling | None:
        return K1Labeling.from_json(self.k1) if self.k1 is not None else None


def validate(obj) -> None:
    """Raise :class:`SchemaError` listing every violation with its JSON pointer."""
    validator = jsonschema.Draft202012Validator(INSTANCE_SCHEMA)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        problems = [{"pointer": _pointer(e.absolute_path), "message": e.message} for e in errors]
        raise SchemaError(f"instance violates schema at {problems[0]['pointer']}", errors=problems)


def _pointer(path) -> str:
    parts = [str(p).replace("~", "~0").replace("/", "~1") for p in path]
    return "/" + "/".join(parts) if parts else ""


def _with_stage_cap(model_obj: dict, cap) -> dict:
    if cap is None or "group" not in model_obj or model_obj["group"].get("kind") != "bratteli":
        return model_obj
    out = dict(model_obj)
    out["group"] = dict(model_obj["group"], stage_cap=cap)
    return out


def load_instance(obj: dict, overrides: dict | None = None) -> ProblemInstance:
    validate(obj)
    options = dict(DEFAULT_OPTIONS)
    options.update(obj.get("options", {}))
    options.update({k: v for k, v in (overrides or {}).items() if v is not None})
    sides = [obj["x"], obj["y"]]
    kinds = {"matrix" if "matrix" in s else "atomic" for s in sides}
    if len(kinds) != 1:
        raise ValidationError("x and y must both be atomic or both be matrices")
    if kinds == {"matrix"}:
        mx, my = as_matrix(obj["x"]["matrix"]), as_matrix(obj["y"]["matrix"])
        if mx.shape != my.shape:
            raise DimensionMismatch("x and y have different sizes")
        n = mx.shape[0]
        model_obj = obj.get("model", {"matrix": n})
        if model_obj != {"matrix": n}:
            raise ValidationError(f"matrix inputs require the model {{'matrix': {n}}}")
        ctol = options["cluster_tol"]
        _, hx = eigen_normal(mx, ctol)
        _, hy = eigen_normal(my, ctol)
        return ProblemInstance(matrix_model(n), hx, hy, mx, my, obj.get("relation"), obj.get("k1"), options, obj.get("name", ""))
    if "model" not in obj:
        raise ValidationError("atomic inputs need a model")
    model = model_from_json(_with_stage_cap(obj["model"], options.get("stage_cap")))
    hx = atomic_from_json(obj["x"]["atomic"], model)
    hy = atomic_from_json(obj["y"]["atomic"], model)
    return ProblemInstance(model, hx, hy, None, None, obj.get("relation"), obj.get("k1"), options, obj.get("name", ""))


def _clean(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.floating,)):
        return _clean(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def dumps(report) -> str:
    """Canonical JSON: sorted keys, fixed separators, no timestamps."""
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"

