"""Scenario files: schema, validation and resolution to domain objects.

A scenario is a JSON document that names an operator backend (1D
Schrodinger grid + potential, or a synthetic spectrum), a catalog
nonlinearity, the target eigenvalue, the band and reduction parameters, a
norm schedule with branch directions, and optional expectations for
regression runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .errors import ScenarioError
from .nonlinearity import Nonlinearity, catalog
from .operator import (
    EssentialSpectrum,
    PotentialSpec,
    potential_catalog,
    sampled_potential,
)

SCENARIO_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "asymbif scenario",
    "type": "object",
    "required": ["version", "name", "operator", "nonlinearity", "lambda0", "band_halfwidth"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": 1},
        "name": {"type": "string", "minLength": 1},
        "operator": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["schrodinger1d", "synthetic"]},
                "grid": {
                    "type": "object",
                    "required": ["half_width", "n_points"],
                    "additionalProperties": False,
                    "properties": {
                        "half_width": {"type": "number", "exclusiveMinimum": 0},
                        "n_points": {"type": "integer", "minimum": 3},
                    },
                },
                "potential": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "name": {"type": "string"},
                        "params": {"type": "object"},
                        "samples": {
                            "type": "object",
                            "required": ["x", "v0", "v0_at_infinity"],
                            "additionalProperties": False,
                            "properties": {
                                "x": {"type": "array", "items": {"type": "number"}},
                                "v0": {"type": "array", "items": {"type": "number"}},
                                "v0_at_infinity": {"type": "number"},
                            },
                        },
                    },
                },
                "eigenvalues": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "essential_spectrum": {
                    "type": "object",
                    "required": ["kind"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["interval", "finite", "empty"]},
                        "edge": {"type": "number"},
                        "values": {"type": "array", "items": {"type": "number"}},
                    },
                },
            },
        },
        "nonlinearity": {
            "type": "object",
            "required": ["name"],
            "additionalProperties": False,
            "properties": {
                "name": {"type": "string"},
                "params": {"type": "object"},
            },
        },
        "lambda0": {
            "oneOf": [
                {"type": "number"},
                {
                    "type": "object",
                    "required": ["auto"],
                    "additionalProperties": False,
                    "properties": {
                        "auto": {
                            "type": "object",
                            "required": ["probe"],
                            "additionalProperties": False,
                            "properties": {"probe": {"type": "number"}},
                        }
                    },
                },
            ]
        },
        "band_halfwidth": {"type": "number", "exclusiveMinimum": 0},
        "safety": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "norm_schedule": {
            "type": "array",
            "items": {"type": "number", "minimum": 1},
            "minItems": 1,
        },
        "directions": {
            "type": "array",
            "items": {
                "oneOf": [
                    {"type": "integer", "minimum": 0},
                    {"type": "array", "items": {"type": "number"}, "minItems": 1},
                ]
            },
        },
        "verdict": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "window": {"type": "number", "exclusiveMinimum": 0},
                "slack": {"type": "number", "minimum": 1},
                "min_points": {"type": "integer", "minimum": 1},
            },
        },
        "tol_w": {"type": ["number", "null"]},
        "sphere_samples": {"type": ["integer", "null"], "minimum": 2},
        "scan": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lambda_halfwidth": {"type": "number", "exclusiveMinimum": 0},
                "norm_range": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "n_lambda": {"type": "integer", "minimum": 2},
                "n_norm": {"type": "integer", "minimum": 2},
                "floor": {"type": ["number", "null"]},
            },
        },
        "expectations": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "verdict": {"type": "string"},
                "dist_condition": {"type": "boolean"},
                "lambda_final": {"type": "number"},
                "lambda_final_tol": {"type": "number", "exclusiveMinimum": 0},
                "scan_min_exceeds": {"type": "number"},
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)


@dataclass(frozen=True)
class Scenario:
    """Validated scenario with catalog names resolved to domain objects."""

    name: str
    raw: dict[str, Any]
    operator_kind: str
    grid_spec: dict[str, Any] | None
    potential: PotentialSpec | None
    eigenvalues: list[float] | None
    essential_spectrum: EssentialSpectrum | None
    nonlinearity: Nonlinearity
    lambda0: float | None          # None means auto
    lambda0_probe: float | None
    band_halfwidth: float
    safety: float = 0.5
    norm_schedule: list[float] = field(default_factory=lambda: [10.0, 20.0, 40.0, 80.0, 160.0])
    directions: list[Any] = field(default_factory=lambda: [0])
    window: float = 0.05
    slack: float = 1.05
    min_points: int = 4
    tol_w: float | None = None
    sphere_samples: int | None = None
    scan: dict[str, Any] | None = None
    expectations: dict[str, Any] = field(default_factory=dict)


def validate_scenario_dict(doc: dict[str, Any]) -> None:
    """Schema-validate, reporting JSON-pointer style paths on failure."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: e.json_path)
    if errors:
        msgs = [f"{e.json_path}: {e.message}" for e in errors]
        raise ScenarioError("scenario schema violations:\n  " + "\n  ".join(msgs))


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def scenario_from_dict(doc: dict[str, Any]) -> Scenario:
    validate_scenario_dict(doc)

    op = doc["operator"]
    kind = op["kind"]
    grid_spec = None
    potential = None
    eigenvalues = None
    sigma = None
    if kind == "schrodinger1d":
        if "grid" not in op or "potential" not in op:
            raise ScenarioError("$.operator: schrodinger1d needs 'grid' and 'potential'")
        grid_spec = op["grid"]
        potential = _resolve_potential(op["potential"])
    else:
        if "eigenvalues" not in op or "essential_spectrum" not in op:
            raise ScenarioError(
                "$.operator: synthetic needs 'eigenvalues' and 'essential_spectrum'"
            )
        eigenvalues = [float(v) for v in op["eigenvalues"]]
        sigma = _resolve_sigma(op["essential_spectrum"])

    try:
        nl_spec = doc["nonlinearity"]
        nl = catalog(nl_spec["name"], **nl_spec.get("params", {}))
    except Exception as exc:
        raise ScenarioError(f"$.nonlinearity: {exc}") from exc

    lam0_spec = doc["lambda0"]
    if isinstance(lam0_spec, dict):
        lambda0, probe = None, float(lam0_spec["auto"]["probe"])
    else:
        lambda0, probe = float(lam0_spec), None

    schedule = [float(t) for t in doc.get("norm_schedule", [10.0, 20.0, 40.0, 80.0, 160.0])]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ScenarioError("$.norm_schedule: must be strictly increasing")

    verdict_cfg = doc.get("verdict", {})
    return Scenario(
        name=doc["name"],
        raw=doc,
        operator_kind=kind,
        grid_spec=grid_spec,
        potential=potential,
        eigenvalues=eigenvalues,
        essential_spectrum=sigma,
        nonlinearity=nl,
        lambda0=lambda0,
        lambda0_probe=probe,
        band_halfwidth=float(doc["band_halfwidth"]),
        safety=float(doc.get("safety", 0.5)),
        norm_schedule=schedule,
        directions=list(doc.get("directions", [0])),
        window=float(verdict_cfg.get("window", 0.05)),
        slack=float(verdict_cfg.get("slack", 1.05)),
        min_points=int(verdict_cfg.get("min_points", 4)),
        tol_w=doc.get("tol_w"),
        sphere_samples=doc.get("sphere_samples"),
        scan=doc.get("scan"),
        expectations=dict(doc.get("expectations", {})),
    )


def _resolve_potential(spec: dict[str, Any]) -> PotentialSpec:
    if "samples" in spec:
        s = spec["samples"]
        return sampled_potential(s["x"], s["v0"], s["v0_at_infinity"])
    if "name" not in spec:
        raise ScenarioError("$.operator.potential: needs 'name' or 'samples'")
    try:
        return potential_catalog(spec["name"], **spec.get("params", {}))
    except Exception as exc:
        raise ScenarioError(f"$.operator.potential: {exc}") from exc


def _resolve_sigma(spec: dict[str, Any]) -> EssentialSpectrum:
    kind = spec["kind"]
    try:
        if kind == "interval":
            return EssentialSpectrum.interval(float(spec["edge"]))
        if kind == "finite":
            return EssentialSpectrum.finite(spec["values"])
        return EssentialSpectrum.empty()
    except KeyError as exc:
        raise ScenarioError(f"$.operator.essential_spectrum: missing {exc}") from exc
