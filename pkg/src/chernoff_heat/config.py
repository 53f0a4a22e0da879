"""Experiment configuration: JSON schema, validation and builders.

A configuration names a domain, the iteration parameters, initial data
and optionally a boundary coefficient, a reference solver and an output
directory.  Schema violations and cross-field incompatibilities (a
coefficient with a variant that takes none, a reference the geometry
cannot support) raise :class:`~chernoff_heat.errors.ConfigError` with a
message naming the offending key.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .analytic import (
    Constant,
    CosineMode1D,
    GaussianBump1D,
    Polynomial1D,
    RadialPolynomial2D,
    SineMode1D,
    SmoothTestFunction,
)
from .chernoff import VARIANTS, SchemeConfig
from .errors import ConfigError, ReferenceUnavailable
from .extension import EndpointRobin, FourierRobin, RobinCoefficient
from .geometry import Disk, DomainGeometry, Interval, StarDomain
from .reference import IntervalEigenExpansion, radial_crank_nicolson

__all__ = [
    "SCHEMA",
    "load_config",
    "validate_config",
    "build_domain",
    "build_beta",
    "build_u0",
    "build_scheme_config",
    "build_reference",
]

_POINT2 = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["domain", "scheme", "u0"],
    "additionalProperties": False,
    "properties": {
        "domain": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["type", "a", "b"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "interval"},
                        "a": {"type": "number"},
                        "b": {"type": "number"},
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "center", "radius"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "disk"},
                        "center": _POINT2,
                        "radius": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "center", "cos", "sin"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "star2d"},
                        "center": _POINT2,
                        "cos": {
                            "type": "array",
                            "items": {"type": "number"},
                            "minItems": 1,
                        },
                        "sin": {"type": "array", "items": {"type": "number"}},
                    },
                },
            ]
        },
        "beta": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["left", "right"],
                    "additionalProperties": False,
                    "properties": {
                        "left": {"type": "number", "minimum": 0},
                        "right": {"type": "number", "minimum": 0},
                    },
                },
                {
                    "type": "object",
                    "required": ["cos"],
                    "additionalProperties": False,
                    "properties": {
                        "cos": {
                            "type": "array",
                            "items": {"type": "number"},
                            "minItems": 1,
                        },
                        "sin": {"type": "array", "items": {"type": "number"}},
                    },
                },
            ]
        },
        "scheme": {
            "type": "object",
            "required": ["variant", "t", "steps", "h"],
            "additionalProperties": False,
            "properties": {
                "variant": {"enum": list(VARIANTS)},
                "t": {"type": "number", "exclusiveMinimum": 0},
                "steps": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 1},
                    "minItems": 1,
                },
                "h": {"type": "number", "exclusiveMinimum": 0},
                "kernel_tol": {
                    "type": "number",
                    "exclusiveMinimum": 0,
                    "maximum": 1e-3,
                },
                "collar": {
                    "type": "object",
                    "required": ["cw", "alpha"],
                    "additionalProperties": False,
                    "properties": {
                        "cw": {"type": "number", "exclusiveMinimum": 0},
                        "alpha": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                "interpolation": {"enum": ["linear", "cubic"]},
            },
        },
        "u0": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["type", "coeffs"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "polynomial"},
                        "coeffs": {
                            "type": "array",
                            "items": {"type": "number"},
                            "minItems": 1,
                        },
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "k"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"enum": ["sine", "cosine"]},
                        "k": {"type": "integer", "minimum": 1},
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "value"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "constant"},
                        "value": {"type": "number"},
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "center", "spread"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "gaussian"},
                        "center": {"type": "number"},
                        "spread": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "coeffs"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "radial_polynomial"},
                        "coeffs": {
                            "type": "array",
                            "items": {"type": "number"},
                            "minItems": 1,
                        },
                    },
                },
            ]
        },
        "reference": {"enum": ["eigen", "radial_cn", "none"]},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
        "seed": {"type": "integer", "minimum": 0},
    },
}

_ONE_DIMENSIONAL_U0 = ("polynomial", "sine", "cosine", "gaussian")


def load_config(path, variant: str | None = None) -> dict:
    """Read, schema-check and cross-validate a configuration file."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    validate_config(raw, variant=variant)
    return raw


def validate_config(cfg: dict, variant: str | None = None) -> None:
    """Schema plus cross-field rules; ``variant`` overrides the config's."""
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = exc.json_path if exc.json_path != "$" else "config"
        raise ConfigError(f"{where}: {exc.message}") from exc

    scheme = cfg["scheme"]
    active = variant if variant is not None else scheme["variant"]
    if variant is not None and variant not in VARIANTS:
        raise ConfigError(f"unknown variant override {variant!r}")
    if active == "robin" and "beta" not in cfg:
        raise ConfigError("variant 'robin' requires a 'beta' block")
    if active != "robin" and "beta" in cfg:
        raise ConfigError(f"variant '{active}' does not take a 'beta' block")
    if "collar" in scheme and active != "dirichlet":
        raise ConfigError("'collar' applies only to the 'dirichlet' variant")

    dom_type = cfg["domain"]["type"]
    u0_type = cfg["u0"]["type"]
    if dom_type == "interval" and u0_type == "radial_polynomial":
        raise ConfigError("u0 'radial_polynomial' needs a two-dimensional domain")
    if dom_type != "interval" and u0_type in _ONE_DIMENSIONAL_U0:
        raise ConfigError(f"u0 '{u0_type}' applies only to an interval domain")
    if "beta" in cfg:
        endpoint_style = "left" in cfg["beta"]
        if endpoint_style != (dom_type == "interval"):
            raise ConfigError(
                "beta block style does not match the domain: use left/right "
                "for an interval, cos/sin otherwise"
            )

    reference = cfg.get("reference", "none")
    if reference == "eigen" and dom_type != "interval":
        raise ConfigError("reference 'eigen' applies only to an interval domain")
    if reference == "radial_cn":
        if dom_type != "disk":
            raise ConfigError("reference 'radial_cn' applies only to a disk domain")
        if active not in ("robin", "neumann"):
            raise ConfigError(
                "reference 'radial_cn' covers the robin and neumann variants only"
            )
        if u0_type not in ("constant", "radial_polynomial"):
            raise ConfigError("reference 'radial_cn' needs radially symmetric u0")
        if active == "robin" and len(cfg["beta"].get("cos", [])) > 1:
            raise ConfigError("reference 'radial_cn' needs a constant beta")
        if active == "robin" and any(cfg["beta"].get("sin", [])):
            raise ConfigError("reference 'radial_cn' needs a constant beta")


def build_domain(block: dict) -> DomainGeometry:
    if block["type"] == "interval":
        if not block["a"] < block["b"]:
            raise ConfigError("interval requires a < b")
        return Interval(block["a"], block["b"])
    if block["type"] == "disk":
        return Disk(block["center"], block["radius"])
    return StarDomain(block["center"], block["cos"], block.get("sin", []))


def build_beta(block: dict, dom: DomainGeometry) -> RobinCoefficient:
    if "left" in block:
        return EndpointRobin(block["left"], block["right"])
    return FourierRobin(block["cos"], block.get("sin", []))


def build_u0(block: dict, dom: DomainGeometry) -> SmoothTestFunction:
    kind = block["type"]
    if kind == "polynomial":
        return Polynomial1D(block["coeffs"])
    if kind == "sine":
        return SineMode1D(block["k"], dom.a, dom.b)
    if kind == "cosine":
        return CosineMode1D(block["k"], dom.a, dom.b)
    if kind == "gaussian":
        return GaussianBump1D(block["center"], block["spread"])
    if kind == "constant":
        return Constant(block["value"], ndim=dom.ndim)
    return RadialPolynomial2D(block["coeffs"], center=dom.center)


def build_scheme_config(
    cfg: dict, dom: DomainGeometry, variant: str | None = None
) -> SchemeConfig:
    scheme = cfg["scheme"]
    active = variant if variant is not None else scheme["variant"]
    beta = build_beta(cfg["beta"], dom) if active == "robin" else None
    collar = scheme.get("collar", {})
    return SchemeConfig(
        variant=active,
        t=scheme["t"],
        steps=scheme["steps"],
        h=scheme["h"],
        kernel_tol=scheme.get("kernel_tol", 1e-12),
        beta=beta,
        collar_cw=collar.get("cw", 1.0),
        collar_alpha=collar.get("alpha", 1.0),
        interpolation=scheme.get("interpolation", "cubic"),
    )


def build_reference(
    cfg: dict,
    dom: DomainGeometry,
    scheme_cfg: SchemeConfig,
    u0: SmoothTestFunction,
):
    """Materialise the configured reference, or ``None`` for self mode."""
    kind = cfg.get("reference", "none")
    if kind == "none":
        return None
    if kind == "eigen":
        if scheme_cfg.variant in ("dirichlet", "dirichlet_l2"):
            expansion = IntervalEigenExpansion(dom, "dirichlet", count=64)
        else:
            if scheme_cfg.variant == "robin":
                pair = (cfg["beta"]["left"], cfg["beta"]["right"])
            else:
                # neumann and the defective constant extension are both
                # measured against the coefficient-zero flow
                pair = (0.0, 0.0)
            expansion = IntervalEigenExpansion(dom, "robin", beta=pair, count=64)
        t = scheme_cfg.t

        def solve(points):
            return expansion.solve(u0, t, np.asarray(points, dtype=float))

        return solve
    if kind == "radial_cn":
        if not isinstance(dom, Disk):
            raise ReferenceUnavailable("radial reference needs a disk domain")
        beta_value = 0.0
        if scheme_cfg.variant == "robin":
            beta_value = float(cfg["beta"]["cos"][0])
        if hasattr(u0, "radial_profile"):
            profile = u0.radial_profile()
        elif isinstance(u0, Constant):
            level = u0.c

            def profile(r):
                return np.full_like(np.asarray(r, dtype=float), level)

        else:
            raise ReferenceUnavailable("radial reference needs radial initial data")
        t = scheme_cfg.t
        steps = max(4000, 4 * max(scheme_cfg.steps))
        return radial_crank_nicolson(
            dom.radius,
            beta_value,
            profile,
            t,
            dr=dom.radius / 2000.0,
            dt=t / steps,
            tol=1e-5,
        )
    raise ConfigError(f"unknown reference {kind!r}")
