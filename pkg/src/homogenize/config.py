"""Experiment configuration files.

Plain-text sections of ``key = value`` lines::

    [microstructure]
    kind = circular_inclusion
    a_matrix = 1
    a_inclusion = 10
    radius = 0.25

    [nonlinearity]
    kind = cubic

    [load]
    kind = one

    [sweep]
    eps_list = 1/4, 1/8, 1/16
    cells_per_period = 16

Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction

from .exceptions import ConfigurationError
from .experiments import SweepConfig
from .microstructure import MicrostructureSpec, make_nonlinearity
from .semilinear import NewtonConfig

SCHEMA = {
    "microstructure": {"kind": str, "a_matrix": float, "a_inclusion": float, "radius": float},
    "nonlinearity": {"kind": str, "c": float},
    "load": {"kind": str, "value": float},
    "sweep": {"eps_list": "eps", "cells_per_period": int, "cell_mesh_n": int, "reference_n": int},
    "solver": {"residual_tol": float, "max_newton": int, "picard_fallback": bool,
               "cg_tol": float, "strategy": str, "cell_tol": float},
    "pairing": {"phi": str, "eps_list": "eps", "points_per_period": int},
}


@dataclass
class ExperimentConfig:
    sweep: SweepConfig
    cell_tol: float = 1e-12
    pairing_phi: str = "one"
    pairing_eps: tuple = (1 / 4, 1 / 8, 1 / 16)
    points_per_period: int = 32
    raw: dict = field(default_factory=dict, repr=False)


def parse_eps_list(text: str) -> tuple:
    try:
        vals = tuple(float(Fraction(tok.strip())) for tok in text.split(",") if tok.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"cannot parse eps_list {text!r}") from exc
    if not vals:
        raise ConfigurationError("eps_list is empty")
    return vals


def _convert(section, key, kind, text):
    try:
        if kind == "eps":
            return parse_eps_list(text)
        if kind is bool:
            low = text.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is float:
            return float(Fraction(text.strip()))
        return kind(text.strip())
    except ValueError as exc:
        raise ConfigurationError(f"[{section}] {key}: invalid value {text!r}") from exc


def parse_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc

    raw = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown section [{section}]")
        raw[section] = {}
        for key, value in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"unknown key {key!r} in [{section}]")
            raw[section][key] = _convert(section, key, SCHEMA[section][key], value)

    micro = raw.get("microstructure", {})
    spec = MicrostructureSpec(**micro)
    nl = raw.get("nonlinearity", {})
    g = make_nonlinearity(nl.get("kind", "cubic"), nl.get("c", 1.0))
    load = raw.get("load", {})
    solver = dict(raw.get("solver", {}))
    cell_tol = solver.pop("cell_tol", 1e-12)
    newton = NewtonConfig(**solver)
    sweep = SweepConfig(spec=spec, g=g, load=load.get("kind", "one"),
                        load_value=load.get("value", 1.0), newton=newton,
                        **raw.get("sweep", {}))
    pairing = raw.get("pairing", {})
    if pairing.get("phi", "one") not in PAIRING_FACTORS:
        raise ConfigurationError(f"unknown pairing phi {pairing['phi']!r}")
    return ExperimentConfig(sweep=sweep, cell_tol=cell_tol,
                            pairing_phi=pairing.get("phi", "one"),
                            pairing_eps=pairing.get("eps_list", (1 / 4, 1 / 8, 1 / 16)),
                            points_per_period=pairing.get("points_per_period", 32),
                            raw=raw)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())


PAIRING_FACTORS = {
    "one": lambda x: 1.0,
    "x1": lambda x: x[..., 0],
}
