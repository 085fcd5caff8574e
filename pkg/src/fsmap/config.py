"""Flat key=value configuration with fixed sections and strict key checking.

Sections and keys (defaults in parentheses):

[grid]        n (1), N (32), box_period (2*pi)
[physics]     s (0.75), sigma (1.5), amplitude (0.01)
[integrator]  scheme (etd_rk4), dt (0.001), T (1.0), renormalize (on),
              dealias (on), stride (1)
[experiment]  seed (0), samples (10000), cutoff (1), frames (64),
              iterations (5)

Unknown sections or keys are configuration errors; so are unparseable values.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass

from .errors import ConfigurationError
from .solver import INTEGRATORS, SimConfig

_BOOL = {"on": True, "true": True, "1": True, "yes": True,
         "off": False, "false": False, "0": False, "no": False}

SCHEMA = {
    "grid": {"n": int, "N": int, "box_period": float},
    "physics": {"s": float, "sigma": float, "amplitude": float},
    "integrator": {"scheme": str, "dt": float, "T": float,
                   "renormalize": "bool", "dealias": "bool", "stride": int},
    "experiment": {"seed": int, "samples": int, "cutoff": float,
                   "frames": int, "iterations": int},
}

DEFAULTS = {
    "grid": {"n": 1, "N": 32, "box_period": 2.0 * math.pi},
    "physics": {"s": 0.75, "sigma": 1.5, "amplitude": 0.01},
    "integrator": {"scheme": "etd_rk4", "dt": 1e-3, "T": 1.0,
                   "renormalize": True, "dealias": True, "stride": 1},
    "experiment": {"seed": 0, "samples": 10_000, "cutoff": 1.0,
                   "frames": 64, "iterations": 5},
}


@dataclass
class LabConfig:
    """Validated configuration: one flat dict per section."""

    grid: dict
    physics: dict
    integrator: dict
    experiment: dict

    def sim_config(self, **overrides) -> SimConfig:
        kwargs = dict(
            n=self.grid["n"], N=self.grid["N"], box_period=self.grid["box_period"],
            s=self.physics["s"], sigma=self.physics["sigma"],
            amplitude=self.physics["amplitude"],
            integrator=self.integrator["scheme"], dt=self.integrator["dt"],
            T=self.integrator["T"], renormalize=self.integrator["renormalize"],
            dealias=self.integrator["dealias"], stride=self.integrator["stride"],
            seed=self.experiment["seed"])
        kwargs.update(overrides)
        try:
            return SimConfig(**kwargs)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc

    def as_flat_dict(self) -> dict:
        out = {}
        for section in SCHEMA:
            for key, val in getattr(self, section).items():
                out[f"{section}.{key}"] = val
        return out


def _convert(section: str, key: str, raw: str):
    kind = SCHEMA[section][key]
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low not in _BOOL:
                raise ValueError(f"expected on/off, got {raw!r}")
            return _BOOL[low]
        return kind(raw)
    except ValueError as exc:
        raise ConfigurationError(
            f"bad value for [{section}] {key}: {raw!r} ({exc})") from exc


def default_config() -> LabConfig:
    return LabConfig(**{sec: dict(vals) for sec, vals in DEFAULTS.items()})


def load_config(path: str | None) -> LabConfig:
    """Parse and validate; path=None yields the defaults."""
    cfg = default_config()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str    # keys are case sensitive: n vs N
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"unknown key {key!r} in section [{section}]")
            getattr(cfg, section)[key] = _convert(section, key, raw)
    _validate(cfg)
    return cfg


def _validate(cfg: LabConfig):
    g = cfg.grid
    if g["n"] not in (1, 2, 3):
        raise ConfigurationError(f"[grid] n must be 1, 2 or 3, got {g['n']}")
    if g["N"] < 8 or g["N"] & (g["N"] - 1):
        raise ConfigurationError(f"[grid] N must be a power of two >= 8, got {g['N']}")
    if not 0.0 < cfg.physics["s"] <= 1.0:
        raise ConfigurationError(f"[physics] s must lie in (0, 1], got {cfg.physics['s']}")
    if cfg.integrator["scheme"] not in INTEGRATORS:
        raise ConfigurationError(
            f"[integrator] scheme must be one of {INTEGRATORS}, "
            f"got {cfg.integrator['scheme']!r}")
    if cfg.experiment["seed"] < 0:
        raise ConfigurationError("[experiment] seed must be a nonnegative integer")
