"""Flat ``key = value`` configuration files.

Keys are the fields of :class:`MachineParams` and :class:`SimConfig`, plus
``v_dc`` (volts) as an alternative to ``v_dc_pu``. ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import fields, replace
from typing import Optional

from imdrive.params import MachineParams, ParameterError
from imdrive.simulation import ConfigError, SimConfig, resolve_config

MACHINE_KEYS = {f.name: f for f in fields(MachineParams)}
SIM_KEYS = {f.name: f for f in fields(SimConfig)}
INT_KEYS = {"poles", "decimate"}
STR_KEYS = {"init_mode"}
EXTRA_KEYS = {"v_dc"}


def _convert(key: str, raw: str, lineno: int):
    if key in STR_KEYS:
        return raw.strip("'\"")
    try:
        if key in INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError:
        kind = "integer" if key in INT_KEYS else "number"
        raise ConfigError(f"line {lineno}: {key}: expected a {kind}, got {raw!r}") from None


def parse_config(text: str) -> tuple[SimConfig, MachineParams]:
    """Parse config text into a resolved scenario and machine parameters."""
    machine: dict = {}
    sim: dict = {}
    v_dc_volts: Optional[float] = None
    lines: dict[str, int] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key in lines:
            raise ConfigError(f"line {lineno}: {key}: duplicate key (first set on line {lines[key]})")
        lines[key] = lineno
        if key in MACHINE_KEYS:
            machine[key] = _convert(key, raw, lineno)
        elif key in SIM_KEYS:
            sim[key] = _convert(key, raw, lineno)
        elif key in EXTRA_KEYS:
            v_dc_volts = _convert(key, raw, lineno)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    if v_dc_volts is not None and "v_dc_pu" in sim:
        raise ConfigError(f"line {lines['v_dc']}: v_dc: give either v_dc or v_dc_pu, not both")

    try:
        params = MachineParams(**machine)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    if v_dc_volts is not None:
        sim["v_dc_pu"] = v_dc_volts / params.bases.v_b

    try:
        cfg = resolve_config(SimConfig(**sim), params)
    except ConfigError as exc:
        # point at the offending line when the message names a key we saw
        for key, lineno in lines.items():
            if str(exc).startswith(key) or f" {key} " in f" {exc} ":
                raise ConfigError(f"line {lineno}: {exc}") from None
        raise
    return cfg, params


def apply_overrides(cfg: SimConfig, params: MachineParams, **overrides) -> SimConfig:
    """Apply non-None overrides (e.g. from command-line flags) and re-resolve."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    return resolve_config(replace(cfg, **changes), params)
