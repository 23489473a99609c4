"""Two-level voltage-source inverter and ramp-comparison PWM modulator."""

from __future__ import annotations

import math
from typing import NamedTuple


class SwitchState(NamedTuple):
    s_a: int
    s_b: int
    s_c: int


class DutyTriple(NamedTuple):
    d_a: float
    d_b: float
    d_c: float

    @property
    def overmodulated(self) -> bool:
        return min(self) < 0.0 or max(self) > 1.0


class PhaseVoltages(NamedTuple):
    v_am: float
    v_bm: float
    v_cm: float
    v_nm: float
    v_an: float
    v_bn: float
    v_cn: float


def _check_vdc(v_dc: float) -> None:
    if not v_dc > 0:
        raise ValueError(f"v_dc must be > 0, got {v_dc!r}")


def vsi_map(sw: SwitchState, v_dc: float) -> PhaseVoltages:
    """Switch states to rail-referenced, neutral and line-to-neutral voltages."""
    _check_vdc(v_dc)
    v_am = v_dc if sw[0] else 0.0
    v_bm = v_dc if sw[1] else 0.0
    v_cm = v_dc if sw[2] else 0.0
    n_on = (1 if sw[0] else 0) + (1 if sw[1] else 0) + (1 if sw[2] else 0)
    # built from integer counts so the three line-to-neutral values sum to exactly zero
    v_nm = v_dc * n_on / 3.0
    v_an = v_dc * ((3 if sw[0] else 0) - n_on) / 3.0
    v_bn = v_dc * ((3 if sw[1] else 0) - n_on) / 3.0
    v_cn = -(v_an + v_bn)
    return PhaseVoltages(v_am, v_bm, v_cm, v_nm, v_an, v_bn, v_cn)


def duty_from_refs(v_refs, v_dc: float) -> DutyTriple:
    """Per-phase duty with a constant one-half offset. Not clamped."""
    _check_vdc(v_dc)
    return DutyTriple(v_refs[0] / v_dc + 0.5, v_refs[1] / v_dc + 0.5, v_refs[2] / v_dc + 0.5)


def carrier(t: float, f_sw: float) -> float:
    """Rising sawtooth in [0, 1) with period ``1/f_sw``."""
    x = t * f_sw
    c = x - math.floor(x)
    # floating-point round-off can leave x a hair below an integer
    if c > 1.0 - 1e-9:
        c = 0.0
    return c


def switch_decision(d: DutyTriple, c: float) -> SwitchState:
    return SwitchState(int(d[0] > c), int(d[1] > c), int(d[2] > c))
