"""Machine parameters, peak-valued base system and the steady-state equivalent circuit.

Defaults correspond to a 460 V, 20 hp, 4-pole, 60 Hz squirrel-cage machine.
All per-unit quantities use peak (amplitude-invariant) bases.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

HP_TO_W = 745.7


class ParameterError(ValueError):
    """Raised when machine parameters or operating-point inputs are out of domain."""


@dataclass(frozen=True)
class PerUnitParams:
    """Machine constants normalised to the base system; what the dynamic model consumes."""

    rs: float
    rr: float
    xls: float
    xlr: float
    xm: float
    m_mech: float
    omega_b: float

    @property
    def xs(self) -> float:
        return self.xls + self.xm

    @property
    def xr(self) -> float:
        return self.xlr + self.xm

    @property
    def xm_star(self) -> float:
        return 1.0 / (1.0 / self.xm + 1.0 / self.xls + 1.0 / self.xlr)


@dataclass(frozen=True)
class MachineParams:
    """Nameplate and equivalent-circuit data. Reactances are given at rated frequency ``f``."""

    v_ll_rms: float = 460.0
    p_rated: float = 20 * HP_TO_W
    f: float = 60.0
    poles: int = 4
    rs: float = 0.355
    rr: float = 0.355
    xls: float = 1.42
    xlr: float = 1.42
    xm: float = 34.1
    m_mech: float = 1.4
    i_b: float = 26.5

    def __post_init__(self):
        positive = ("v_ll_rms", "p_rated", "f", "rs", "rr", "xls", "xlr", "xm", "m_mech", "i_b")
        for name in positive:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {value!r}")
        if int(self.poles) != self.poles or self.poles < 2 or self.poles % 2:
            raise ParameterError(f"poles must be an even integer >= 2, got {self.poles!r}")

    @property
    def omega_b(self) -> float:
        return 2.0 * math.pi * self.f

    @cached_property
    def bases(self) -> BaseSet:
        return derive_bases(self)

    @cached_property
    def pu(self) -> PerUnitParams:
        z_b = self.bases.z_b
        return PerUnitParams(
            rs=self.rs / z_b,
            rr=self.rr / z_b,
            xls=self.xls / z_b,
            xlr=self.xlr / z_b,
            xm=self.xm / z_b,
            m_mech=self.m_mech,
            omega_b=self.omega_b,
        )

    def inductances(self) -> tuple[float, float, float]:
        """(Lm, Ls, Lr) in henries."""
        w = self.omega_b
        return self.xm / w, (self.xls + self.xm) / w, (self.xlr + self.xm) / w


@dataclass(frozen=True)
class BaseSet:
    v_b: float
    i_b: float
    z_b: float
    t_b: float
    omega_b: float

    @property
    def s_b(self) -> float:
        """Three-phase base power for peak bases, (3/2)·v_b·i_b."""
        return 1.5 * self.v_b * self.i_b


class PhasorSolution(NamedTuple):
    """Per-unit steady-state operating point.

    Phasors use the ``q - j·d`` convention of the synchronous frame, so a phasor
    can be read directly as a synchronous-frame space vector.
    """

    slip: float
    i_s: complex
    i_r: complex
    psi_qds: complex
    psi_r: complex
    power_factor: float
    torque: float


def derive_bases(params: MachineParams) -> BaseSet:
    v_b = params.v_ll_rms * math.sqrt(2.0) / math.sqrt(3.0)
    i_b = params.i_b
    omega_b = params.omega_b
    return BaseSet(
        v_b=v_b,
        i_b=i_b,
        z_b=v_b / i_b,
        t_b=1.5 * (params.poles / 2) * v_b * i_b / omega_b,
        omega_b=omega_b,
    )


def base_current_from_power(params: MachineParams) -> float:
    """Peak base current implied by taking the rated power as base VA.

    Cross-check only; the base system uses ``params.i_b``.
    """
    v_b = params.v_ll_rms * math.sqrt(2.0) / math.sqrt(3.0)
    return params.p_rated / (1.5 * v_b)


_BASE_ATTR = {
    "voltage": "v_b",
    "current": "i_b",
    "impedance": "z_b",
    "torque": "t_b",
    "speed": "omega_b",
}


def _base(bases: BaseSet, kind: str) -> float:
    try:
        return getattr(bases, _BASE_ATTR[kind])
    except KeyError:
        raise ParameterError(f"unknown quantity kind {kind!r}; expected one of {sorted(_BASE_ATTR)}") from None


def to_per_unit(value, bases: BaseSet, kind: str):
    return value / _base(bases, kind)


def from_per_unit(value, bases: BaseSet, kind: str):
    return value * _base(bases, kind)


def steady_state_circuit(params: MachineParams, slip: float, v_pu: float = 1.0) -> PhasorSolution:
    """Solve the per-phase T-equivalent circuit at rated frequency.

    The stator voltage phasor is real (``v_pu + 0j``). For ``slip == 0`` the rotor
    branch is open and only magnetising current flows.
    """
    if not math.isfinite(slip):
        raise ParameterError(f"slip must be finite, got {slip!r}")
    if not (math.isfinite(v_pu) and v_pu >= 0):
        raise ParameterError(f"v_pu must be finite and >= 0, got {v_pu!r}")

    p = params.pu
    v = complex(v_pu, 0.0)
    z_s = complex(p.rs, p.xls)
    z_m = complex(0.0, p.xm)
    if slip == 0:
        i_s = v / (z_s + z_m)
        i_r = 0j
    else:
        z_r = complex(p.rr / slip, p.xlr)
        i_s = v / (z_s + z_m * z_r / (z_m + z_r))
        e_m = v - z_s * i_s
        i_r = -e_m / z_r

    # rated frequency: psi = (v - rs·i)/j
    psi_s = (v - p.rs * i_s) / 1j
    psi_r = p.xlr * i_r + p.xm * (i_s + i_r)
    torque = 0.0 if slip == 0 else abs(i_r) ** 2 * p.rr / slip
    pf = math.cos(cmath.phase(i_s)) if i_s != 0 else 1.0
    return PhasorSolution(
        slip=slip,
        i_s=i_s,
        i_r=i_r,
        psi_qds=psi_s,
        psi_r=psi_r,
        power_factor=pf,
        torque=torque,
    )


DEFAULT_PARAMS = MachineParams()
RATED_SLIP = 0.03135
