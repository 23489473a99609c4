"""Synchronous-frame PI current regulator, slip/angle calculator and frame transforms.

The regulator works in per-unit. The transform is amplitude invariant with the
q-axis on phase a at ``theta = 0``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from imdrive.params import MachineParams

TWO_PI = 2.0 * math.pi
LAMBDA_FLOOR = 1e-3

_C120 = math.cos(TWO_PI / 3)
_S120 = math.sin(TWO_PI / 3)


class PiGains(NamedTuple):
    k_p: float
    k_i: float


class CurrentRefs(NamedTuple):
    i_qs_ref: float
    i_ds_ref: float


class RegulatorState(NamedTuple):
    int_q: float = 0.0
    int_d: float = 0.0
    theta: float = 0.0
    lambda_r_hat: float = LAMBDA_FLOOR


def abc_to_qd(f_abc, theta: float) -> tuple[float, float]:
    fa, fb, fc = f_abc
    c, s = math.cos(theta), math.sin(theta)
    # cos(theta -+ 120deg) and sin(theta -+ 120deg) by angle addition
    c_m = c * _C120 + s * _S120
    c_p = c * _C120 - s * _S120
    s_m = s * _C120 - c * _S120
    s_p = s * _C120 + c * _S120
    f_q = (2.0 / 3.0) * (fa * c + fb * c_m + fc * c_p)
    f_d = (2.0 / 3.0) * (fa * s + fb * s_m + fc * s_p)
    return f_q, f_d


def qd_to_abc(f_qd, theta: float) -> tuple[float, float, float]:
    f_q, f_d = f_qd
    c, s = math.cos(theta), math.sin(theta)
    c_m = c * _C120 + s * _S120
    c_p = c * _C120 - s * _S120
    s_m = s * _C120 - c * _S120
    s_p = s * _C120 + c * _S120
    return (
        f_q * c + f_d * s,
        f_q * c_m + f_d * s_m,
        f_q * c_p + f_d * s_p,
    )


def pi_step(
    state: RegulatorState,
    refs: CurrentRefs,
    meas: tuple[float, float],
    gains: PiGains,
    dt: float,
) -> tuple[float, float, RegulatorState]:
    """One forward-Euler step of the q and d PI controllers.

    Output uses the integrator value from before the update. No limits, no anti-windup.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    e_q = refs[0] - meas[0]
    e_d = refs[1] - meas[1]
    v_q = gains.k_p * e_q + state.int_q
    v_d = gains.k_p * e_d + state.int_d
    new = state._replace(int_q=state.int_q + gains.k_i * e_q * dt, int_d=state.int_d + gains.k_i * e_d * dt)
    return v_q, v_d, new


def rotor_time_constant(params: MachineParams) -> float:
    """Lr/rr in seconds."""
    return (params.xlr + params.xm) / (params.omega_b * params.rr)


def slip_calculator_step(
    state: RegulatorState,
    refs: CurrentRefs,
    omega_r: float,
    params: MachineParams,
    dt: float,
) -> tuple[float, float, float]:
    """Advance the rotor-flux estimate and return ``(omega_s, omega_sl, lambda_r_hat)``.

    Speeds are per-unit of the base angular frequency; the flux estimate is a
    per-unit flux-linkage voltage, so ``Lm·i_ds`` becomes ``xm·i_ds``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    p = params.pu
    tau_r = p.xr / (p.omega_b * p.rr)
    lam = state.lambda_r_hat
    lam = lam + dt * (p.xm * refs[1] - lam) / tau_r
    lam = max(lam, LAMBDA_FLOOR)
    omega_sl = (p.rr / p.xr) * (p.xm / lam) * refs[0]
    return omega_sl + omega_r, omega_sl, lam


def angle_step(theta: float, omega_s: float, omega_b: float, dt: float) -> float:
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    th = math.fmod(theta + omega_s * omega_b * dt, TWO_PI)
    if th < 0.0:
        th += TWO_PI
    if th >= TWO_PI:
        th = 0.0
    return th
