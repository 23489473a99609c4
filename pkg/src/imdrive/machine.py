"""Synchronous-frame qd model of a squirrel-cage induction machine.

States are per-unit flux-linkage voltages (flux linkage times base angular
frequency) plus per-unit electrical rotor speed. Time is in seconds. Rotor
voltages are zero.

Space vectors are written as ``q - j·d`` when a complex form is needed.
"""

from __future__ import annotations

import cmath
import math
from typing import NamedTuple, Union

from imdrive.params import MachineParams, PerUnitParams, PhasorSolution


class ImState(NamedTuple):
    psi_qs: float = 0.0
    psi_ds: float = 0.0
    psi_qr: float = 0.0
    psi_dr: float = 0.0
    omega_r: float = 0.0


class AuxOutputs(NamedTuple):
    psi_mq: float
    psi_md: float
    i_qs: float
    i_ds: float
    i_qr: float
    i_dr: float
    t_e: float


Params = Union[MachineParams, PerUnitParams]


def _pu(params: Params) -> PerUnitParams:
    return params.pu if isinstance(params, MachineParams) else params


def xm_star(params: MachineParams) -> float:
    """Parallel combination of magnetising and both leakage reactances, in ohms."""
    return 1.0 / (1.0 / params.xm + 1.0 / params.xls + 1.0 / params.xlr)


def aux_outputs(state: ImState, params: Params) -> AuxOutputs:
    p = _pu(params)
    psi_qs, psi_ds, psi_qr, psi_dr = state[0], state[1], state[2], state[3]
    k_s = p.xm_star / p.xls
    k_r = p.xm_star / p.xlr
    psi_mq = k_s * psi_qs + k_r * psi_qr
    psi_md = k_s * psi_ds + k_r * psi_dr
    i_qs = (psi_qs - psi_mq) / p.xls
    i_ds = (psi_ds - psi_md) / p.xls
    i_qr = (psi_qr - psi_mq) / p.xlr
    i_dr = (psi_dr - psi_md) / p.xlr
    t_e = psi_ds * i_qs - psi_qs * i_ds
    return AuxOutputs(psi_mq, psi_md, i_qs, i_ds, i_qr, i_dr, t_e)


def derivative(x, v_qs: float, v_ds: float, omega_e: float, t_load: float, p: PerUnitParams) -> tuple:
    """Tuple-in, tuple-out derivative used by the integrator hot loop."""
    psi_qs, psi_ds, psi_qr, psi_dr, omega_r = x
    xm_s = p.xm_star
    psi_mq = xm_s * (psi_qs / p.xls + psi_qr / p.xlr)
    psi_md = xm_s * (psi_ds / p.xls + psi_dr / p.xlr)
    i_qs = (psi_qs - psi_mq) / p.xls
    i_ds = (psi_ds - psi_md) / p.xls
    i_qr = (psi_qr - psi_mq) / p.xlr
    i_dr = (psi_dr - psi_md) / p.xlr
    w_b = p.omega_b
    w_sl = omega_e - omega_r
    t_e = psi_ds * i_qs - psi_qs * i_ds
    return (
        w_b * (v_qs - p.rs * i_qs - omega_e * psi_ds),
        w_b * (v_ds - p.rs * i_ds + omega_e * psi_qs),
        w_b * (-p.rr * i_qr - w_sl * psi_dr),
        w_b * (-p.rr * i_dr + w_sl * psi_qr),
        (t_e - t_load) / p.m_mech,
    )


def state_derivative(
    state: ImState,
    v_qds: tuple[float, float],
    omega_e: float,
    t_load: float,
    params: Params,
) -> ImState:
    """Time derivative of every state, per second."""
    return ImState(*derivative(state, v_qds[0], v_qds[1], omega_e, t_load, _pu(params)))


def state_from_phasor(sol: PhasorSolution, omega_r: float, align_rotor_flux: bool = True) -> ImState:
    """Machine state matching a steady-state phasor solution.

    With ``align_rotor_flux`` the phasors are rotated so the rotor flux lies on
    the positive d-axis, which is the frame a rotor-flux-oriented regulator uses.
    """
    rot = 1.0 + 0j
    if align_rotor_flux and sol.psi_r != 0:
        # target direction of +d in q - j·d notation is -j
        rot = cmath.exp(1j * (-math.pi / 2 - cmath.phase(sol.psi_r)))
    psi_s = sol.psi_qds * rot
    psi_r = sol.psi_r * rot
    return ImState(psi_s.real, -psi_s.imag, psi_r.real, -psi_r.imag, omega_r)


def torque_si(state: ImState, params: MachineParams) -> float:
    """Electrical torque in N·m from the SI form of the torque expression."""
    b = params.bases
    p = params.pu
    aux = aux_outputs(state, p)
    psi_ds_v = state.psi_ds * b.v_b
    psi_qs_v = state.psi_qs * b.v_b
    return 1.5 * (params.poles / 2) / params.omega_b * (psi_ds_v * aux.i_qs * b.i_b - psi_qs_v * aux.i_ds * b.i_b)
