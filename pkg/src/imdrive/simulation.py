"""Fixed-step closed-loop simulation: PI regulator -> PWM -> VSI -> machine.

Every integration step runs the full chain; the machine is advanced with
classical RK4 while the inverter output is held over the step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

import numpy as np

from imdrive.design import default_omega_c, pi_gains, pi_gains_pu, plant_tf
from imdrive.inverter import carrier, duty_from_refs, switch_decision, vsi_map
from imdrive.metrics import Metrics, compute_metrics
from imdrive.machine import ImState, aux_outputs, derivative, state_from_phasor
from imdrive.params import MachineParams, PerUnitParams, steady_state_circuit
from imdrive.regulator import (
    LAMBDA_FLOOR,
    CurrentRefs,
    PiGains,
    RegulatorState,
    abc_to_qd,
    angle_step,
    pi_step,
    qd_to_abc,
    slip_calculator_step,
)

log = logging.getLogger(__name__)

TRACE_FIELDS = (
    "t",
    "i_qs_ref", "i_ds_ref", "i_qs", "i_ds",
    "v_qs_ref", "v_ds_ref",
    "d_a", "d_b", "d_c",
    "s_a", "s_b", "s_c",
    "v_an",
    "i_as", "i_bs", "i_cs",
    "i_ar", "i_br", "i_cr",
    "t_e", "t_load",
    "omega_r", "omega_s",
    "theta",
    "overmod",
)  # fmt: skip

# carrier periods per integration step (default) and the coarsest allowed
STEPS_PER_CARRIER = 256
MIN_STEPS_PER_CARRIER = 64


class ConfigError(ValueError):
    """Invalid scenario configuration."""


class DivergenceError(ArithmeticError):
    def __init__(self, t: float, duties, message: str = "non-finite machine state"):
        self.t = t
        self.duties = tuple(duties)
        super().__init__(f"{message} at t = {t:.9g} s (last duties {', '.join(f'{d:.6g}' for d in self.duties)})")


@dataclass(frozen=True)
class SimConfig:
    """Scenario description. ``None`` fields are filled in by :func:`resolve_config`.

    Defaults: six fundamental periods, torque step at period three,
    ``v_dc = 2.5·v_b``, carrier at ``100·f``, bandwidth a decade below it.
    """

    v_dc_pu: float = 2.5
    f_sw: Optional[float] = None
    dt: Optional[float] = None
    duration: Optional[float] = None
    step_time: Optional[float] = None
    i_qs_ref_before: float = 1.184
    i_qs_ref_after: float = 0.592
    i_ds_ref: Optional[float] = None
    t_load_before: float = 1.0
    t_load_after: float = 0.5
    init_mode: str = "analytic"
    omega_c: Optional[float] = None
    k_p: Optional[float] = None
    k_i: Optional[float] = None
    decimate: int = 8

    @property
    def refs_before(self) -> CurrentRefs:
        return CurrentRefs(self.i_qs_ref_before, self.i_ds_ref)

    @property
    def refs_after(self) -> CurrentRefs:
        return CurrentRefs(self.i_qs_ref_after, self.i_ds_ref)

    def as_dict(self) -> dict:
        return asdict(self)


def torque_matched_ids(params: MachineParams, i_qs_ref: float, t_e: float) -> float:
    """d-axis current that makes the rotor-flux-oriented torque ``(xm²/xr)·i_ds·i_qs`` equal ``t_e``."""
    p = params.pu
    if i_qs_ref == 0:
        raise ConfigError("cannot derive i_ds_ref from a zero i_qs reference; set i_ds_ref explicitly")
    return t_e / ((p.xm**2 / p.xr) * i_qs_ref)


def resolve_config(cfg: SimConfig, params: MachineParams) -> SimConfig:
    """Fill defaulted fields and validate. Idempotent."""
    f_sw = cfg.f_sw if cfg.f_sw is not None else 100.0 * params.f
    dt = cfg.dt if cfg.dt is not None else 1.0 / (f_sw * STEPS_PER_CARRIER)
    duration = cfg.duration if cfg.duration is not None else 6.0 / params.f
    step_time = cfg.step_time if cfg.step_time is not None else 3.0 / params.f
    omega_c = cfg.omega_c if cfg.omega_c is not None else default_omega_c(f_sw)
    i_ds = cfg.i_ds_ref
    if i_ds is None:
        i_ds = torque_matched_ids(params, cfg.i_qs_ref_before, cfg.t_load_before)
    out = replace(cfg, f_sw=f_sw, dt=dt, duration=duration, step_time=step_time, omega_c=omega_c, i_ds_ref=i_ds)
    validate_config(out)
    return out


def validate_config(cfg: SimConfig) -> None:
    if not cfg.v_dc_pu > 0:
        raise ConfigError(f"v_dc_pu must be > 0, got {cfg.v_dc_pu!r}")
    if not cfg.f_sw > 0:
        raise ConfigError(f"f_sw must be > 0, got {cfg.f_sw!r}")
    dt_max = 1.0 / (cfg.f_sw * MIN_STEPS_PER_CARRIER)
    if not 0 < cfg.dt <= dt_max * (1 + 1e-12):
        raise ConfigError(f"dt must satisfy 0 < dt <= 1/(f_sw*{MIN_STEPS_PER_CARRIER}) = {dt_max:.6g} s, got {cfg.dt!r}")
    if not 0 < cfg.step_time < cfg.duration:
        raise ConfigError(f"need duration > step_time > 0, got duration={cfg.duration!r}, step_time={cfg.step_time!r}")
    if cfg.init_mode not in ("analytic", "zero"):
        raise ConfigError(f"init_mode must be 'analytic' or 'zero', got {cfg.init_mode!r}")
    if not cfg.omega_c > 0:
        raise ConfigError(f"omega_c must be > 0, got {cfg.omega_c!r}")
    if (cfg.k_p is None) != (cfg.k_i is None):
        raise ConfigError("k_p and k_i must be overridden together")
    if cfg.k_p is not None and not (cfg.k_p > 0 and cfg.k_i >= 0):
        raise ConfigError("need k_p > 0 and k_i >= 0")
    if int(cfg.decimate) != cfg.decimate or cfg.decimate < 1:
        raise ConfigError(f"decimate must be a positive integer, got {cfg.decimate!r}")
    for name in ("i_qs_ref_before", "i_qs_ref_after", "i_ds_ref", "t_load_before", "t_load_after"):
        if not math.isfinite(getattr(cfg, name)):
            raise ConfigError(f"{name} must be finite")


def design_gains(cfg: SimConfig, params: MachineParams) -> PiGains:
    """SI gains used by a run: explicit overrides, else pole-zero cancellation at ``omega_c``."""
    if cfg.k_p is not None:
        return PiGains(cfg.k_p, cfg.k_i)
    return pi_gains(plant_tf(params), cfg.omega_c)


def rk4(f, y, dt):
    """Classical RK4 step for ``dy/dt = f(y)`` on floats or numpy arrays."""
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_machine(x, v_qs, v_ds, w_e, t_load, p: PerUnitParams, dt):
    h = 0.5 * dt
    k1 = derivative(x, v_qs, v_ds, w_e, t_load, p)
    x2 = (x[0] + h * k1[0], x[1] + h * k1[1], x[2] + h * k1[2], x[3] + h * k1[3], x[4] + h * k1[4])
    k2 = derivative(x2, v_qs, v_ds, w_e, t_load, p)
    x3 = (x[0] + h * k2[0], x[1] + h * k2[1], x[2] + h * k2[2], x[3] + h * k2[3], x[4] + h * k2[4])
    k3 = derivative(x3, v_qs, v_ds, w_e, t_load, p)
    x4 = (x[0] + dt * k3[0], x[1] + dt * k3[1], x[2] + dt * k3[2], x[3] + dt * k3[3], x[4] + dt * k3[4])
    k4 = derivative(x4, v_qs, v_ds, w_e, t_load, p)
    s = dt / 6.0
    return ImState(*(x[i] + s * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(5)))


def rk4_step(state: ImState, v_qds, omega_e: float, t_load: float, params: MachineParams, dt: float, t: float = 0.0):
    """Advance the machine one step with voltage and frame speed held constant."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    p = params.pu if isinstance(params, MachineParams) else params
    out = _rk4_machine(state, v_qds[0], v_qds[1], omega_e, t_load, p, dt)
    if not all(math.isfinite(v) for v in out):
        raise DivergenceError(t + dt, (), "non-finite derivative")
    return out


def overmod_margin(i_qds: complex, psi_qds: complex, omega: float, params: MachineParams, v_dc: float) -> float:
    """Linear-modulation headroom in volts: ``v_dc/2 - |rs·i + j·omega·psi|``. Negative means overmodulation."""
    p = params.pu
    v = p.rs * i_qds + 1j * omega * psi_qds
    return v_dc / 2.0 - abs(v) * params.bases.v_b


@dataclass
class Trace:
    """Decimated time series. ``data`` holds one array per :data:`TRACE_FIELDS` entry."""

    data: dict
    states: np.ndarray
    dt: float
    decimate: int

    def __getitem__(self, key: str) -> np.ndarray:
        return self.data[key]

    def __len__(self) -> int:
        return len(self.data["t"])

    @property
    def dt_record(self) -> float:
        return self.dt * self.decimate


def initial_conditions(cfg: SimConfig, params: MachineParams) -> tuple[ImState, RegulatorState]:
    """Machine and regulator state at ``t = 0``.

    ``analytic``: rotor-flux-oriented steady state at the pre-step references with
    the frame turning at base speed; the integrators hold the steady voltage.
    ``zero``: everything at rest.
    """
    if cfg.init_mode == "zero":
        return ImState(), RegulatorState(lambda_r_hat=LAMBDA_FLOOR)
    p = params.pu
    i_qs, i_ds = cfg.i_qs_ref_before, cfg.i_ds_ref
    if i_ds <= 0:
        raise ConfigError("analytic initialisation needs i_ds_ref > 0")
    slip = (p.rr / p.xr) * i_qs / i_ds
    unit = steady_state_circuit(params, slip, 1.0)
    scale = math.hypot(i_qs, i_ds) / abs(unit.i_s)
    sol = steady_state_circuit(params, slip, scale)
    x0 = state_from_phasor(sol, omega_r=1.0 - slip)
    aux = aux_outputs(x0, p)
    v_q = p.rs * aux.i_qs + x0.psi_ds
    v_d = p.rs * aux.i_ds - x0.psi_qs
    reg0 = RegulatorState(int_q=v_q, int_d=v_d, theta=0.0, lambda_r_hat=p.xm * i_ds)
    return x0, reg0


def simulate(
    cfg: SimConfig,
    params: Optional[MachineParams] = None,
    gains: Optional[PiGains] = None,
) -> Trace:
    """Simulate one scenario and return the decimated trace.

    ``gains`` are SI (V/A, V/(A·s)); default comes from :func:`design_gains`.
    Per step: slip/angle calculator, current measurement through the abc
    frame, PI, modulator, inverter, RK4 machine step.
    """
    params = params or MachineParams()
    cfg = resolve_config(cfg, params)
    bases = params.bases
    p = params.pu
    gains_pu = pi_gains_pu(gains or design_gains(cfg, params), bases.z_b)

    dt = cfg.dt
    v_b = bases.v_b
    w_b = p.omega_b
    v_dc = cfg.v_dc_pu * v_b
    n_steps = int(round(cfg.duration / dt))
    dec = int(cfg.decimate)
    ramp_time = 1.0 / params.f if cfg.init_mode == "zero" else 0.0

    x, reg = initial_conditions(cfg, params)
    theta_sl = 0.0
    rows = []
    states = []
    d = (0.5, 0.5, 0.5)

    for k in range(n_steps):
        t = k * dt
        if t < cfg.step_time:
            refs, t_load = cfg.refs_before, cfg.t_load_before
        else:
            refs, t_load = cfg.refs_after, cfg.t_load_after
        if t < ramp_time:
            refs = CurrentRefs(refs[0] * t / ramp_time, refs[1] * t / ramp_time)

        theta = reg.theta
        omega_s, _, lam = slip_calculator_step(reg, refs, x[4], params, dt)

        aux = aux_outputs(x, p)
        i_abc = qd_to_abc((aux.i_qs, aux.i_ds), theta)
        i_meas = abc_to_qd(i_abc, theta)

        v_q, v_d, reg = pi_step(reg, refs, i_meas, gains_pu, dt)
        v_abc = qd_to_abc((v_q, v_d), theta)
        d = duty_from_refs((v_abc[0] * v_b, v_abc[1] * v_b, v_abc[2] * v_b), v_dc)
        sw = switch_decision(d, carrier(t, cfg.f_sw))
        pv = vsi_map(sw, v_dc)
        # terminal voltage transformed at mid-step frame angle
        v_qs, v_ds = abc_to_qd((pv.v_an / v_b, pv.v_bn / v_b, pv.v_cn / v_b), theta + 0.5 * omega_s * w_b * dt)

        if k % dec == 0:
            i_r_abc = qd_to_abc((aux.i_qr, aux.i_dr), theta_sl)
            over = d[0] < 0.0 or d[1] < 0.0 or d[2] < 0.0 or d[0] > 1.0 or d[1] > 1.0 or d[2] > 1.0
            rows.append(
                (t, refs[0], refs[1], i_meas[0], i_meas[1], v_q, v_d, d[0], d[1], d[2], sw[0], sw[1], sw[2],
                 pv.v_an, i_abc[0], i_abc[1], i_abc[2], i_r_abc[0], i_r_abc[1], i_r_abc[2],
                 aux.t_e, t_load, x[4], omega_s, theta, over)
            )  # fmt: skip
            states.append(tuple(x))

        x = _rk4_machine(x, v_qs, v_ds, omega_s, t_load, p, dt)
        if not math.isfinite(x[0] + x[1] + x[2] + x[3] + x[4]) or abs(x[0]) + abs(x[1]) > 1e6:
            raise DivergenceError(t + dt, d)
        theta_sl = angle_step(theta_sl, omega_s - x[4], w_b, dt)
        reg = reg._replace(theta=angle_step(theta, omega_s, w_b, dt), lambda_r_hat=lam)

    arr = np.array(rows, dtype=float)
    data = {name: arr[:, i] for i, name in enumerate(TRACE_FIELDS)}
    for name in ("s_a", "s_b", "s_c"):
        data[name] = data[name].astype(np.int8)
    data["overmod"] = data["overmod"].astype(bool)
    log.debug("scenario done: %d steps, %d rows", n_steps, len(arr))
    return Trace(data=data, states=np.array(states, dtype=float), dt=dt, decimate=dec)


def run_scenario(
    cfg: SimConfig,
    params: Optional[MachineParams] = None,
    gains: Optional[PiGains] = None,
) -> tuple[Trace, Metrics]:
    params = params or MachineParams()
    cfg = resolve_config(cfg, params)
    trace = simulate(cfg, params, gains)
    return trace, compute_metrics(trace, cfg, params.f)


CONFIG_FIELDS = tuple(f.name for f in fields(SimConfig))
