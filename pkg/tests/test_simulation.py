import math

import numpy as np
import pytest
from scipy.linalg import expm

from imdrive.machine import ImState, aux_outputs
from imdrive.params import RATED_SLIP, MachineParams, steady_state_circuit
from imdrive.simulation import (
    TRACE_FIELDS,
    ConfigError,
    DivergenceError,
    SimConfig,
    initial_conditions,
    overmod_margin,
    resolve_config,
    rk4,
    rk4_step,
    simulate,
    torque_matched_ids,
)

SHORT = dict(duration=4e-3, step_time=2e-3)


def _electrical_matrix(params, omega_e, omega_r):
    """State matrix of the four flux equations at fixed speeds, built from the inductance matrix."""
    p = params.pu
    x = np.array(
        [
            [p.xls + p.xm, 0, p.xm, 0],
            [0, p.xls + p.xm, 0, p.xm],
            [p.xm, 0, p.xlr + p.xm, 0],
            [0, p.xm, 0, p.xlr + p.xm],
        ]
    )
    r = np.diag([p.rs, p.rs, p.rr, p.rr])
    w = np.zeros((4, 4))
    w[0, 1], w[1, 0] = omega_e, -omega_e
    w[2, 3], w[3, 2] = omega_e - omega_r, -(omega_e - omega_r)
    return p.omega_b * (-r @ np.linalg.inv(x) - w)


def test_rk4_zero_equilibrium(params):
    assert rk4_step(ImState(), (0.0, 0.0), 1.0, 0.0, params, 1e-5) == ImState()


def test_rk4_order_on_scalar_decay():
    a, t_end = 3.0, 1.0
    ns = np.array([8, 16, 32, 64, 128])
    errs = []
    for n in ns:
        y = 1.0
        for _ in range(n):
            y = rk4(lambda v: -a * v, y, t_end / n)
        errs.append(abs(y - math.exp(-a * t_end)))
    slope = np.polyfit(np.log(t_end / ns), np.log(errs), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.2)


def test_rk4_local_error_order():
    # one step vs two half steps: difference shrinks like dt^5
    f = lambda v: -2.0 * v + 0.3 * v**2  # noqa: E731
    dts = np.array([0.2, 0.1, 0.05, 0.025])
    diffs = [abs(rk4(f, 1.0, h) - rk4(f, rk4(f, 1.0, h / 2), h / 2)) for h in dts]
    slope = np.polyfit(np.log(dts), np.log(diffs), 1)[0]
    assert slope == pytest.approx(5.0, abs=0.3)


def test_rk4_machine_matches_matrix_exponential():
    params = MachineParams(m_mech=1e30)
    w_e, w_r = 1.0, 0.96
    a = _electrical_matrix(params, w_e, w_r)
    b = params.omega_b * np.array([[1, 0], [0, 1], [0, 0], [0, 0]], dtype=float)
    v = np.array([0.7, -0.2])
    x0 = np.array([0.1, 0.9, -0.05, 0.8])
    t_end = 2e-3
    # exact solution of x' = A x + B v via the augmented exponential
    aug = np.zeros((5, 5))
    aug[:4, :4] = a
    aug[:4, 4] = b @ v
    exact = (expm(aug * t_end) @ np.append(x0, 1.0))[:4]
    errs = []
    for n in (10, 20, 40):
        x = ImState(*x0, w_r)
        for _ in range(n):
            x = rk4_step(x, v, w_e, 0.0, params, t_end / n)
        errs.append(np.max(np.abs(np.array(x[:4]) - exact)))
    assert errs[0] < 1e-6
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.2)


def test_open_loop_steady_state_matches_phasor_oracle():
    # constant synchronous-frame voltage from rest at fixed rated slip settles onto the circuit solution
    params = MachineParams(m_mech=1e30)
    sol = steady_state_circuit(params, RATED_SLIP, 1.0)
    x = ImState(0, 0, 0, 0, 1 - RATED_SLIP)
    dt = 2e-4
    for _ in range(int(3.0 / dt)):
        x = rk4_step(x, (1.0, 0.0), 1.0, 0.0, params, dt)
    psi_s = complex(x.psi_qs, -x.psi_ds)
    psi_r = complex(x.psi_qr, -x.psi_dr)
    assert abs(psi_s - sol.psi_qds) / abs(sol.psi_qds) < 1e-3
    assert abs(psi_r - sol.psi_r) / abs(sol.psi_r) < 1e-3


def test_overmod_margin_examples(params):
    sol = steady_state_circuit(params, RATED_SLIP, 1.0)
    v_b = params.bases.v_b
    assert overmod_margin(sol.i_s, sol.psi_qds, 1.0, params, 2.5 * v_b) == pytest.approx(0.25 * v_b, rel=1e-12)
    assert overmod_margin(sol.i_s, sol.psi_qds, 1.0, params, 2.5 * v_b) == pytest.approx(94, abs=0.5)
    assert overmod_margin(sol.i_s, sol.psi_qds, 1.0, params, 1.7 * v_b) == pytest.approx(-56.4, abs=0.2)
    assert overmod_margin(0j, 0j, 1.0, params, 600.0) == 300.0


def test_overmod_margin_grows_with_lower_speed(params):
    sol = steady_state_circuit(params, RATED_SLIP, 1.0)
    m = [overmod_margin(sol.i_s, sol.psi_qds, w, params, 640.0) for w in (1.2, 1.0, 0.5, 0.1)]
    assert m == sorted(m)


def test_torque_matched_ids(params):
    i_ds = torque_matched_ids(params, 1.184, 1.0)
    p = params.pu
    assert (p.xm**2 / p.xr) * i_ds * 1.184 == pytest.approx(1.0, rel=1e-14)
    assert i_ds == pytest.approx(0.3657, abs=1e-4)


def test_resolve_defaults(params):
    cfg = resolve_config(SimConfig(), params)
    assert cfg.f_sw == 6000.0
    assert cfg.dt == pytest.approx(1 / (6000 * 256))
    assert cfg.duration == pytest.approx(0.1)
    assert cfg.step_time == pytest.approx(0.05)
    assert cfg.omega_c == pytest.approx(2 * math.pi * 600)
    assert resolve_config(cfg, params) == cfg


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(dt=1 / (6000 * 63)),
        dict(duration=0.01, step_time=0.02),
        dict(step_time=0.0),
        dict(init_mode="warm"),
        dict(v_dc_pu=0.0),
        dict(k_p=1.0),
        dict(decimate=0),
    ],
)
def test_invalid_configs(params, kwargs):
    with pytest.raises(ConfigError):
        resolve_config(SimConfig(**kwargs), params)


def test_analytic_init_is_oriented_steady_state(params):
    cfg = resolve_config(SimConfig(), params)
    x0, reg0 = initial_conditions(cfg, params)
    aux = aux_outputs(x0, params)
    assert aux.i_qs == pytest.approx(cfg.i_qs_ref_before, rel=1e-10)
    assert aux.i_ds == pytest.approx(cfg.i_ds_ref, rel=1e-10)
    assert x0.psi_qr == pytest.approx(0, abs=1e-12)
    assert reg0.lambda_r_hat == pytest.approx(x0.psi_dr, rel=1e-10)
    assert aux.t_e == pytest.approx(cfg.t_load_before, rel=1e-10)


def test_quiescent_run_is_all_zero(params):
    cfg = SimConfig(i_qs_ref_before=0, i_qs_ref_after=0, i_ds_ref=0, t_load_before=0, t_load_after=0, init_mode="zero", **SHORT)
    tr = simulate(cfg, params)
    for name in TRACE_FIELDS:
        if name in ("t", "d_a", "d_b", "d_c", "s_a", "s_b", "s_c"):
            continue
        assert np.all(tr[name] == 0), name
    for name in ("d_a", "d_b", "d_c"):
        assert np.all(tr[name] == 0.5)


def test_deterministic(params):
    cfg = SimConfig(**SHORT, v_dc_pu=1.7)
    a, b = simulate(cfg, params), simulate(cfg, params)
    for name in TRACE_FIELDS:
        assert np.array_equal(a[name], b[name])
    assert np.array_equal(a.states, b.states)


def test_overmod_flag_matches_duties(overmod_run):
    tr = overmod_run.trace
    d = np.stack([tr["d_a"], tr["d_b"], tr["d_c"]])
    expected = (d.max(axis=0) > 1) | (d.min(axis=0) < 0)
    assert np.array_equal(tr["overmod"], expected)
    assert expected.any() and not expected.all()


def test_trace_layout(linear_run):
    tr = linear_run.trace
    assert tuple(tr.data) == TRACE_FIELDS
    assert len(tr) == int(round(0.1 / tr.dt)) // 8
    assert tr["t"][1] - tr["t"][0] == pytest.approx(8 * tr.dt)
    assert set(np.unique(tr["s_a"])) == {0, 1}
    assert np.all((tr["theta"] >= 0) & (tr["theta"] < 2 * math.pi))


def test_references_and_load_switch_at_step(linear_run):
    tr, cfg = linear_run.trace, linear_run.cfg
    before = tr["t"] < cfg.step_time
    assert np.all(tr["i_qs_ref"][before] == 1.184) and np.all(tr["i_qs_ref"][~before] == 0.592)
    assert np.all(tr["t_load"][before] == 1.0) and np.all(tr["t_load"][~before] == 0.5)
    assert np.all(tr["i_ds_ref"] == cfg.i_ds_ref)


def test_steady_window_torque_balance(linear_run):
    m = linear_run.metrics
    assert abs(m.te_minus_tl_pre) < 0.02
    assert abs(m.te_minus_tl_post) < 0.02


def test_fundamental_matches_qd_magnitude(linear_run):
    tr, cfg = linear_run.trace, linear_run.cfg
    n = int(round((1 / 60) * 3 / (tr.dt_record)))
    sl = slice(0, n)
    theta_e = 2 * math.pi * 60 * tr["t"][sl]
    # positive-sequence space vector of the phase currents at the fundamental
    a = np.exp(2j * math.pi / 3)
    vec = (2 / 3) * (tr["i_as"][sl] + a * tr["i_bs"][sl] + a * a * tr["i_cs"][sl])
    fund = abs(np.mean(vec * np.exp(-1j * theta_e)))
    mag = np.mean(np.hypot(tr["i_qs"][sl], tr["i_ds"][sl]))
    assert fund == pytest.approx(mag, rel=0.02)


def test_rotor_currents_at_slip_frequency(linear_run):
    tr = linear_run.trace
    pre = tr["t"] < 0.05
    # rotor-frame currents oscillate at slip frequency: ~2 Hz, so phase a barely moves in 50 ms
    amp = np.hypot(*[np.mean(tr[k][pre]) for k in ("i_ar", "i_br")])
    assert amp > 0.5


def test_zero_init_ramps_references(params):
    cfg = SimConfig(init_mode="zero", duration=0.02, step_time=0.018, i_ds_ref=0.366)
    tr = simulate(cfg, params)
    t = tr["t"]
    k = np.searchsorted(t, 1 / 120)
    assert tr["i_qs_ref"][k] == pytest.approx(1.184 * t[k] * 60, rel=1e-9)
    assert tr["i_qs_ref"][np.searchsorted(t, 0.017)] == 1.184


def test_divergence_raises(params):
    # a 1 Hz carrier lets dt reach 1/64 s, far outside RK4's stability region at base frequency
    cfg = SimConfig(f_sw=1.0, dt=1 / 64, duration=6.0, step_time=3.0)
    with pytest.raises(DivergenceError) as exc:
        simulate(cfg, params)
    assert "t =" in str(exc.value) and "duties" in str(exc.value)


@pytest.mark.slow
def test_step_size_insensitivity(params):
    base = dict(duration=0.02, step_time=0.01, decimate=1024)
    a = simulate(SimConfig(**base), params)
    b = simulate(SimConfig(dt=1 / (6000 * 512), **{**base, "decimate": 2048}), params)
    xa = a.states[-1][:4]
    # compare fluxes at the same instant
    idx = np.searchsorted(b["t"], a["t"][-1])
    xb = b.states[idx][:4]
    assert np.linalg.norm(xa - xb) / np.linalg.norm(xa) < 1e-3
