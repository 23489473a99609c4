import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from imdrive.inverter import DutyTriple, SwitchState, carrier, duty_from_refs, switch_decision, vsi_map

ALL_STATES = [SwitchState(*s) for s in itertools.product((0, 1), repeat=3)]


def test_zero_vector_top():
    pv = vsi_map(SwitchState(1, 1, 1), 100.0)
    assert pv.v_nm == 100.0
    assert (pv.v_an, pv.v_bn, pv.v_cn) == (0.0, 0.0, 0.0)


def test_single_phase_on():
    pv = vsi_map(SwitchState(1, 0, 0), 100.0)
    assert pv.v_an == pytest.approx(66.6666667)
    assert pv.v_bn == pytest.approx(-33.3333333)
    assert pv.v_cn == pytest.approx(-33.3333333)
    assert pv.v_nm == pytest.approx(33.3333333)


def test_zero_vector_bottom():
    assert all(v == 0.0 for v in vsi_map(SwitchState(0, 0, 0), 100.0))


@pytest.mark.parametrize("sw", ALL_STATES)
@pytest.mark.parametrize("v_dc", [1.0, 100.0, 639.2, 940.0, 1e-3])
def test_line_to_neutral_sum_and_levels(sw, v_dc):
    pv = vsi_map(sw, v_dc)
    assert pv.v_an + pv.v_bn + pv.v_cn == 0.0
    assert pv.v_nm == (pv.v_am + pv.v_bm + pv.v_cm) / 3
    levels = [0.0, v_dc / 3, -v_dc / 3, 2 * v_dc / 3, -2 * v_dc / 3]
    for v in (pv.v_an, pv.v_bn, pv.v_cn):
        assert min(abs(v - lv) for lv in levels) <= 1e-15 * v_dc
    for v, s in zip((pv.v_am, pv.v_bm, pv.v_cm), sw):
        assert v == (v_dc if s else 0.0)


@pytest.mark.parametrize("v_dc", [0.0, -5.0])
def test_bad_dc_voltage(v_dc):
    with pytest.raises(ValueError):
        vsi_map(SwitchState(1, 0, 0), v_dc)
    with pytest.raises(ValueError):
        duty_from_refs((0, 0, 0), v_dc)


def test_duty_examples():
    assert duty_from_refs((0.0, 0.0, 0.0), 500.0) == (0.5, 0.5, 0.5)
    assert duty_from_refs((250.0, 0.0, 0.0), 500.0).d_a == 1.0
    d = duty_from_refs((0.85 * 500.0, 0.0, 0.0), 500.0)
    assert d.d_a == pytest.approx(1.35)
    assert d.overmodulated
    assert not DutyTriple(0.0, 1.0, 0.5).overmodulated


@given(st.tuples(*[st.floats(-1e3, 1e3)] * 3), st.floats(-4, 4), st.floats(1.0, 1e3))
def test_duty_affine(v, alpha, v_dc):
    base = duty_from_refs(v, v_dc)
    scaled = duty_from_refs(tuple(alpha * x for x in v), v_dc)
    for s, b in zip(scaled, base):
        assert s - 0.5 == pytest.approx(alpha * (b - 0.5), rel=1e-12, abs=1e-12)


def test_carrier_examples():
    f_sw = 6000.0
    assert carrier(0.0, f_sw) == 0.0
    assert carrier(0.5 / f_sw, f_sw) == pytest.approx(0.5)
    assert carrier(1.0 / f_sw, f_sw) == 0.0


@given(st.floats(0, 1.0), st.integers(0, 1000))
def test_carrier_range_and_period(t, k):
    f_sw = 6000.0
    c = carrier(t, f_sw)
    assert 0.0 <= c < 1.0
    c2 = carrier(t + k / f_sw, f_sw)
    assert min(abs(c2 - c), 1 - abs(c2 - c)) < 1e-6


def test_switch_decision_examples():
    assert switch_decision(DutyTriple(0.5, 0.5, 0.5), 0.25) == (1, 1, 1)
    assert switch_decision(DutyTriple(1.35, 0.5, 0.2), 0.99) == (1, 0, 0)
    assert switch_decision(DutyTriple(0.5, 0.5, 0.5), 0.75) == (0, 0, 0)
    assert switch_decision(DutyTriple(0.0, -0.2, 1.2), 0.0) == (0, 0, 1)


def _carrier_period(d, v_dc, n):
    f_sw = 6000.0
    dt = 1.0 / (f_sw * n)
    out = []
    for k in range(n):
        out.append(vsi_map(switch_decision(d, carrier(k * dt, f_sw)), v_dc))
    return out


@pytest.mark.parametrize("d_a", [0.0, 0.1, 0.37, 0.5, 0.93, 1.0])
def test_volt_seconds_over_one_carrier_period(d_a):
    n, v_dc = 256, 600.0
    pvs = _carrier_period(DutyTriple(d_a, 0.5, 0.2), v_dc, n)
    mean_am = sum(p.v_am for p in pvs) / n
    assert abs(mean_am - d_a * v_dc) <= v_dc / n


def test_balanced_duties_common_mode_half_dc():
    v_dc = 600.0
    pvs = _carrier_period(DutyTriple(0.5, 0.5, 0.5), v_dc, 256)
    assert sum(p.v_nm for p in pvs) / len(pvs) == v_dc / 2
