"""Scalar results extracted from a simulation trace."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

# span around the torque step excluded from the "steady" windows
STEP_GUARD = 2e-3


class MetricsError(ValueError):
    """Trace or window unsuitable for the requested metric."""


@dataclass
class Metrics:
    rise_time_10_90: float
    overshoot_pct: float
    settle_time_2pct: float
    duty_overflow_pre: float
    duty_overflow_post: float
    torque_ripple_rms_pre: float
    torque_ripple_rms_post: float
    te_minus_tl_pre: float
    te_minus_tl_post: float
    fundamental_hz: float
    fundamental_pu: float
    lowfreq_peak_hz: float
    lowfreq_peak_pu: float
    spectrum_peaks: list = field(default_factory=list)

    def as_flat_dict(self) -> dict:
        out = asdict(self)
        peaks = out.pop("spectrum_peaks")
        for i, (hz, amp) in enumerate(peaks):
            out[f"spectrum_peak_{i}_hz"] = hz
            out[f"spectrum_peak_{i}_pu"] = amp
        return out


def carrier_average(x: np.ndarray, n: int) -> np.ndarray:
    """Centred moving average over ``n`` samples (one carrier period); edges use partial windows."""
    if n <= 1:
        return np.asarray(x, dtype=float).copy()
    kernel = np.ones(n)
    num = np.convolve(x, kernel, mode="same")
    den = np.convolve(np.ones_like(x, dtype=float), kernel, mode="same")
    return num / den


def step_response(t, y, step_time, y0, y1):
    """Rise (10-90 %), overshoot (%) and 2 % settling time of ``y`` for a step from ``y0`` to ``y1``."""
    if y1 == y0:
        return 0.0, 0.0, 0.0
    m = t >= step_time
    tt, yn = t[m], (y[m] - y0) / (y1 - y0)
    if tt.size == 0:
        raise MetricsError("no samples after the step")
    i10 = np.argmax(yn >= 0.1)
    i90 = np.argmax(yn >= 0.9)
    if yn[i10] < 0.1 or yn[i90] < 0.9:
        return math.inf, max(0.0, 100 * (yn.max() - 1)), math.inf
    rise = float(tt[i90] - tt[i10])
    overshoot = float(max(0.0, 100 * (yn.max() - 1.0)))
    outside = np.nonzero(np.abs(yn - 1.0) > 0.02)[0]
    if outside.size == 0:
        settle = 0.0
    elif outside[-1] == yn.size - 1:
        settle = math.inf
    else:
        settle = float(tt[outside[-1] + 1] - step_time)
    return rise, overshoot, settle


def spectrum(x: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Single-sided amplitude spectrum of a rectangular-windowed record."""
    n = len(x)
    amp = np.abs(np.fft.rfft(x)) * 2.0 / n
    amp[0] /= 2.0
    return np.fft.rfftfreq(n, dt), amp


def integer_period_window(t: np.ndarray, t_start: float, t_end: float, f0: float) -> np.ndarray:
    """Mask selecting the last whole number of fundamental periods inside ``[t_start, t_end)``."""
    dt = t[1] - t[0]
    n_per = int(math.floor((t_end - t_start) * f0 + 1e-9))
    if n_per < 1:
        raise MetricsError(f"window [{t_start:g}, {t_end:g}) s is shorter than one fundamental period")
    n_samp = int(round(n_per / f0 / dt))
    idx_end = int(np.searchsorted(t, t_end - 0.5 * dt))
    idx_start = idx_end - n_samp
    if idx_start < 0:
        raise MetricsError("window too short for FFT")
    mask = np.zeros(t.shape, dtype=bool)
    mask[idx_start:idx_end] = True
    return mask


def window_spectrum(trace, t_start, t_end, f_base):
    """Spectrum of phase-a stator current over whole periods of the mean synchronous frequency."""
    t = trace["t"]
    m = (t >= t_start) & (t < t_end)
    f0 = float(np.mean(trace["omega_s"][m])) * f_base
    mask = integer_period_window(t, t_start, t_end, f0)
    freqs, amp = spectrum(trace["i_as"][mask], t[1] - t[0])
    return freqs, amp, f0


def _peaks(freqs, amp, f0, f_sw, k=5):
    df = freqs[1] - freqs[0]
    fund_bin = int(round(f0 / df))
    fund = (float(freqs[fund_bin]), float(amp[fund_bin]))
    a = amp.copy()
    a[0] = 0.0
    a[max(fund_bin - 1, 0) : fund_bin + 2] = 0.0
    # local maxima only, so one sideband cluster does not fill the list
    local = np.nonzero((a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:]))[0] + 1
    order = local[np.argsort(a[local])[::-1]][:k]
    peaks = [fund] + [(float(freqs[i]), float(a[i])) for i in order]
    low = np.nonzero(freqs < f_sw / 2)[0]
    i_low = low[np.argmax(a[low])]
    return peaks, (float(freqs[i_low]), float(a[i_low]))


def compute_metrics(trace, cfg, f_base: float) -> Metrics:
    """Metrics for a resolved config. ``f_base`` is the machine's rated frequency in hertz."""
    t = trace["t"]
    if t.size < 2 or t[-1] <= cfg.step_time:
        raise MetricsError("trace must span both sides of the step")
    pre = t < cfg.step_time - STEP_GUARD
    post = t >= cfg.step_time + STEP_GUARD
    if not pre.any() or not post.any():
        raise MetricsError("steady windows are empty; step_time or duration too short")

    n_avg = max(1, int(round(1.0 / (cfg.f_sw * (t[1] - t[0])))))
    i_qs_avg = carrier_average(trace["i_qs"], n_avg)
    rise, overshoot, settle = step_response(t, i_qs_avg, cfg.step_time, cfg.i_qs_ref_before, cfg.i_qs_ref_after)

    over = trace["overmod"]
    te = trace["t_e"]
    tl = trace["t_load"]

    freqs, amp, f0 = window_spectrum(trace, 0.0, cfg.step_time, f_base)
    peaks, low = _peaks(freqs, amp, f0, cfg.f_sw)
    return Metrics(
        rise_time_10_90=rise,
        overshoot_pct=overshoot,
        settle_time_2pct=settle,
        duty_overflow_pre=float(over[pre].mean()),
        duty_overflow_post=float(over[post].mean()),
        torque_ripple_rms_pre=float(np.std(te[pre])),
        torque_ripple_rms_post=float(np.std(te[post])),
        te_minus_tl_pre=float(np.mean(te[pre] - tl[pre])),
        te_minus_tl_post=float(np.mean(te[post] - tl[post])),
        fundamental_hz=peaks[0][0],
        fundamental_pu=peaks[0][1],
        lowfreq_peak_hz=low[0],
        lowfreq_peak_pu=low[1],
        spectrum_peaks=peaks,
    )
