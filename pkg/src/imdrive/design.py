"""Frequency-domain current-loop design: RL plant, pole-zero-cancelling PI gains, Bode data, margins."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from imdrive.params import MachineParams
from imdrive.regulator import PiGains


class SearchRangeError(ValueError):
    """No unity-gain crossover inside the search interval."""


class PlantTf(NamedTuple):
    """Stator-current plant ``1/(r_eq + s·l_sigma)`` in SI units."""

    r_eq: float
    l_sigma: float


class FrequencyResponsePoint(NamedTuple):
    omega: float
    magnitude_db: float
    phase_deg: float


def plant_tf(params: MachineParams) -> PlantTf:
    l_m, l_s, l_r = params.inductances()
    r_eq = params.rs + params.rr * (l_m / l_r) ** 2
    l_sigma = l_s - l_m**2 / l_r
    return PlantTf(r_eq, l_sigma)


def default_omega_c(f_sw: float) -> float:
    """Bandwidth rule of thumb: a decade below the switching frequency."""
    return 2.0 * math.pi * f_sw / 10.0


def pi_gains(plant: PlantTf, omega_c: float) -> PiGains:
    """Gains whose zero cancels the plant pole, placing crossover at ``omega_c``."""
    if not omega_c > 0:
        raise ValueError(f"omega_c must be > 0, got {omega_c!r}")
    return PiGains(k_p=omega_c * plant.l_sigma, k_i=omega_c * plant.r_eq)


def pi_gains_pu(gains: PiGains, z_b: float) -> PiGains:
    """Convert SI gains (V/A, V/(A·s)) to per-unit voltage per per-unit current."""
    return PiGains(gains.k_p / z_b, gains.k_i / z_b)


def loop_gain_at(plant: PlantTf, gains: PiGains, omega):
    """Open-loop gain ``(k_p + k_i/s) / (r_eq + s·l_sigma)`` at ``s = j·omega``."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("loop gain has an integrator pole at omega = 0; omega must be > 0")
    s = 1j * w
    out = (gains.k_p + gains.k_i / s) / (plant.r_eq + s * plant.l_sigma)
    return out[()] if out.ndim == 0 else out


def closed_loop_at(plant: PlantTf, gains: PiGains, omega):
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega must be >= 0")
    s = 1j * w
    # multiply through by s so that omega = 0 is finite: T/(1+T) = N/(N + D)
    num = gains.k_p * s + gains.k_i
    den = s * (plant.r_eq + s * plant.l_sigma)
    with np.errstate(invalid="ignore"):
        out = num / (num + den)
    if gains.k_i == 0:
        # pure proportional: DC gain is k_p/(r_eq + k_p)
        out = np.where(w == 0, gains.k_p / (plant.r_eq + gains.k_p) + 0j, out)
    return out[()] if out.ndim == 0 else out


def _bisect_crossover(plant: PlantTf, gains: PiGains, lo: float, hi: float, tol: float = 1e-13) -> float:
    f_lo = abs(loop_gain_at(plant, gains, lo)) - 1.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        f_mid = abs(loop_gain_at(plant, gains, mid)) - 1.0
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi / lo - 1.0 < tol:
            break
    return math.sqrt(lo * hi)


def margins(
    plant: PlantTf,
    gains: PiGains,
    omega_min: float = 1e-1,
    omega_max: float = 1e8,
    points_per_decade: int = 50,
) -> tuple[float, float]:
    """Return ``(crossover_rad_s, phase_margin_deg)`` for the first unity-gain crossing."""
    n = int(math.ceil(math.log10(omega_max / omega_min) * points_per_decade)) + 1
    grid = np.logspace(math.log10(omega_min), math.log10(omega_max), n)
    mag = np.abs(loop_gain_at(plant, gains, grid)) - 1.0
    sign_change = np.nonzero(np.signbit(mag[:-1]) != np.signbit(mag[1:]))[0]
    if sign_change.size == 0:
        raise SearchRangeError(f"|Tol| does not cross 1 between {omega_min:g} and {omega_max:g} rad/s")
    k = sign_change[0]
    w_c = _bisect_crossover(plant, gains, grid[k], grid[k + 1])
    pm = 180.0 + math.degrees(np.angle(loop_gain_at(plant, gains, w_c)))
    return w_c, pm


def bode_table(
    plant: PlantTf,
    gains: PiGains,
    omega_min: float,
    omega_max: float,
    points_per_decade: int = 20,
) -> list[tuple[FrequencyResponsePoint, FrequencyResponsePoint]]:
    """Log-spaced (open-loop, closed-loop) response pairs."""
    if not (0 < omega_min < omega_max) or points_per_decade < 1:
        raise ValueError("need 0 < omega_min < omega_max and points_per_decade >= 1")
    n = int(round(math.log10(omega_max / omega_min) * points_per_decade)) + 1
    w = np.logspace(math.log10(omega_min), math.log10(omega_max), n)
    tol = loop_gain_at(plant, gains, w)
    tcl = closed_loop_at(plant, gains, w)
    rows = []
    for wi, a, b in zip(w, tol, tcl):
        rows.append(
            (
                FrequencyResponsePoint(float(wi), 20 * math.log10(abs(a)), math.degrees(np.angle(a))),
                FrequencyResponsePoint(float(wi), 20 * math.log10(abs(b)), math.degrees(np.angle(b))),
            )
        )
    return rows
