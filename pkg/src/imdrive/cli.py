"""Command-line driver: ``imdrive {design,steady,run,sweep}``.

Exit codes: 0 success, 1 validation error, 2 numerical divergence.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from imdrive.config import apply_overrides, parse_config
from imdrive.design import bode_table, margins, pi_gains_pu, plant_tf
from imdrive.output import emit_bode_csv, emit_manifest, emit_metrics, emit_table_csv, emit_trace_csv
from imdrive.params import RATED_SLIP, MachineParams, ParameterError, steady_state_circuit
from imdrive.simulation import ConfigError, DivergenceError, SimConfig, design_gains, run_scenario

log = logging.getLogger("imdrive")

EXIT_OK, EXIT_INVALID, EXIT_DIVERGED = 0, 1, 2


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value config file")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (env IMDRIVE_OUT overrides)")
    common.add_argument("--omega-c", type=float, help="current-loop bandwidth in rad/s")
    common.add_argument("-v", "--verbose", action="store_true")

    scenario = argparse.ArgumentParser(add_help=False)
    scenario.add_argument("--vdc-pu", type=float, help="DC link voltage as a multiple of v_b")
    scenario.add_argument("--dt", type=float, help="integration step in seconds")
    scenario.add_argument("--duration", type=float, help="simulated time in seconds")
    scenario.add_argument("--step-time", type=float, help="time of the torque/current step in seconds")
    scenario.add_argument("--decimate", type=int, help="record every N-th step")
    scenario.add_argument("--init", choices=("analytic", "zero"), help="initial condition mode")

    ap = argparse.ArgumentParser(prog="imdrive", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("design", parents=[common], help="PI gains, margins and Bode table")

    st = sub.add_parser("steady", parents=[common], help="equivalent-circuit operating points over a slip grid")
    st.add_argument("--slip", type=_floats, help="comma-separated slips (default: grid around rated)")
    st.add_argument("--v-pu", type=float, default=1.0, help="stator voltage in per-unit")

    sub.add_parser("run", parents=[common, scenario], help="simulate one scenario")

    sw = sub.add_parser("sweep", parents=[common, scenario], help="repeat runs over v_dc or omega_c values")
    grp = sw.add_mutually_exclusive_group(required=True)
    grp.add_argument("--vdc", type=_floats, help="comma-separated v_dc multiples of v_b")
    grp.add_argument("--omega-c-list", type=_floats, help="comma-separated bandwidths in rad/s")
    sw.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return ap


def _out_dir(args) -> Path:
    out = Path(os.environ.get("IMDRIVE_OUT") or args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> tuple[SimConfig, MachineParams]:
    text = args.config.read_text() if args.config else ""
    cfg, params = parse_config(text)
    overrides = {"omega_c": args.omega_c}
    if hasattr(args, "vdc_pu"):
        overrides.update(
            v_dc_pu=args.vdc_pu,
            dt=args.dt,
            duration=args.duration,
            step_time=args.step_time,
            decimate=args.decimate,
            init_mode=args.init,
        )
    return apply_overrides(cfg, params, **overrides), params


def cmd_design(args) -> int:
    cfg, params = _load(args)
    plant = plant_tf(params)
    gains = design_gains(cfg, params)
    w_c, pm = margins(plant, gains)
    table = bode_table(plant, gains, cfg.omega_c / 1000, cfg.omega_c * 1000, points_per_decade=20)
    out = _out_dir(args)
    bode_path = emit_bode_csv(table, out / "bode.csv")
    g_pu = pi_gains_pu(gains, params.bases.z_b)
    print(f"plant       R = {plant.r_eq:.6g} ohm   L' = {plant.l_sigma * 1e3:.6g} mH")
    print(f"gains (SI)  k_p = {gains.k_p:.6g} V/A   k_i = {gains.k_i:.6g} V/(A s)")
    print(f"gains (pu)  k_p = {g_pu.k_p:.6g}        k_i = {g_pu.k_i:.6g} 1/s")
    print(f"crossover   {w_c:.6g} rad/s = {w_c / (2 * math.pi):.6g} Hz")
    print(f"phase margin {pm:.6g} deg")
    print(f"bode table  {bode_path}")
    return EXIT_OK


def cmd_steady(args) -> int:
    _, params = _load(args)
    slips = args.slip or sorted({0.0, 0.005, 0.01, 0.02, RATED_SLIP, 0.05, 0.075, 0.1})
    rows = []
    for s in slips:
        sol = steady_state_circuit(params, s, args.v_pu)
        rows.append((s, abs(sol.i_s), sol.power_factor, sol.torque, abs(sol.psi_qds), abs(sol.psi_r)))
    cols = ("slip", "i_s_pu", "power_factor", "torque_pu", "psi_s_pu", "psi_r_pu")
    emit_table_csv(cols, rows, _out_dir(args) / "steady.csv")
    print("  ".join(f"{c:>12}" for c in cols))
    for r in rows:
        print("  ".join(f"{v:12.6g}" for v in r))
    return EXIT_OK


def _manifest(cfg, params, gains, metrics, paths, elapsed) -> dict:
    plant = plant_tf(params)
    g_pu = pi_gains_pu(gains, params.bases.z_b)
    return {
        "config": cfg.as_dict(),
        "machine": {k: getattr(params, k) for k in params.__dataclass_fields__},
        "bases": vars(params.bases),
        "plant": {"r_eq_ohm": plant.r_eq, "l_sigma_h": plant.l_sigma},
        "gains_si": {"k_p": gains.k_p, "k_i": gains.k_i},
        "gains_pu": {"k_p": g_pu.k_p, "k_i": g_pu.k_i},
        "metrics": metrics.as_flat_dict(),
        "artifacts": {k: str(v) for k, v in paths.items()},
        "runtime_s": elapsed,
    }


def cmd_run(args) -> int:
    cfg, params = _load(args)
    gains = design_gains(cfg, params)
    t0 = time.perf_counter()
    trace, metrics = run_scenario(cfg, params, gains)
    elapsed = time.perf_counter() - t0
    out = _out_dir(args)
    paths = {"trace": emit_trace_csv(trace, out / "trace.csv"), "metrics": emit_metrics(metrics, out / "metrics.txt")}
    paths["manifest"] = out / "manifest.json"
    emit_manifest(_manifest(cfg, params, gains, metrics, paths, elapsed), paths["manifest"])
    for k, v in metrics.as_flat_dict().items():
        print(f"{k} = {v:.6g}")
    print(f"wrote {out} in {elapsed:.1f} s")
    return EXIT_OK


SUMMARY_COLUMNS = (
    "v_dc_pu",
    "omega_c",
    "rise_time_10_90",
    "overshoot_pct",
    "duty_overflow_pre",
    "duty_overflow_post",
    "te_minus_tl_pre",
    "te_minus_tl_post",
    "torque_ripple_rms_pre",
    "lowfreq_peak_hz",
    "lowfreq_peak_pu",
)


def _sweep_point(cfg: SimConfig, params: MachineParams) -> tuple:
    _, m = run_scenario(cfg, params)
    flat = m.as_flat_dict()
    return (cfg.v_dc_pu, cfg.omega_c) + tuple(flat[c] for c in SUMMARY_COLUMNS[2:])


def cmd_sweep(args) -> int:
    cfg, params = _load(args)
    if args.vdc:
        cfgs = [replace(cfg, v_dc_pu=v) for v in args.vdc]
    else:
        cfgs = [replace(cfg, omega_c=w) for w in args.omega_c_list]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, cfgs, [params] * len(cfgs)))
    else:
        rows = [_sweep_point(c, params) for c in cfgs]
    emit_table_csv(SUMMARY_COLUMNS, rows, _out_dir(args) / "sweep.csv")
    print("  ".join(f"{c:>12.12}" for c in SUMMARY_COLUMNS))
    for r in rows:
        print("  ".join(f"{v:12.5g}" for v in r))
    return EXIT_OK


COMMANDS = {"design": cmd_design, "steady": cmd_steady, "run": cmd_run, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ConfigError, ParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
