"""Step response versus current-loop bandwidth.

Scales the default crossover (one tenth of the switching frequency) and
reports rise time, overshoot and torque balance for each point.

    python3 scripts/bandwidth_sweep.py --scale 0.25 0.5 1 1.5 --jobs 4
"""

import argparse
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from imdrive.design import default_omega_c
from imdrive.params import MachineParams
from imdrive.simulation import SimConfig, resolve_config, run_scenario


def point(cfg, params):
    _, m = run_scenario(cfg, params)
    return cfg.omega_c, m


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, nargs="+", default=[0.25, 0.5, 1.0, 1.5])
    ap.add_argument("--vdc", type=float, default=2.5)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    params = MachineParams()
    base = resolve_config(SimConfig(v_dc_pu=args.vdc), params)
    w0 = default_omega_c(base.f_sw)
    cfgs = [resolve_config(replace(base, omega_c=k * w0, k_p=None, k_i=None), params) for k in args.scale]
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(point, cfgs, [params] * len(cfgs)))
    print(f"{'f_c [Hz]':>10} {'rise [ms]':>10} {'overshoot %':>12} {'overflow':>9} {'te-tl post':>11}")
    for w_c, m in results:
        print(f"{w_c / math.tau:10.1f} {m.rise_time_10_90 * 1e3:10.3f} {m.overshoot_pct:12.2f} {m.duty_overflow_pre:9.3f} {m.te_minus_tl_post:+11.4f}")


if __name__ == "__main__":
    main()
