"""Current-loop design and rated operating point, printed as a short report."""

import argparse
import math

from imdrive.design import default_omega_c, margins, pi_gains, pi_gains_pu, plant_tf
from imdrive.params import RATED_SLIP, MachineParams, steady_state_circuit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--f-sw", type=float, default=6000.0, help="switching frequency in Hz")
    args = ap.parse_args()

    params = MachineParams()
    b = params.bases
    print(f"bases: v_b {b.v_b:.2f} V, i_b {b.i_b:.2f} A, z_b {b.z_b:.3f} ohm, t_b {b.t_b:.2f} N m")

    sol = steady_state_circuit(params, RATED_SLIP)
    print(f"rated slip {RATED_SLIP}: |i_s| {abs(sol.i_s):.4f} pu, pf {sol.power_factor:.4f}, torque {sol.torque:.4f} pu")

    plant = plant_tf(params)
    gains = pi_gains(plant, default_omega_c(args.f_sw))
    g_pu = pi_gains_pu(gains, b.z_b)
    w_c, pm = margins(plant, gains)
    print(f"plant R {plant.r_eq:.5f} ohm, L' {plant.l_sigma * 1e3:.5f} mH")
    print(f"k_p {gains.k_p:.4f} V/A ({g_pu.k_p:.5f} pu), k_i {gains.k_i:.2f} V/(A s) ({g_pu.k_i:.3f} pu/s)")
    print(f"crossover {w_c / (2 * math.pi):.2f} Hz, phase margin {pm:.3f} deg")


if __name__ == "__main__":
    main()
