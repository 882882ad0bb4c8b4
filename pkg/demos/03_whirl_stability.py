"""Whirl stability of the example rotor: the four rigid-body mode results.

Run from the repository root:  python demos/03_whirl_stability.py
"""

import pathlib

from gasrotor import (HGJBGeometry, OperatingPoint, OracleEvaluator,
                      mass_properties, parse_rotor)

HERE = pathlib.Path(__file__).parent

rotor = parse_rotor((HERE / "example.rotor.json").read_text())
geom = HGJBGeometry(alpha=0.5, beta=2.44, gamma=0.8, h_g=1.6e-5, h_r=8e-6,
                    L=0.012, D=0.008)
evaluator = OracleEvaluator(grid_n=101)
mp = mass_properties(rotor)

print("speed sweep of the example rotor (air, 1 bar, 20 C):\n")
print(f"{'rpm':>8} {'mode':<22} {'nu*':>7} {'log dec':>9} {'stable':>7}")
for rpm in (20000.0, 30000.0, 40000.0, 50000.0):
    op = OperatingPoint(fluid="air", p_a=1e5, T=293.15, N=rpm)
    perf = evaluator.evaluate(mp, geom, op)
    for mode in perf.modes:
        if mode.excited:
            print(f"{rpm:8.0f} {mode.name:<22} {mode.whirl_speed_ratio:7.3f} "
                  f"{mode.log_dec:9.3f} {str(mode.stable):>7}")
        else:
            print(f"{rpm:8.0f} {mode.name:<22} {'-':>7} {'-':>9} {'n/a':>7}")
    worst = perf.worst_log_dec()
    print(f"{'':8} worst log dec {worst:+.3f}   power {perf.power_loss_w:.3f} W   "
          f"load capacity {perf.load_capacity_n:.2f} N\n")
