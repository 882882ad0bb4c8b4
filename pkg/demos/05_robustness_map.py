"""Manufacturing-robustness map of the example rotor (oracle evaluator).

Sweeps clearance and groove-depth deviations on a small grid and prints
the feasibility picture as ASCII art ('#' feasible, '.' infeasible).

Run from the repository root:  python demos/05_robustness_map.py
"""

import json
import pathlib
import time

from gasrotor import (HGJBGeometry, OperatingPoint, OracleEvaluator, SweepSpec,
                      ToleranceSpec, export_contours, feasible_fraction,
                      parse_rotor, run_sweep)

HERE = pathlib.Path(__file__).parent

rotor = parse_rotor((HERE / "example.rotor.json").read_text())
geom = HGJBGeometry(alpha=0.5, beta=2.44, gamma=0.8, h_g=1.6e-5, h_r=8e-6,
                    L=0.012, D=0.008)
op = OperatingPoint(fluid="air", p_a=1e5, T=293.15, N=40000.0)

spec = SweepSpec(speeds=(32000.0, 40000.0, 48000.0),
                 tolerance=ToleranceSpec(delta_h_r=2e-6, delta_h_g=4e-6, grid_n=9),
                 evaluator="oracle")

t0 = time.time()
fmap = run_sweep(rotor, geom, op, spec, OracleEvaluator(grid_n=101),
                 progress=lambda d, t: print(f"\rcell {d}/{t}", end="", flush=True))
print(f"\nswept {fmap.shape[0]}x{fmap.shape[1]} cells x {len(spec.speeds)} speeds "
      f"in {time.time() - t0:.0f} s")

print(f"feasible fraction: {feasible_fraction(fmap):.2f}")
print("\n          delta h_g (um) ->")
for i in range(fmap.shape[0] - 1, -1, -1):
    row = "".join("#" if fmap.feasible[i, j] else "." for j in range(fmap.shape[1]))
    print(f"  {fmap.dhr_axis[i] * 1e6:+5.1f} um  {row}")
print("  (rows: clearance deviation; nominal at the centre)")

doc = export_contours(fmap)
pathlib.Path("demo_contours.json").write_text(json.dumps(doc, indent=2))
print("\nwrote demo_contours.json (renderable by the dashboard)")
