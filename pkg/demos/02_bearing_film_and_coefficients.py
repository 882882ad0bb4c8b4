"""Grooved-bearing film physics: steady pressure, dynamic coefficients, losses.

Run from the repository root:  python demos/02_bearing_film_and_coefficients.py
"""

import numpy as np

from gasrotor import (HGJBGeometry, compressibility_number, dynamic_coefficients,
                      fluid_properties, power_loss, solve_zeroth_order)
from gasrotor.bearing import GroovedFilmSolver

geom = HGJBGeometry(alpha=0.5, beta=2.44, gamma=0.8, h_g=1.6e-5, h_r=8e-6,
                    L=0.012, D=0.008)
mu = fluid_properties("air", 293.15).mu
omega = 2 * np.pi * 40000.0 / 60.0
lam = compressibility_number(mu, omega, geom.R, 1e5, geom.h_r)
print(f"air at 20 C: mu = {mu:.4e} Pa s, Lambda = {lam:.3f} at 40 krpm")

sol = solve_zeroth_order(geom, lam, grid_n=101)
print(f"steady film: max p/p_a = {sol.P0.max():.4f} at mid-span "
      f"({sol.iterations} Newton iterations, residual {sol.residual:.1e})")

# a tent-shaped profile: ambient at the ends, plateau over the central land
for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
    i = int(frac * (sol.P0.size - 1))
    bar = "#" * int(60 * (sol.P0[i] - 1) / max(sol.P0.max() - 1, 1e-12))
    print(f"  z/L = {frac - 0.5:+.2f}  P = {sol.P0[i]:.4f} {bar}")

co = dynamic_coefficients(geom, lam, nu=0.5)
print(f"\ndynamic coefficients at nu = 0.5 (dimensionless):")
print(f"  K = [[{co.K[0, 0]:+.4f}, {co.K[0, 1]:+.4f}], "
      f"[{co.K[1, 0]:+.4f}, {co.K[1, 1]:+.4f}]]")
print(f"  C = [[{co.C[0, 0]:+.4f}, {co.C[0, 1]:+.4f}], "
      f"[{co.C[1, 0]:+.4f}, {co.C[1, 1]:+.4f}]]")

# whirl-ratio sweep in one vectorised batch
solver = GroovedFilmSolver(geom.alpha, geom.beta, geom.gamma, geom.hg_hr,
                           geom.L_D, lam, 101)
nus = np.linspace(0.2, 2.0, 10)
K, C = solver.coefficients(nus)
print("\n  nu     Kxx      Kxy      Cxx      Cxy")
for nu, k, c in zip(nus, K, C):
    print(f"  {nu:4.2f} {k[0, 0]:+8.4f} {k[0, 1]:+8.4f} {c[0, 0]:+8.4f} {c[0, 1]:+8.4f}")

print(f"\nviscous power loss at 40 krpm: {power_loss(geom, mu, omega):.3f} W")
