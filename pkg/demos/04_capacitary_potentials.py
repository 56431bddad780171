# Capacitary potentials and their pointwise bounds
#
# The capacitary potential minimizes the operator energy among fields that
# equal 1 on the target set.  When the operator is positive with its kernel
# weight, the potential stays inside (0, 2) off the set, its gradients decay
# like dist^(2m-n-j) in units of the m-harmonic capacity, and the value obeys
# a matching capacity lower bound.  Ball targets have closed-form potentials,
# which anchor every numerical check here.

import numpy as np

from polycap import (Ball, Grid, capacitary_potential, evaluate_ball_potential,
                     gradient_decay_check, laplacian, lower_bound_check,
                     radial_ball_potential, range_check)

print("== closed-form ball potentials stay inside (0, 1] ==")
r = np.geomspace(1.0, 100.0, 50)
for (m, n) in [(1, 3), (2, 5), (2, 7), (3, 7), (3, 8)]:
    u = evaluate_ball_potential(m, n, 1.0, r)
    print(f"(m={m}, n={n}): U(1.5) = {evaluate_ball_potential(m,n,1.0,[1.5])[0]:.4f}, "
          f"min {u.min():.2e}, max {u.max():.4f}")

print("\n== Newtonian potential on the far radial box ==")
rg, u, cap = radial_ball_potential(1, 3, 1.0, h=0.01, box=300.0)
for rho in (1.5, 2.0, 3.0):
    i = int(np.argmin(np.abs(rg.r - rho)))
    print(f"U({rho}) = {u[i]:.4f}  vs 1/r = {1/rho:.4f}  "
          f"(kernel-unit ratio {u[i]*rg.r[i]*4*np.pi/cap:.4f})")

print("\n== grid potential, range and gradient checks ==")
rep = capacitary_potential(laplacian(3), Ball(1.0), Grid(3, 0.1, 40))
rc = range_check(rep)
print(f"range off K: [{rc['min']:.2e}, {rc['max']:.4f}]  inside (0,2): {rc['passed']}")
decay = gradient_decay_check(rep, orders=(0, 1), probe_radii=(1.5, 2.0))
for j, info in decay["orders"].items():
    print(f"order {j}: fitted decay constant {info['fitted_c']:.4f}")
low = lower_bound_check(rep, 1.0, probe_radii=(1.5, 2.0))
print(f"capacity lower bound: fitted c = {low['fitted_c']:.4f} > 0: {low['passed']}")
