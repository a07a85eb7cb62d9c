"""P1 finite elements against the radial solver on the unit disk.

Refines the disk mesh three times and prints the error of the FEM value of
lambda_{2,alpha} against the shooting value, with the observed order
log2(e_h / e_{h/2}); piecewise-linear elements give order 2.

Run: python3 demos/fem_convergence.py
"""

import math

from robinlab import BallSpec, disk_mesh, robin_eigenvalue_ball, robin_eigs_fem

alpha = -0.5
exact = robin_eigenvalue_ball(BallSpec(0.0, 2, 1.0), alpha)
print(f"radial lambda_2 = {exact:.12f} (alpha = {alpha})")
prev = None
for h in (0.08, 0.04, 0.02):
    mesh = disk_mesh(0.0, 1.0, h)
    lam = robin_eigs_fem(mesh, alpha, k=2).eigenvalues[1]
    err = abs(lam - exact)
    order = "" if prev is None else f"  order {math.log2(prev / err):.2f}"
    print(f"h={h:<5} vertices={mesh.n_vertices:6d}  lambda_2={lam:.8f}  err={err:.2e}{order}")
    prev = err
