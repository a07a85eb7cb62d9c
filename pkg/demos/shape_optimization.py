"""Among domains of fixed area the disk maximizes lambda_{2,alpha}.

Flat ellipses of area pi and hyperbolic perturbed disks are compared with
the geodesic disk of the same area, for several negative Robin parameters.
Every gap lambda_2(ball) - lambda_2(Omega) is positive, and shrinks as the
shape approaches the disk.

Run: python3 demos/shape_optimization.py
"""

import math

from robinlab import ellipse_mesh, perturbed_disk_mesh, shape_opt_sweep

family = []
for aspect in (1.1, 1.5, 2.0):
    a, b = math.sqrt(aspect), 1 / math.sqrt(aspect)
    family.append((f"ellipse a/b={aspect}", ellipse_mesh(a, b, 0.03)))
for eps in (0.05, 0.15):
    family.append((f"hyperbolic eps={eps} k=3", perturbed_disk_mesh(-1.0, 1.0, eps, 3, 0.02)))

for row in shape_opt_sweep(family, [-0.6, -0.3, 0.0]):
    if not row.applicable:
        continue
    print(f"{row.label:26} alpha={row.alpha:5.2f}  lambda_2={row.lambda2_omega:.6f}  "
          f"ball={row.lambda2_ball:.6f}  gap={row.lambda2_ball - row.lambda2_omega:.4f}")
