"""The chain of quotients behind the disk's maximality.

For a domain Omega and the ball Omega* of equal area:

    lambda_2(Omega) <= Q_test <= Q_H <= Q_ball = lambda_2(Omega*)

where Q_test is the Rayleigh quotient of the transplanted ball eigenfunction
(recentred at the weighted centre of mass), Q_H bounds it by the monotone
function H, and Q_ball evaluates the same quantity on the ball. The disk
itself gives equality up to discretization error.

Run: python3 demos/inequality_chain.py
"""

from robinlab import disk_mesh, ellipse_mesh, inequality_chain, perturbed_disk_mesh

cases = [
    ("disk", disk_mesh(0.0, 1.0, 0.03), -0.3),
    ("ellipse 1.4 x 1/1.4", ellipse_mesh(1.4, 1 / 1.4, 0.03), -0.3),
    ("hyperbolic perturbed disk", perturbed_disk_mesh(-1.0, 1.0, 0.1, 3, 0.02), -0.5),
]
for name, mesh, alpha in cases:
    rep = inequality_chain(mesh, alpha)
    chain = "  <=  ".join(f"{c:.6f}" for c in rep.chain)
    print(f"{name} (alpha={alpha}):\n  {chain}\n  ball lambda_2 = {rep.lambda2_ball:.6f}, "
          f"centre = ({rep.center[0]:.2e}, {rep.center[1]:.2e}), "
          f"mesh error bound {rep.mesh_error_bound:.1e}")
