"""Robin eigenvalues of geodesic balls by radial shooting.

Tabulates lambda_{1,alpha} and lambda_{2,alpha} of unit balls in flat and
hyperbolic 2- and 3-space. Two sanity checks are visible in the output:
lambda_2 vanishes at alpha = -1/R in flat space, and lambda_2 grows with
alpha and with the curvature kappa (for kappa <= 0).

Run: python3 demos/ball_eigenvalues.py
"""

from robinlab import BallSpec, robin_eigenvalue_ball, steklov_ball

print(f"{'kappa':>6} {'n':>2} {'alpha':>6} {'lambda_1':>14} {'lambda_2':>14}")
for kappa in (-1.0, 0.0):
    for n in (2, 3):
        ball = BallSpec(kappa, n, 1.0)
        for alpha in (-1.0, -0.5, 0.0):
            # round so that values of size 1e-15 print as 0 rather than -0
            l1 = round(robin_eigenvalue_ball(ball, alpha, sector=0), 10) + 0.0
            l2 = round(robin_eigenvalue_ball(ball, alpha, sector=1), 10) + 0.0
            print(f"{kappa:6g} {n:2d} {alpha:6g} {l1:14.10f} {l2:14.10f}")
        print(f"{'':9} sigma_1 = {steklov_ball(ball):.10f}")
