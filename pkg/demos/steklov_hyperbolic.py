"""The first Steklov eigenvalue as the zero of alpha -> lambda_{2,alpha}.

For a hyperbolic disk of radius R the first nonzero Steklov eigenvalue is
1/sinh(R) (eigenfunction tanh(r/2) cos(theta)). The Robin eigenvalue
lambda_{2,alpha} is increasing in alpha and crosses zero exactly at
alpha = -sigma_1, so a root finder on the Robin branch recovers sigma_1.

Run: python3 demos/steklov_hyperbolic.py
"""

import math

from robinlab import BallSpec, steklov_ball, steklov_via_robin_root

print(f"{'R':>5} {'1/sinh R':>14} {'closed form':>14} {'Robin root':>14}")
for R in (0.25, 0.5, 1.0, 2.0):
    ball = BallSpec(-1.0, 2, R)
    print(f"{R:5g} {1 / math.sinh(R):14.10f} {steklov_ball(ball):14.10f} "
          f"{steklov_via_robin_root(ball):14.10f}")
