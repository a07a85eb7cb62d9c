"""lambda_{2,alpha} of a ball of fixed radius is nondecreasing in curvature.

Sweeps kappa from -3 to 0 for a radius-1 disk and a grid of alpha values,
printing one row per alpha; each row increases from left to right.

Run: python3 demos/curvature_comparison.py
"""

from robinlab import comparison_sweep

kappas = [-3.0, -2.0, -1.0, -0.5, 0.0]
alphas = [-1.0, -0.5, 0.0]
rows, violations = comparison_sweep(1.0, 2, alphas, kappas)
table = {(r.alpha, r.kappa): r.lambda2 for r in rows}
print("alpha \\ kappa " + "".join(f"{k:>11g}" for k in kappas))
for a in alphas:
    print(f"{a:13g} " + "".join(f"{table[a, k]:11.6f}" for k in kappas))
print(f"monotonicity violations: {len(violations)}")
