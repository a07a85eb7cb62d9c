"""Independent reference values used by the tests.

Nothing here imports robinlab; each oracle is a short, separately derived
computation (power series plus bisection, closed forms).
"""

import math


def bessel_j(nu: int, x: float, terms: int = 60) -> float:
    """J_nu(x) from its power series (fine for x below ~20)."""
    s = 0.0
    half = x / 2.0
    for m in range(terms):
        s += (-1) ** m * half ** (2 * m + nu) / (math.factorial(m) * math.factorial(m + nu))
    return s


def bessel_j_prime(nu: int, x: float) -> float:
    """J_nu'(x) = (J_{nu-1}(x) - J_{nu+1}(x)) / 2, with J_{-1} = -J_1."""
    lower = -bessel_j(1, x) if nu == 0 else bessel_j(nu - 1, x)
    return 0.5 * (lower - bessel_j(nu + 1, x))


def bisect(f, a: float, b: float, tol: float = 1e-15) -> float:
    fa = f(a)
    if fa * f(b) > 0:
        raise ValueError("no sign change")
    while b - a > tol * max(1.0, abs(a)):
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def j1_prime_first_zero() -> float:
    """First positive zero of J_1' (~1.8412) by series + bisection."""
    return bisect(lambda x: bessel_j_prime(1, x), 1.0, 3.0)


def bessel_i(nu: int, x: float, terms: int = 60) -> float:
    """Modified Bessel I_nu(x) from its power series."""
    half = x / 2.0
    return sum(half ** (2 * m + nu) / (math.factorial(m) * math.factorial(m + nu)) for m in range(terms))


def euclid_disk_robin_l1(alpha: float, R: float = 1.0) -> float:
    """lambda_{2,alpha} of the flat disk from x J_1'(x) + alpha R J_1(x) = 0.

    For alpha <= -1/R the eigenvalue is <= 0 and the modified-Bessel form
    x I_1'(x) + alpha R I_1(x) = 0 with lambda = -x^2/R^2 is used.
    """
    if alpha == -1.0 / R:
        return 0.0
    if alpha > -1.0 / R:
        g = lambda x: x * bessel_j_prime(1, x) + alpha * R * bessel_j(1, x)
        return (bisect(g, 1e-6, 1.8412) / R) ** 2 if alpha < 0 else (bisect(g, 1.0, 3.0) / R) ** 2

    def g(x):
        di = 0.5 * (bessel_i(0, x) + bessel_i(2, x))
        return x * di + alpha * R * bessel_i(1, x)

    return -(bisect(g, 1e-6, 50.0) / R) ** 2


def hyperbolic_disk_steklov(R: float) -> float:
    """sigma_1 of the geodesic disk of radius R in curvature -1 (2-D): F = tanh(r/2)."""
    return 1.0 / math.sinh(R)
