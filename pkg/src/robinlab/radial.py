"""Radial mode ODEs on geodesic balls and the shooting eigenvalue solver.

Sector ``l = 1`` is the profile F of the second Robin eigenfunctions
``F(r) psi_i(theta)``::

    F'' + (n-1) sn'/sn F' + (lam - (n-1)/sn^2) F = 0,   F(0) = 0, F'(0) = 1

Sector ``l = 0`` drops the angular potential and starts from G(0)=1, G'(0)=0;
its first Robin eigenvalue is lambda_1 of the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from . import spaceform
from .errors import BracketError, IntegrationError, UnsupportedParameterError
from .spaceform import BallSpec

START_FRACTION = 1e-6
RTOL = 1e-11
ATOL = 1e-11
LAMBDA_XTOL = 1e-13


@dataclass(frozen=True)
class RadialMode:
    ball: BallSpec
    lambda_trial: float
    alpha: float = 0.0
    sector: int = 1

    def __post_init__(self):
        if self.sector not in (0, 1):
            raise UnsupportedParameterError(f"only sectors 0 and 1 are supported, got {self.sector}")


@dataclass
class RadialProfile:
    """Samples of a radial profile on ``[0, R]``.

    ``dense`` (when present) evaluates ``(F, F')`` anywhere on ``[0, R]``.
    """

    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray | None = None
    sector: int = 1
    dense: Callable | None = field(default=None, repr=False)

    @property
    def end_value(self) -> float:
        return float(self.values[-1])

    @property
    def end_deriv(self) -> float:
        return float(self.derivs[-1])

    @classmethod
    def from_samples(cls, grid, values, derivs=None, sector=1):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if derivs is None:
            derivs = np.gradient(values, grid, edge_order=2)
        return cls(grid, values, np.asarray(derivs, dtype=float), sector)

    def evaluate(self, r):
        """Return ``(F(r), F'(r))`` from the dense interpolant (or linear
        interpolation of the samples if there is none)."""
        r = np.asarray(r, dtype=float)
        if self.dense is not None:
            return self.dense(r)
        return np.interp(r, self.grid, self.values), np.interp(r, self.grid, self.derivs)

    def resample(self, n_points: int) -> "RadialProfile":
        grid = np.linspace(0.0, self.grid[-1], n_points)
        f, df = self.evaluate(grid)
        return RadialProfile(grid, f, df, self.sector, self.dense)


def _coefficients(kappa: float):
    """Scalar closures for sn and sn'/sn; the hot loop avoids numpy overhead."""
    if kappa == 0:
        return (lambda r: r), (lambda r: 1.0 / r)
    if abs(kappa) < spaceform.KAPPA_SERIES_CUTOFF:
        return (lambda r: spaceform.sn(kappa, r)), (lambda r: spaceform.cot_ratio(kappa, r))
    s = math.sqrt(abs(kappa))
    if kappa < 0:
        return (lambda r: math.sinh(s * r) / s), (lambda r: s / math.tanh(s * r))
    return (lambda r: math.sin(s * r) / s), (lambda r: s / math.tan(s * r))


def start_values(mode: RadialMode, r0: float):
    """Taylor expansion of the regular solution at ``r0`` near the origin.

    l=1: F = r + c3 r^3 with c3 = (2(n-1)kappa/3 - lam) / (2(n+2)).
    l=0: G = 1 + d2 r^2 with d2 = -lam / (2n).
    """
    n, kappa, lam = mode.ball.dim, mode.ball.kappa, mode.lambda_trial
    if mode.sector == 1:
        c3 = (2.0 * (n - 1) * kappa / 3.0 - lam) / (2.0 * (n + 2))
        return r0 + c3 * r0**3, 1.0 + 3.0 * c3 * r0**2
    d2 = -lam / (2.0 * n)
    return 1.0 + d2 * r0**2, 2.0 * d2 * r0


def _rhs_factory(mode: RadialMode):
    n = mode.ball.dim
    lam = mode.lambda_trial
    pot = (n - 1) if mode.sector == 1 else 0
    sn, cot = _coefficients(mode.ball.kappa)

    def rhs(r, y):
        f, df = y
        s = sn(r)
        return [df, -(n - 1) * cot(r) * df - (lam - pot / (s * s)) * f]

    return rhs


def _rk4_log(rhs, y0, r0, r1, steps):
    """Classical RK4 with uniform steps in s = log r (removes the 1/r stiffness)."""
    s_grid = np.linspace(math.log(r0), math.log(r1), steps + 1)
    h = s_grid[1] - s_grid[0]

    def g(s, y):
        r = math.exp(s)
        d = rhs(r, y)
        return np.array([r * d[0], r * d[1]])

    ys = np.empty((steps + 1, 2))
    ys[0] = y0
    y = np.array(y0, dtype=float)
    for i in range(steps):
        s = s_grid[i]
        k1 = g(s, y)
        k2 = g(s + h / 2, y + h / 2 * k1)
        k3 = g(s + h / 2, y + h / 2 * k2)
        k4 = g(s + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[i + 1] = y
    grid = np.exp(s_grid)
    grid[-1] = r1
    return grid, ys


def integrate_radial(mode: RadialMode, *, rtol=RTOL, atol=ATOL, rk4_steps=None) -> RadialProfile:
    """Integrate the sector ODE from the origin to ``R``.

    The singular point r=0 is skipped by starting at ``eps = 1e-6 R`` with the
    Taylor data of :func:`start_values`. By default DOP853 is used with
    ``rtol``; the absolute tolerance is scaled by ``eps`` so that F ~ r stays
    relatively accurate near the origin. ``rk4_steps`` switches to fixed-step
    RK4 in log r (used for convergence-order checks).
    """
    R = mode.ball.radius
    eps = START_FRACTION * R
    y0 = start_values(mode, eps)
    rhs = _rhs_factory(mode)
    origin = (0.0, 1.0) if mode.sector == 1 else (1.0, 0.0)

    if rk4_steps is not None:
        grid, ys = _rk4_log(rhs, y0, eps, R, int(rk4_steps))
        return RadialProfile(
            np.concatenate([[0.0], grid]),
            np.concatenate([[origin[0]], ys[:, 0]]),
            np.concatenate([[origin[1]], ys[:, 1]]),
            mode.sector,
        )

    sol = integrate.solve_ivp(
        rhs, (eps, R), y0, method="DOP853", rtol=rtol, atol=atol * eps, dense_output=True
    )
    if sol.status != 0:
        last = float(sol.t[-1]) if sol.t.size else eps
        raise IntegrationError(f"radial integration failed at r={last}: {sol.message}", last_r=last)

    dense_sol = sol.sol

    def dense(r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        f = np.empty_like(r)
        df = np.empty_like(r)
        near = r < eps
        if np.any(near):
            sv = [start_values(mode, x) for x in r[near]]
            f[near] = [v[0] for v in sv]
            df[near] = [v[1] for v in sv]
        far = ~near
        if np.any(far):
            y = dense_sol(np.minimum(r[far], R))
            f[far], df[far] = y[0], y[1]
        if scalar:
            return float(f[0]), float(df[0])
        return f, df

    return RadialProfile(
        np.concatenate([[0.0], sol.t]),
        np.concatenate([[origin[0]], sol.y[0]]),
        np.concatenate([[origin[1]], sol.y[1]]),
        mode.sector,
        dense,
    )


def shoot_residual(mode: RadialMode, **kw) -> float:
    """Robin boundary residual ``F'(R) + alpha F(R)`` of the trial profile."""
    prof = integrate_radial(mode, **kw)
    return prof.end_deriv + mode.alpha * prof.end_value


@dataclass
class BallEigenpair:
    eigenvalue: float
    profile: RadialProfile
    residual: float
    stats: dict


def _check_alpha(alpha):
    if not math.isfinite(alpha):
        raise UnsupportedParameterError("alpha must be finite")
    if alpha > 0:
        raise UnsupportedParameterError(f"alpha > 0 is not supported (got {alpha})")


def solve_robin_ball(ball: BallSpec, alpha: float, sector: int = 1) -> BallEigenpair:
    """First Robin eigenpair of ``ball`` in the given angular sector.

    The residual ``F'(R) + alpha F(R)`` is positive with F > 0 on (0, R] for
    every lam below the first sector eigenvalue, and by Sturm comparison this
    predicate is monotone in lam. A window ``[-max(4 alpha^2, R^-2),
    4 (l+2)^2 pi^2 / R^2]`` is widened until it brackets the switch, bisected
    on the predicate until the upper end sits between the first eigenvalue
    and the next interior zero, and then the residual is solved by Brent's
    method.
    """
    _check_alpha(alpha)
    mode0 = RadialMode(ball, 0.0, alpha, sector)
    calls = 0

    def classify(lam):
        nonlocal calls
        calls += 1
        prof = integrate_radial(RadialMode(ball, lam, alpha, sector))
        res = prof.end_deriv + alpha * prof.end_value
        positive = bool(np.all(prof.values[1:] > 0))
        return positive and res > 0, positive, res

    R, n = ball.radius, ball.dim
    lo = -max(4.0 * alpha**2, 1.0 / R**2)
    for _ in range(80):
        if classify(lo)[0]:
            break
        lo *= 2.0
    else:
        raise BracketError(f"no lower bracket for sector {sector} (last lam={lo})")
    hi = 4.0 * (sector + 2) ** 2 * math.pi**2 / R**2 + (n - 1) ** 2 * max(-ball.kappa, 0.0) / 4
    for _ in range(80):
        below, positive, res = classify(hi)
        if not below:
            break
        lo = hi
        hi *= 2.0
    else:
        raise BracketError(f"no upper bracket for sector {sector} (last lam={hi})")
    while not (positive and res <= 0):
        mid = 0.5 * (lo + hi)
        below, positive_mid, res_mid = classify(mid)
        if below:
            lo = mid
        else:
            hi, positive, res = mid, positive_mid, res_mid
        if hi - lo < LAMBDA_XTOL:
            break

    def f(lam):
        nonlocal calls
        calls += 1
        return shoot_residual(RadialMode(ball, lam, alpha, sector))

    lam, info = optimize.brentq(f, lo, hi, xtol=LAMBDA_XTOL, rtol=4 * np.finfo(float).eps,
                                full_output=True)
    prof = integrate_radial(RadialMode(ball, lam, alpha, sector))
    residual = prof.end_deriv + alpha * prof.end_value
    stats = {
        "sector": mode0.sector,
        "integrations": calls + 1,
        "brent_iterations": info.iterations,
        "bracket": [lo, hi],
    }
    return BallEigenpair(float(lam), prof, float(residual), stats)


def robin_eigenvalue_ball(ball: BallSpec, alpha: float, sector: int = 1) -> float:
    """lambda_{2,alpha} (sector 1) or lambda_{1,alpha} (sector 0) of the ball."""
    return solve_robin_ball(ball, alpha, sector).eigenvalue


def steklov_ball(ball: BallSpec) -> float:
    """First nonzero Steklov eigenvalue ``F'(R)/F(R)`` of the harmonic l=1 profile."""
    prof = integrate_radial(RadialMode(ball, 0.0, 0.0, 1))
    return prof.end_deriv / prof.end_value


def rayleigh_radial(v: RadialProfile, ball: BallSpec, alpha: float) -> float:
    """One-dimensional Rayleigh quotient of the l=1 sector.

    ``(int (v'^2 + (n-1) v^2/sn^2) sn^(n-1) + alpha v(R)^2 sn(R)^(n-1))
    / int v^2 sn^(n-1)``, by composite Simpson on ``v.grid``.
    """
    t = np.asarray(v.grid, dtype=float)
    vals = np.asarray(v.values, dtype=float)
    dv = v.derivs if v.derivs is not None else np.gradient(vals, t, edge_order=2)
    n, kappa = ball.dim, ball.kappa
    s = np.asarray(spaceform.sn(kappa, t))
    w = s ** (n - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        pot = np.where(t > 0, (n - 1) * vals**2 * s ** (n - 3), 0.0)
    num = integrate.simpson(dv**2 * w + pot, x=t)
    num += alpha * vals[-1] ** 2 * spaceform.sn(kappa, t[-1]) ** (n - 1)
    den = integrate.simpson(vals**2 * w, x=t)
    if den == 0:
        raise ZeroDivisionError("v vanishes identically")
    return float(num / den)
