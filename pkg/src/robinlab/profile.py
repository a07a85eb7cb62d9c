"""Extended ball profile F on [0, inf) and the monotone potential H.

Inside the comparison ball F is the l=1 Robin profile; outside it continues
as ``F(R) exp(-alpha (r - R))``, which is C^1 at R because F'(R) = -alpha F(R).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spaceform
from .radial import RadialProfile, solve_robin_ball, steklov_ball
from .spaceform import BallSpec

GRID_POINTS = 10_000
JUNCTION_RTOL = 1e-9


@dataclass
class ExtendedProfile:
    ball: BallSpec
    alpha: float
    eigenvalue: float
    inner: RadialProfile
    scale: float = 1.0

    @property
    def radius(self) -> float:
        return self.ball.radius

    @property
    def end_value(self) -> float:
        return self.scale * self.inner.end_value

    def scaled(self, factor: float) -> "ExtendedProfile":
        return ExtendedProfile(self.ball, self.alpha, self.eigenvalue, self.inner, self.scale * factor)

    def normalized(self) -> "ExtendedProfile":
        """Copy scaled so that F(R) = 1."""
        return self.scaled(1.0 / self.end_value)

    def evaluate(self, r):
        """``(F(r), F'(r))`` for any r >= 0 (vectorized)."""
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        R = self.radius
        f = np.empty_like(r)
        df = np.empty_like(r)
        inside = r <= R
        if np.any(inside):
            f[inside], df[inside] = self.inner.evaluate(r[inside])
        out = ~inside
        if np.any(out):
            fr = self.inner.end_value * np.exp(-self.alpha * (r[out] - R))
            f[out] = fr
            df[out] = -self.alpha * fr
        f *= self.scale
        df *= self.scale
        if scalar:
            return float(f[0]), float(df[0])
        return f, df

    def __call__(self, r):
        return self.evaluate(r)[0]


def extend_profile(ball: BallSpec, alpha: float) -> ExtendedProfile:
    """Solve for lambda_{2,alpha}(ball) and wrap its profile as an ExtendedProfile."""
    pair = solve_robin_ball(ball, alpha, sector=1)
    p = ExtendedProfile(ball, alpha, pair.eigenvalue, pair.profile)
    f_r, df_r = p.inner.end_value, p.inner.end_deriv
    mismatch = abs(df_r + alpha * f_r)
    if mismatch > JUNCTION_RTOL * max(abs(f_r), abs(df_r)):
        raise ArithmeticError(f"C1 junction mismatch {mismatch:.3e} at R")
    return p


def h_value(p: ExtendedProfile, r):
    """Potential ``F'^2 + (n-1) F^2/sn^2 + 2 alpha F F' + alpha (n-1) (sn'/sn) F^2``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise spaceform.DomainError("H is evaluated on r > 0 only")
    n, kappa, a = p.ball.dim, p.ball.kappa, p.alpha
    f, df = p.evaluate(r)
    s = np.asarray(spaceform.sn(kappa, r))
    c = np.asarray(spaceform.cot_ratio(kappa, r))
    out = df**2 + (n - 1) * f**2 / s**2 + 2 * a * f * df + a * (n - 1) * c * f**2
    return out if np.ndim(out) else float(out)


def clustered_grid(r0: float, r1: float, n: int = GRID_POINTS) -> np.ndarray:
    """n points on [r0, r1], geometric near r0 and roughly uniform further out."""
    # half the points geometric up to 1% of r1, the rest uniform
    k = n // 2
    knee = max(0.01 * r1, 10 * r0)
    geo = np.geomspace(r0, knee, k, endpoint=False)
    lin = np.linspace(knee, r1, n - k)
    return np.concatenate([geo, lin])


@dataclass
class ProfileBoundsReport:
    applicable: bool
    fprime_positive: bool | None
    ratio_bound: bool | None
    fprime_margin: float
    ratio_margin: float | None
    ratio_applicable: bool

    @property
    def worst_margin(self) -> float:
        ms = [self.fprime_margin] + ([self.ratio_margin] if self.ratio_margin is not None else [])
        return min(ms)


def check_profile_bounds(ball: BallSpec, alpha: float, n_points: int = GRID_POINTS) -> ProfileBoundsReport:
    """Grid check that F' > 0 on [0, R] and F'/F >= -alpha on (0, R].

    Needs alpha < 0; the ratio bound additionally needs
    ``alpha >= -2 sn'(R)/sn(R)``. Unmet hypotheses give ``None`` verdicts.
    """
    if not alpha < 0:
        return ProfileBoundsReport(False, None, None, math.nan, None, False)
    p = extend_profile(ball, alpha)
    R = ball.radius
    grid = np.linspace(0.0, R, n_points)
    f, df = p.evaluate(grid)
    fprime_margin = float(np.min(df))
    ratio_ok = bool(alpha >= -2.0 * spaceform.cot_ratio(ball.kappa, R))
    ratio_margin = None
    if ratio_ok:
        ratio = df[1:] / f[1:]
        # ratio equals -alpha at R up to the shooting residual; scale-free margin
        ratio_margin = float(np.min((ratio + alpha) / max(1.0, abs(alpha))))
    return ProfileBoundsReport(
        True,
        bool(fprime_margin > 0),
        bool(ratio_margin >= -1e-10) if ratio_ok else None,
        fprime_margin,
        ratio_margin,
        ratio_ok,
    )


@dataclass
class HMonotoneReport:
    applicable: bool
    max_forward_difference: float
    scale: float
    monotone: bool | None

    @property
    def relative_increase(self) -> float:
        return self.max_forward_difference / self.scale


def check_h_monotone(ball: BallSpec, alpha: float, r_max: float,
                     n_points: int = GRID_POINTS, tol: float = 1e-10) -> HMonotoneReport:
    """Largest forward difference of H on a clustered grid over (eps, r_max].

    Applies to kappa <= 0 and alpha in [-sigma_1(ball), 0]. The tolerance is
    relative to ``|H(eps)|``.
    """
    if ball.kappa > 0 or alpha > 0:
        return HMonotoneReport(False, math.nan, math.nan, None)
    sigma = steklov_ball(ball)
    if alpha < -sigma:
        return HMonotoneReport(False, math.nan, math.nan, None)
    p = extend_profile(ball, alpha)
    eps = 1e-6 * ball.radius
    grid = clustered_grid(eps, r_max, n_points)
    h = h_value(p, grid)
    scale = abs(h[0])
    mfd = float(np.max(np.diff(h)))
    return HMonotoneReport(True, mfd, scale, bool(mfd <= tol * scale))
