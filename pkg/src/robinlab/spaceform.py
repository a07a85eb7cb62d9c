"""Constant-curvature geometry: generalized sine, volume elements, ball volumes.

All functions accept scalar ``t`` or numpy arrays. ``kappa`` is the sectional
curvature of the model space form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.special import gamma

from .errors import DomainError

# below this |kappa| the closed forms lose digits to cancellation
KAPPA_SERIES_CUTOFF = 1e-10
_N_SERIES = 8
# the truncated series is used only while |kappa| t^2 stays small
SERIES_ARG_MAX = 1e-2


@dataclass(frozen=True)
class BallSpec:
    """Geodesic ball of radius ``radius`` in the ``dim``-dimensional space form
    of curvature ``kappa``."""

    kappa: float
    dim: int
    radius: float

    def __post_init__(self):
        if not math.isfinite(self.kappa):
            raise DomainError(f"kappa must be finite, got {self.kappa!r}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"dim must be an integer >= 2, got {self.dim!r}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"radius must be positive, got {self.radius!r}")
        if self.kappa > 0 and self.radius >= math.pi / math.sqrt(self.kappa):
            raise DomainError(
                f"radius {self.radius} exceeds the injectivity radius pi/sqrt(kappa)"
            )


def _check_t(kappa, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    if kappa > 0 and np.any(t > math.pi / math.sqrt(kappa) * (1 + 1e-15)):
        raise DomainError("t exceeds pi/sqrt(kappa) on the sphere")
    return t


def _series(kappa, t, odd):
    # sum_m (-kappa)^m t^(2m+1)/(2m+1)!  (odd)  or  t^(2m)/(2m)!  (even)
    out = np.zeros_like(t)
    term = t.copy() if odd else np.ones_like(t)
    k = 1 if odd else 0
    for _ in range(_N_SERIES):
        out = out + term
        term = term * (-kappa) * t * t / ((k + 1) * (k + 2))
        k += 2
    return out


def sn(kappa: float, t):
    """Generalized sine: solution of f'' + kappa f = 0, f(0)=0, f'(0)=1."""
    t = _check_t(kappa, t)
    if kappa == 0:
        out = t.copy()
    elif kappa > 0:
        s = math.sqrt(kappa)
        out = np.sin(s * t) / s
    else:
        s = math.sqrt(-kappa)
        out = np.sinh(s * t) / s
    if 0 < abs(kappa) < KAPPA_SERIES_CUTOFF:
        out = np.where(abs(kappa) * t * t < SERIES_ARG_MAX, _series(kappa, t, odd=True), out)
    return out if out.ndim else float(out)


def sn_prime(kappa: float, t):
    """Derivative of :func:`sn` in t."""
    t = _check_t(kappa, t)
    if kappa == 0:
        out = np.ones_like(t)
    elif kappa > 0:
        out = np.cos(math.sqrt(kappa) * t)
    else:
        out = np.cosh(math.sqrt(-kappa) * t)
    if 0 < abs(kappa) < KAPPA_SERIES_CUTOFF:
        out = np.where(abs(kappa) * t * t < SERIES_ARG_MAX, _series(kappa, t, odd=False), out)
    return out if out.ndim else float(out)


def sn_second(kappa: float, t):
    """Second derivative of :func:`sn`; equals ``-kappa * sn``."""
    out = -kappa * np.asarray(sn(kappa, t))
    return out if out.ndim else float(out)


def cot_ratio(kappa: float, t):
    """``sn'(t)/sn(t)``, the mean curvature of the geodesic sphere of radius t.

    Strictly decreasing in t and asymptotic to 1/t as t -> 0+.
    """
    tt = np.asarray(t, dtype=float)
    if np.any(tt <= 0):
        raise DomainError("cot_ratio is undefined at t <= 0")
    if abs(kappa) >= KAPPA_SERIES_CUTOFF and kappa < 0:
        s = math.sqrt(-kappa)
        out = s / np.tanh(s * tt)
        return out if out.ndim else float(out)
    out = np.asarray(sn_prime(kappa, tt)) / np.asarray(sn(kappa, tt))
    return out if out.ndim else float(out)


def sphere_area(dim: int) -> float:
    """Area of the unit (dim-1)-sphere in R^dim."""
    return 2.0 * math.pi ** (dim / 2) / gamma(dim / 2)


def ball_volume(b: BallSpec) -> float:
    """Riemannian volume of the geodesic ball ``b``."""
    n = b.dim
    if b.kappa == 0:
        return sphere_area(n) * b.radius**n / n
    val, _ = integrate.quad(
        lambda t: sn(b.kappa, t) ** (n - 1), 0.0, b.radius, epsabs=1e-12, epsrel=1e-13, limit=200
    )
    return sphere_area(n) * val


def ball_area(b: BallSpec) -> float:
    """Area of the geodesic sphere bounding ``b``."""
    return sphere_area(b.dim) * sn(b.kappa, b.radius) ** (b.dim - 1)


def total_sphere_volume(kappa: float, dim: int) -> float:
    """Volume of the whole round sphere of curvature ``kappa > 0``."""
    if kappa <= 0:
        return math.inf
    # unit dim-sphere has area sphere_area(dim + 1); lengths scale by kappa^{-1/2}
    log_vol = math.log(sphere_area(dim + 1)) - 0.5 * dim * math.log(kappa)
    return math.exp(log_vol) if log_vol < 700 else math.inf


def radius_for_volume(kappa: float, dim: int, volume: float) -> float:
    """Radius of the geodesic ball with the given volume."""
    if not volume > 0:
        raise DomainError(f"volume must be positive, got {volume!r}")
    if kappa == 0:
        return (volume * dim / sphere_area(dim)) ** (1.0 / dim)
    if kappa > 0 and volume >= total_sphere_volume(kappa, dim):
        raise DomainError("volume is not reachable by a ball in the sphere of this curvature")

    def f(r):
        return ball_volume(BallSpec(kappa, dim, r)) - volume

    flat = (volume * dim / sphere_area(dim)) ** (1.0 / dim)
    if kappa > 0:
        # the flat radius underestimates the spherical one
        cap = math.pi / math.sqrt(kappa) * (1 - 1e-14)
        hi = min(flat, cap)
        while f(hi) < 0 and hi < cap:
            hi = min(2 * hi, cap)
    else:
        # ... and overestimates the hyperbolic one
        hi = flat
        while f(hi) < 0:
            hi *= 2
    return optimize.brentq(f, 0.0 + 1e-300, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def model_radius(kappa: float, geodesic_radius):
    """Euclidean radius in the conformal disk model of a geodesic radius.

    For ``kappa < 0`` the model metric is ``4|dx|^2 / (1 + kappa|x|^2)^2``; for
    ``kappa == 0`` the model is the Euclidean plane itself.
    """
    if kappa > 0:
        raise DomainError("only kappa <= 0 has a disk model here")
    if kappa == 0:
        return geodesic_radius
    s = math.sqrt(-kappa)
    return np.tanh(s * np.asarray(geodesic_radius) / 2) / s


def geodesic_radius(kappa: float, model_r):
    """Inverse of :func:`model_radius`."""
    if kappa > 0:
        raise DomainError("only kappa <= 0 has a disk model here")
    if kappa == 0:
        return model_r
    s = math.sqrt(-kappa)
    return 2.0 * np.arctanh(s * np.asarray(model_r)) / s


def conformal_factor(kappa: float, x):
    """Conformal factor rho(x) with g = rho^2 |dx|^2 on the disk model.

    ``x`` has shape (..., 2). ``rho`` is identically 1 for ``kappa == 0``.
    """
    x = np.asarray(x, dtype=float)
    if kappa == 0:
        return np.ones(x.shape[:-1])
    return 2.0 / (1.0 + kappa * np.sum(x * x, axis=-1))
