"""End-to-end checks of the ball comparison and shape-optimization inequalities."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from . import spaceform
from .errors import BracketError, SolverError
from .fem2d import (
    Mesh2D,
    assemble,
    domain_volume,
    edge_quadrature,
    interpolate_p1,
    robin_eigs_fem,
    triangle_quadrature,
)
from .profile import ExtendedProfile, extend_profile, h_value
from .radial import robin_eigenvalue_ball, steklov_ball
from .spaceform import BallSpec

QUAD_DEGREE = 5
EDGE_POINTS = 5
COM_DAMPING = 0.5
COM_MAX_ITER = 200
COM_TOL = 1e-8


# --- closed-form geometry of the disk models ---------------------------------

def _to_complex(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0] + 1j * x[..., 1]


def polar_about(kappa: float, p, x):
    """Geodesic distance r_p(x) and the unit vector exp_p^{-1}(x)/r_p.

    The unit vector is returned as complex numbers in the orthonormal frame
    at p aligned with the model axes. For kappa < 0 the point p is moved to
    the origin by a Mobius isometry of the scaled Poincare disk.
    """
    z = _to_complex(x)
    a = complex(p[0], p[1])
    if kappa == 0:
        y = z - a
        r = np.abs(y)
        return r, y / np.where(r > 0, r, 1.0), y
    s = math.sqrt(-kappa)
    a *= s
    y = (s * z - a) / (1.0 - np.conj(a) * s * z)
    m = np.abs(y)
    r = 2.0 * np.arctanh(m) / s
    return r, y / np.where(m > 0, m, 1.0), y


def _chart_inverse(kappa: float, p, w: complex):
    """Point whose centred chart coordinate about p is w (inverse of polar_about's y)."""
    a = complex(p[0], p[1])
    if kappa == 0:
        z = w + a
        return np.array([z.real, z.imag])
    s = math.sqrt(-kappa)
    a *= s
    z = (w + a) / (1.0 + np.conj(a) * w) / s
    return np.array([z.real, z.imag])


@dataclass
class _Quad:
    pts: np.ndarray
    dmu: np.ndarray
    bary: np.ndarray
    epts: np.ndarray
    dA: np.ndarray


def _quadrature(mesh: Mesh2D) -> _Quad:
    pts, w, bary = triangle_quadrature(mesh, QUAD_DEGREE)
    dmu = w * spaceform.conformal_factor(mesh.kappa, pts) ** 2
    epts, ew, _ = edge_quadrature(mesh, EDGE_POINTS)
    dA = ew * spaceform.conformal_factor(mesh.kappa, epts)
    return _Quad(pts, dmu, bary, epts, dA)


# --- center of mass ------------------------------------------------------------

@dataclass
class CenterOfMass:
    point: np.ndarray
    residual: float
    iterations: int


def moment_vector(mesh: Mesh2D, u1, profile: ExtendedProfile, p, quad: _Quad | None = None):
    """``X(p) = int F(r_p) exp_p^{-1}(x)/r_p u1 dmu`` and its scale ``int F u1 dmu``."""
    q = quad or _quadrature(mesh)
    u = interpolate_p1(mesh, np.asarray(u1, dtype=float), q.bary)
    r, e, _ = polar_about(mesh.kappa, p, q.pts)
    f = profile(r)
    wts = f * u * q.dmu
    X = np.sum(wts * e)
    return np.array([X.real, X.imag]), float(np.sum(np.abs(wts)))


def center_of_mass(mesh: Mesh2D, u1, profile: ExtendedProfile, start=None,
                   damping: float = COM_DAMPING, max_iter: int = COM_MAX_ITER,
                   tol: float = COM_TOL) -> CenterOfMass:
    """Point p with ``X(p) = 0`` by damped Weiszfeld-type iteration.

    In the chart centred at p the zero of X is a fixed point of the weighted
    mean of chart coordinates with weights ``F(r_p) u1 / |y|``; each step
    moves p a fraction ``damping`` of the way there.
    """
    q = _quadrature(mesh)
    u = interpolate_p1(mesh, np.asarray(u1, dtype=float), q.bary)
    if np.sum(u * q.dmu) < 0:
        u = -u
    if start is None:
        zc = np.sum(_to_complex(q.pts) * u * q.dmu) / np.sum(u * q.dmu)
        start = (zc.real, zc.imag)
    p = np.asarray(start, dtype=float)
    res = math.inf
    for it in range(1, max_iter + 1):
        r, e, y = polar_about(mesh.kappa, p, q.pts)
        f = profile(r)
        wts = f * u * q.dmu
        X = np.sum(wts * e)
        res = abs(X) / np.sum(np.abs(wts))
        if res <= tol:
            return CenterOfMass(p, float(res), it)
        with np.errstate(divide="ignore", invalid="ignore"):
            ww = np.where(np.abs(y) > 0, wts / np.abs(y), 0.0)
        m = np.sum(ww * y) / np.sum(ww)
        p = _chart_inverse(mesh.kappa, p, damping * m)
    raise SolverError("center-of-mass iteration did not converge",
                      {"last_residual": float(res), "point": p.tolist()})


# --- inequality chain ------------------------------------------------------------

@dataclass
class ChainReport:
    applicable: bool
    alpha: float
    lambda2_omega: float = math.nan
    quotient_test: float = math.nan
    quotient_h: float = math.nan
    quotient_ball: float = math.nan
    lambda2_ball: float = math.nan
    sigma1_ball: float = math.nan
    ball_radius: float = math.nan
    center: tuple = (math.nan, math.nan)
    test_residual: float = math.nan
    mesh_error_bound: float = math.nan
    notes: list = field(default_factory=list)

    @property
    def chain(self) -> list[float]:
        return [self.lambda2_omega, self.quotient_test, self.quotient_h, self.quotient_ball]

    @property
    def margins(self) -> list[float]:
        """Consecutive differences; non-negative when the chain holds."""
        c = self.chain
        return [c[i + 1] - c[i] for i in range(3)]

    @property
    def equality_gap(self) -> float:
        return abs(self.quotient_ball - self.lambda2_ball)

    def holds(self, rel_slack: float = 1e-6, mesh_slack: float = 0.0) -> bool:
        slack = rel_slack * abs(self.lambda2_ball)
        m = self.margins
        return (m[0] >= -(slack + mesh_slack) and m[1] >= -slack and m[2] >= -slack
                and self.equality_gap <= max(slack, 1e-12))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["margins"] = self.margins
        return d


def _ball_quotient(profile: ExtendedProfile, panels: int = 400, order: int = 8) -> float:
    """int_0^R H sn^{n-1} / int_0^R F^2 sn^{n-1} by composite Gauss-Legendre."""
    R = profile.radius
    n, kappa = profile.ball.dim, profile.ball.kappa
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, R, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    r = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wr = (half[:, None] * w[None, :]).ravel()
    vol = np.asarray(spaceform.sn(kappa, r)) ** (n - 1)
    f = profile(r)
    return float(np.sum(h_value(profile, r) * vol * wr) / np.sum(f**2 * vol * wr))


def mesh_error_estimate(mesh: Mesh2D, scale: float) -> float:
    """A-priori O(h^2) error scale used as slack where FEM meets exact values.

    ``h`` is the intrinsic edge length: the model-coordinate target size times
    the largest conformal factor on the mesh (1 for flat meshes).
    """
    if mesh.h is not None:
        h = mesh.h * float(np.max(spaceform.conformal_factor(mesh.kappa, mesh.vertices)))
    else:
        h = math.sqrt(domain_volume(mesh) / len(mesh.triangles))
    return 3.0 * h * h * max(1.0, abs(scale))


def inequality_chain(mesh: Mesh2D, alpha: float, fem=None) -> ChainReport:
    """Evaluate ``lambda_2(Omega) <= Q_test <= Q_H <= Q_ball = lambda_2(Omega*)``.

    ``Q_test`` is the averaged Rayleigh quotient of the test functions
    ``F(r_p) psi_i``; ``Q_H`` trades the boundary term for the divergence of
    ``F^2 grad r_p``, giving the H-quotient over Omega; ``Q_ball`` is the same
    H-quotient over the equal-volume ball. Only planar meshes are handled.
    """
    kappa = mesh.kappa
    q = _quadrature(mesh)
    vol = float(np.sum(q.dmu))
    R = spaceform.radius_for_volume(kappa, 2, vol)
    ball = BallSpec(kappa, 2, R)
    sigma = steklov_ball(ball)
    rep = ChainReport(applicable=kappa <= 0 and -sigma <= alpha <= 0, alpha=alpha,
                      sigma1_ball=sigma, ball_radius=R)
    if not rep.applicable:
        rep.notes.append("alpha outside [-sigma_1(ball), 0] or kappa > 0")
        return rep

    profile = extend_profile(ball, alpha)
    fem = fem or robin_eigs_fem(mesh, alpha, k=2, system=assemble(mesh))
    u1 = fem.eigenvectors[:, 0]
    com = center_of_mass(mesh, u1, profile)

    r, _, _ = polar_about(kappa, com.point, q.pts)
    r = np.maximum(r, 1e-300)
    f, df = profile.evaluate(r)
    s = np.asarray(spaceform.sn(kappa, r))
    mass = np.sum(f**2 * q.dmu)
    energy = np.sum((df**2 + f**2 / s**2) * q.dmu)
    rb, _, _ = polar_about(kappa, com.point, q.epts)
    boundary = np.sum(profile(rb) ** 2 * q.dA)
    rep.lambda2_omega = float(fem.eigenvalues[1])
    rep.quotient_test = float((energy + alpha * boundary) / mass)
    rep.quotient_h = float(np.sum(h_value(profile, r) * q.dmu) / mass)
    rep.quotient_ball = _ball_quotient(profile)
    rep.lambda2_ball = profile.eigenvalue
    rep.center = tuple(float(c) for c in com.point)
    rep.test_residual = com.residual
    rep.mesh_error_bound = mesh_error_estimate(mesh, rep.lambda2_ball)
    return rep


# --- sweeps ---------------------------------------------------------------------

@dataclass
class ComparisonRow:
    kappa: float
    dim: int
    radius: float
    alpha: float
    lambda2: float


def _lambda2_cell(args):
    kappa, n, R, a = args
    return robin_eigenvalue_ball(BallSpec(kappa, n, R), a, 1)


def comparison_sweep(radius: float, dim: int, alphas, kappas, workers: int | None = None):
    """lambda_{2,alpha}(B_kappa(R)) on an (alpha, kappa) grid.

    Returns ``(rows, violations)``; a violation is a consecutive pair along a
    row of increasing kappa where the eigenvalue decreases, reported as
    ``(alpha, kappa_lo, kappa_hi, drop)``.
    """
    kappas = sorted(float(k) for k in kappas)
    if any(k > 0 for k in kappas):
        raise ValueError("comparison sweep uses kappa <= 0")
    cells = [(k, dim, radius, float(a)) for a in alphas for k in kappas]
    if any(a > 0 for a in alphas):
        raise ValueError("comparison sweep uses alpha <= 0")
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            values = list(ex.map(_lambda2_cell, cells))
    else:
        values = [_lambda2_cell(c) for c in cells]
    rows = [ComparisonRow(k, n, R, a, v) for (k, n, R, a), v in zip(cells, values)]
    violations = []
    nk = len(kappas)
    for i in range(0, len(rows), nk):
        row = rows[i:i + nk]
        for lo, hi in zip(row, row[1:]):
            if hi.lambda2 < lo.lambda2:
                violations.append((lo.alpha, lo.kappa, hi.kappa, lo.lambda2 - hi.lambda2))
    return rows, violations


@dataclass
class ShapeRow:
    label: str
    kappa: float
    alpha: float
    volume: float
    ball_radius: float
    sigma1_ball: float
    lambda2_omega: float
    lambda2_ball: float
    applicable: bool

    @property
    def gap(self) -> float:
        return self.lambda2_ball - self.lambda2_omega


def shape_opt_sweep(family, alphas) -> list[ShapeRow]:
    """Compare lambda_2 of each ``(label, mesh)`` with its equal-volume ball.

    Rows whose alpha falls outside ``[-sigma_1(Omega*), 0]`` are marked not
    applicable but still computed.
    """
    rows = []
    for label, mesh in family:
        system = assemble(mesh)
        vol = domain_volume(mesh, QUAD_DEGREE)
        R = spaceform.radius_for_volume(mesh.kappa, 2, vol)
        ball = BallSpec(mesh.kappa, 2, R)
        sigma = steklov_ball(ball)
        for a in alphas:
            lam_o = float(robin_eigs_fem(mesh, a, k=2, system=system).eigenvalues[1])
            lam_b = robin_eigenvalue_ball(ball, a, 1)
            rows.append(ShapeRow(label, mesh.kappa, float(a), vol, R, sigma, lam_o, lam_b,
                                 -sigma <= a <= 0))
    return rows


def steklov_via_robin_root(ball: BallSpec) -> float:
    """sigma_1 as minus the root alpha_0 of alpha -> lambda_{2,alpha}(ball)."""
    sigma = steklov_ball(ball)

    def f(a):
        return robin_eigenvalue_ball(ball, a, 1)

    lo, hi = -1.5 * sigma, 0.0
    flo, fhi = f(lo), f(hi)
    if not (flo < 0 < fhi):
        raise BracketError(f"lambda_2 does not change sign on [{lo}, {hi}]")
    a0 = optimize.brentq(f, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    return -a0


@dataclass
class SectorOrderReport:
    kappa: float
    radius: float
    alpha: float
    radial_l1: float
    fem: tuple
    bound: float

    @property
    def ordered(self) -> bool:
        """True if the FEM pair lambda_2 = lambda_3 matches the l = 1 radial value.

        If some other sector sat below the l = 1 branch, the FEM lambda_2 would
        undershoot it, or the degenerate pair lambda_2 = lambda_3 would split.
        """
        return all(abs(v - self.radial_l1) <= self.bound for v in self.fem[1:3])


def sector_order_check(kappa: float, radius: float, alpha: float, h: float = 0.04) -> SectorOrderReport:
    """FEM cross-check that lambda_2 of a 2-D geodesic disk is the l = 1 radial value.

    The eigenfunctions ``F(r) psi_i`` are taken as the second eigenfunctions;
    this compares the three lowest FEM eigenvalues of a disk mesh with the
    radial ``l = 1`` value so that configurations where the ordering fails
    are flagged rather than assumed away.
    """
    from .shapes import disk_mesh  # shapes imports fem2d only; local import keeps verify light

    mesh = disk_mesh(kappa, radius, h)
    lam = robin_eigs_fem(mesh, alpha, k=3).eigenvalues
    radial = robin_eigenvalue_ball(BallSpec(kappa, 2, radius), alpha, 1)
    return SectorOrderReport(kappa, radius, float(alpha), radial, tuple(float(v) for v in lam),
                             mesh_error_estimate(mesh, radial))
