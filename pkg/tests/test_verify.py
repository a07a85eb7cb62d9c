import math

import numpy as np
import pytest

from robinlab.errors import SolverError
from robinlab.fem2d import Mesh2D, domain_volume, robin_eigs_fem
from robinlab.profile import extend_profile
from robinlab.radial import steklov_ball
from robinlab.shapes import disk_mesh, ellipse_mesh, perturbed_disk_mesh
from robinlab.spaceform import BallSpec, radius_for_volume
from robinlab.verify import (
    _chart_inverse,
    center_of_mass,
    comparison_sweep,
    inequality_chain,
    mesh_error_estimate,
    moment_vector,
    polar_about,
    sector_order_check,
    shape_opt_sweep,
    steklov_via_robin_root,
)


def _com(mesh, alpha=-0.3, **kw):
    R = radius_for_volume(mesh.kappa, 2, domain_volume(mesh, 5))
    prof = extend_profile(BallSpec(mesh.kappa, 2, R), alpha)
    u1 = robin_eigs_fem(mesh, alpha).eigenvectors[:, 0]
    return center_of_mass(mesh, u1, prof, tol=1e-13, **kw), u1, prof


# --- closed-form geometry ----------------------------------------------------------------

def test_polar_flat():
    r, e, _ = polar_about(0.0, (1.0, 1.0), np.array([[4.0, 5.0]]))
    assert r[0] == pytest.approx(5.0)
    assert e[0] == pytest.approx(0.6 + 0.8j)


def test_polar_hyperbolic_distance_formula():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = rng.uniform(-0.4, 0.4, 2)
        x = rng.uniform(-0.4, 0.4, 2)
        r, e, y = polar_about(-1.0, p, x[None, :])
        # distance in the Poincare disk: arccosh(1 + 2|x-p|^2 / ((1-|x|^2)(1-|p|^2)))
        d = math.acosh(1 + 2 * np.sum((x - p) ** 2) / ((1 - x @ x) * (1 - p @ p)))
        assert r[0] == pytest.approx(d, rel=1e-12)
        assert abs(e[0]) == pytest.approx(1.0)
        np.testing.assert_allclose(_chart_inverse(-1.0, p, y[0]), x, atol=1e-14)


def test_polar_scaled_curvature():
    # curvature -4 distances are half of the curvature -1 distances of the scaled points
    p, x = np.array([0.1, 0.05]), np.array([[0.2, -0.15]])
    r4, _, _ = polar_about(-4.0, p, x)
    r1, _, _ = polar_about(-1.0, 2 * p, 2 * x)
    assert r4[0] == pytest.approx(r1[0] / 2, rel=1e-13)


# --- center of mass --------------------------------------------------------------------

def test_center_of_mass_centered_disk():
    com, _, _ = _com(disk_mesh(0.0, 1.0, 0.04))
    assert np.linalg.norm(com.point) < 1e-8


def test_center_of_mass_centered_hyperbolic_disk():
    com, _, _ = _com(disk_mesh(-1.0, 1.0, 0.03), alpha=-0.4)
    assert np.linalg.norm(com.point) < 1e-8


def test_center_of_mass_centered_ellipse():
    com, _, _ = _com(ellipse_mesh(1.3, 0.7, 0.04))
    assert np.linalg.norm(com.point) < 1e-8


def test_center_of_mass_translation_equivariant():
    base = disk_mesh(0.0, 1.0, 0.04)
    c = np.array([0.37, -0.81])
    moved = Mesh2D(base.vertices + c, base.triangles, base.boundary_edges)
    com0, _, _ = _com(base)
    com1, _, _ = _com(moved)
    np.testing.assert_allclose(com1.point - c, com0.point, atol=1e-8)
    np.testing.assert_allclose(com1.point, c, atol=1e-8)


def test_center_of_mass_residual_and_start():
    mesh = perturbed_disk_mesh(-1.0, 1.0, 0.2, 3, 0.03)
    com, u1, prof = _com(mesh, alpha=-0.4, start=(0.05, -0.03))
    X, scale = moment_vector(mesh, u1, prof, com.point)
    assert np.linalg.norm(X) <= 1e-12 * scale
    assert com.residual <= 1e-13


def test_center_of_mass_nonconvergence_reported():
    mesh = ellipse_mesh(1.3, 0.7, 0.08)
    R = radius_for_volume(0.0, 2, domain_volume(mesh, 5))
    prof = extend_profile(BallSpec(0.0, 2, R), 0.0)
    u1 = robin_eigs_fem(mesh, 0.0).eigenvectors[:, 0]
    with pytest.raises(SolverError) as info:
        center_of_mass(mesh, u1, prof, start=(0.3, 0.2), max_iter=2, tol=1e-15)
    assert "last_residual" in info.value.diagnostics


# --- inequality chain -------------------------------------------------------------------

@pytest.fixture(scope="module")
def ellipse14():
    return ellipse_mesh(1.4, 1 / 1.4, 0.03)


def test_chain_ellipse_strict(ellipse14):
    rep = inequality_chain(ellipse14, 0.0)
    assert rep.applicable
    assert rep.holds(rel_slack=1e-6)
    assert rep.quotient_ball - rep.lambda2_omega > 0.1
    assert rep.equality_gap < 1e-8
    d = rep.as_dict()
    assert d["margins"] == rep.margins and d["alpha"] == 0.0


def test_chain_perturbed_hyperbolic():
    mesh = perturbed_disk_mesh(-1.0, 1.0, 0.1, 3, 0.02)
    rep = inequality_chain(mesh, -0.5)
    assert rep.applicable
    assert rep.holds(rel_slack=1e-6)
    assert rep.test_residual <= 1e-8


def test_chain_disk_equality_case():
    mesh = disk_mesh(0.0, 1.0, 0.03)
    rep = inequality_chain(mesh, -0.3)
    bound = rep.mesh_error_bound
    assert max(abs(m) for m in rep.margins) <= bound
    assert rep.equality_gap <= bound
    assert abs(rep.lambda2_omega - rep.lambda2_ball) <= bound


def test_chain_not_applicable(ellipse14):
    sigma = steklov_ball(BallSpec(0.0, 2, radius_for_volume(0.0, 2, domain_volume(ellipse14, 5))))
    rep = inequality_chain(ellipse14, -1.2 * sigma)
    assert not rep.applicable and rep.notes
    assert math.isnan(rep.lambda2_omega)


def test_mesh_error_estimate_scaling():
    m = disk_mesh(0.0, 1.0, 0.04)
    assert mesh_error_estimate(m, 3.0) == pytest.approx(3 * 0.04**2 * 3.0)
    assert mesh_error_estimate(m, 0.1) == pytest.approx(3 * 0.04**2)


# --- sweeps -----------------------------------------------------------------------------

def test_comparison_sweep_examples():
    rows, viol = comparison_sweep(1.0, 2, [0.0], [-2.0, -1.0, 0.0])
    assert not viol
    assert [r.kappa for r in rows] == [-2.0, -1.0, 0.0]
    rows, viol = comparison_sweep(1.0, 3, [-0.5], [0.0, -1.0, -2.0])
    assert not viol
    vals = [r.lambda2 for r in rows]
    assert vals == sorted(vals)


def test_comparison_sweep_constant_row():
    rows, viol = comparison_sweep(1.0, 2, [-0.2], [-1.0, -1.0, -1.0])
    assert not viol
    assert len({r.lambda2 for r in rows}) == 1


def test_comparison_sweep_parallel_matches_serial():
    args = (0.8, 2, [-0.5, 0.0], [-1.0, 0.0])
    serial, _ = comparison_sweep(*args)
    parallel, _ = comparison_sweep(*args, workers=2)
    assert [r.lambda2 for r in serial] == [r.lambda2 for r in parallel]


def test_comparison_sweep_rejects_bad_input():
    with pytest.raises(ValueError):
        comparison_sweep(1.0, 2, [0.0], [0.5])
    with pytest.raises(ValueError):
        comparison_sweep(1.0, 2, [0.1], [0.0])


def test_shape_opt_gap_shrinks_towards_disk():
    family = []
    for aspect in (1.0, 1.2, 1.5):
        a, b = math.sqrt(aspect), 1 / math.sqrt(aspect)
        family.append((f"{aspect}", ellipse_mesh(a, b, 0.04)))
    rows = shape_opt_sweep(family, [0.0])
    gaps = [r.gap for r in rows]
    assert abs(gaps[0]) <= mesh_error_estimate(family[0][1], rows[0].lambda2_ball)
    assert gaps[0] < gaps[1] < gaps[2]
    assert all(r.lambda2_omega < 3.390 for r in rows[1:])


def test_shape_opt_hyperbolic_member():
    mesh = perturbed_disk_mesh(-1.0, 1.0, 0.15, 2, 0.02)
    (row,) = shape_opt_sweep([("p", mesh)], [-0.4])
    assert row.applicable
    assert row.lambda2_omega < row.lambda2_ball


def test_shape_opt_marks_out_of_range_alpha():
    mesh = ellipse_mesh(1.2, 1 / 1.2, 0.08)
    rows = shape_opt_sweep([("e", mesh)], [-2.0, 0.0])
    assert [r.applicable for r in rows] == [False, True]


# --- Steklov via the zero of lambda_2 ----------------------------------------------------------

@pytest.mark.parametrize("kappa,n,R,expected", [
    (0.0, 2, 1.0, 1.0),
    (0.0, 4, 0.5, 2.0),
    (-1.0, 2, 1.0, 1 / math.sinh(1.0)),
])
def test_steklov_via_robin_root(kappa, n, R, expected):
    assert steklov_via_robin_root(BallSpec(kappa, n, R)) == pytest.approx(expected, abs=1e-8)


def test_steklov_monotone_in_curvature():
    vals = [steklov_ball(BallSpec(k, 2, 1.0)) for k in (-3.0, -1.0, -0.2, 0.0)]
    assert np.all(np.diff(vals) > 0)


# --- sector ordering of the second eigenvalue --------------------------------------------

@pytest.mark.parametrize("kappa,alpha", [(0.0, 0.0), (-1.0, -0.5), (-3.0, -2.0), (0.0, -1.0)])
def test_sector_order_l1_is_second(kappa, alpha):
    rep = sector_order_check(kappa, 1.0, alpha, h=0.05)
    assert rep.ordered
    # conforming P1 eigenvalues are upper bounds
    assert rep.fem[1] >= rep.radial_l1 - 1e-10


def test_sector_order_flags_split_pair():
    rep = sector_order_check(0.0, 1.0, 0.0, h=0.08)
    bad = type(rep)(rep.kappa, rep.radius, rep.alpha, rep.radial_l1,
                    (rep.fem[0], rep.radial_l1 - 2 * rep.bound, rep.fem[2]), rep.bound)
    assert not bad.ordered


def test_mesh_error_estimate_uses_intrinsic_size():
    hyp = disk_mesh(-1.0, 1.0, 0.04)
    rho_max = 2 / (1 - math.tanh(0.5) ** 2)
    assert mesh_error_estimate(hyp, 1.0) == pytest.approx(3 * (0.04 * rho_max) ** 2, rel=1e-3)
