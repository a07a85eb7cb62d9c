import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robinlab.errors import DegenerateMeshError, UnsupportedParameterError
from robinlab.fem2d import (
    Mesh2D,
    assemble,
    domain_perimeter,
    domain_volume,
    inertia_below,
    read_mesh,
    refine,
    robin_eigs_fem,
    steklov_fem,
    write_mesh,
)
from robinlab.radial import robin_eigenvalue_ball
from robinlab.shapes import disk_mesh, rectangle_mesh
from robinlab.spaceform import BallSpec

ONE_TRIANGLE = dict(vertices=[[0, 0], [1, 0], [0, 1]], triangles=[[0, 1, 2]],
                    boundary_edges=[[0, 1], [1, 2], [2, 0]])


@pytest.fixture(scope="module")
def disk04():
    return disk_mesh(0.0, 1.0, 0.04)


@pytest.fixture(scope="module")
def hyp_disk():
    return disk_mesh(-1.0, 1.0, 0.02)


# --- assembly --------------------------------------------------------------------

def test_single_triangle_mass_and_kernel():
    m = Mesh2D(**ONE_TRIANGLE)
    s = assemble(m)
    one = np.ones(3)
    assert one @ s.M @ one == pytest.approx(0.5, rel=1e-15)
    np.testing.assert_allclose(s.K @ one, 0.0, atol=1e-15)
    assert one @ s.B @ one == pytest.approx(2 + math.sqrt(2), rel=1e-15)
    # classical P1 element matrices
    np.testing.assert_allclose(s.M.toarray(), (np.ones((3, 3)) + np.eye(3)) / 24, rtol=1e-14)
    np.testing.assert_allclose(s.K.toarray(), [[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]], atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_random_triangle_invariants(coords):
    p = np.array(coords).reshape(3, 2)
    area = 0.5 * ((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[1, 1] - p[0, 1]) * (p[2, 0] - p[0, 0]))
    if abs(area) < 1e-3:
        return
    tri = [[0, 1, 2]] if area > 0 else [[0, 2, 1]]
    m = Mesh2D(p, tri, [[0, 1], [1, 2], [2, 0]])
    s = assemble(m)
    one = np.ones(3)
    assert one @ s.M @ one == pytest.approx(abs(area), rel=1e-12)
    np.testing.assert_allclose(s.K @ one, 0.0, atol=1e-10 * (1 + abs(s.K).max()))
    assert np.all(np.linalg.eigvalsh(s.K.toarray()) > -1e-10)
    assert np.all(np.linalg.eigvalsh(s.M.toarray()) > 0)


def test_hyperbolic_mass_tends_to_four_times_euclidean():
    ratios = []
    for scale in (1e-1, 1e-2, 1e-3):
        v = np.array(ONE_TRIANGLE["vertices"], float) * scale
        e = assemble(Mesh2D(v, ONE_TRIANGLE["triangles"], ONE_TRIANGLE["boundary_edges"], 0.0))
        h = assemble(Mesh2D(v, ONE_TRIANGLE["triangles"], ONE_TRIANGLE["boundary_edges"], -1.0))
        u = np.array([1.0, 2.0, 3.0])
        ratios.append((u @ h.M @ u) / (u @ e.M @ u))
        # stiffness is conformally invariant
        np.testing.assert_allclose(h.K.toarray(), e.K.toarray())
    assert abs(ratios[-1] - 4.0) < 1e-5
    assert abs(ratios[2] - 4) < abs(ratios[1] - 4) < abs(ratios[0] - 4)


def test_system_properties(disk04):
    s = assemble(disk04)
    one = np.ones(disk04.n_vertices)
    assert abs(s.K - s.K.T).max() < 1e-14
    assert np.max(np.abs(s.K @ one)) < 1e-12
    assert one @ s.M @ one == pytest.approx(domain_volume(disk04), rel=1e-13)
    assert one @ s.B @ one == pytest.approx(domain_perimeter(disk04), rel=1e-13)
    interior = np.setdiff1d(np.arange(disk04.n_vertices), disk04.boundary_vertices)
    assert abs(s.B[interior]).sum() == 0


def test_degenerate_triangle_rejected():
    m = Mesh2D([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]], [[0, 1], [1, 2], [2, 0]])
    with pytest.raises(DegenerateMeshError):
        assemble(m)


# --- volumes ---------------------------------------------------------------------

def test_volumes(disk04, hyp_disk):
    assert domain_volume(disk_mesh(0.0, 1.0, 0.02)) == pytest.approx(math.pi, abs=1e-3)
    assert domain_volume(rectangle_mesh(1.0, 1.0, 0.1)) == pytest.approx(1.0, rel=1e-14)
    exact = 2 * math.pi * (math.cosh(1.0) - 1.0)
    assert domain_volume(hyp_disk) == pytest.approx(exact, abs=1e-2)
    assert domain_perimeter(hyp_disk) == pytest.approx(2 * math.pi * math.sinh(1.0), abs=1e-2)
    assert domain_perimeter(disk04) == pytest.approx(2 * math.pi, abs=1e-2)


# --- eigenproblems -----------------------------------------------------------------

def test_neumann_disk(disk04):
    res = robin_eigs_fem(disk04, 0.0, k=3)
    assert abs(res.eigenvalues[0]) < 1e-9
    assert res.eigenvalues[1] == pytest.approx(3.390, abs=1e-2)
    # the l=1 pair is double up to mesh asymmetry
    assert res.eigenvalues[2] - res.eigenvalues[1] < 1e-2
    assert np.all(res.residuals <= 1e-8)


def test_robin_disk_zero(disk04):
    res = robin_eigs_fem(disk04, -1.0)
    assert abs(res.eigenvalues[1]) < 1e-2
    assert res.eigenvalues[0] < 0


def test_square_neumann():
    side = math.sqrt(math.pi)
    res = robin_eigs_fem(rectangle_mesh(side, side, 0.05), 0.0)
    assert res.eigenvalues[1] == pytest.approx(math.pi, abs=1e-2)


def test_eigenvectors_m_orthonormal(disk04):
    s = assemble(disk04)
    res = robin_eigs_fem(disk04, -0.5, k=4, system=s)
    G = res.eigenvectors.T @ (s.M @ res.eigenvectors)
    np.testing.assert_allclose(G, np.eye(4), atol=1e-8)
    # first eigenfunction has one sign and is sign-normalized positive
    assert np.all(res.eigenvectors[:, 0] > 0)


def test_dense_and_sparse_paths_agree(disk04):
    s = assemble(disk04)
    sparse = robin_eigs_fem(disk04, -0.3, k=4, system=s, dense_threshold=0)
    dense = robin_eigs_fem(disk04, -0.3, k=4, system=s, dense_threshold=10**6)
    assert sparse.stats["method"] == "shift-invert" and dense.stats["method"] == "dense"
    np.testing.assert_allclose(sparse.eigenvalues, dense.eigenvalues, rtol=1e-10, atol=1e-12)


def test_inertia_count_matches_spectrum():
    m = disk_mesh(0.0, 1.0, 0.1)
    s = assemble(m)
    A = (s.K - 0.7 * s.B).tocsr()
    all_lam = robin_eigs_fem(m, -0.7, k=12, system=s).eigenvalues
    for sigma in (-5.0, -1.0, 0.5, 4.0, 10.0, 14.0):
        if np.min(np.abs(all_lam - sigma)) < 1e-6:
            continue
        count, _ = inertia_below(A, s.M, sigma)
        if sigma < all_lam[-1]:
            assert count == int(np.sum(all_lam < sigma))


def test_ordering_and_alpha_monotone_on_mesh(disk04):
    s = assemble(disk04)
    lam = [robin_eigs_fem(disk04, a, system=s).eigenvalues for a in (-1.5, -1.0, -0.5, 0.0)]
    assert all(l[0] < l[1] for l in lam)
    assert np.all(np.diff([l[1] for l in lam]) > 0)
    assert np.all(np.diff([l[0] for l in lam]) > 0)


def test_hyperbolic_disk_against_radial(hyp_disk):
    ball = BallSpec(-1.0, 2, 1.0)
    for alpha in (0.0, -0.4):
        fem = robin_eigs_fem(hyp_disk, alpha).eigenvalues[1]
        assert fem == pytest.approx(robin_eigenvalue_ball(ball, alpha), abs=1e-2)


def test_input_validation(disk04):
    with pytest.raises(UnsupportedParameterError):
        robin_eigs_fem(disk04, 0.5)
    with pytest.raises(ValueError):
        robin_eigs_fem(disk04, 0.0, k=1)
    with pytest.raises(UnsupportedParameterError):
        Mesh2D(np.zeros((3, 2)), [[0, 1, 2]], [[0, 1]], kappa=1.0)


# --- Steklov -----------------------------------------------------------------------

def test_steklov_disks(disk04, hyp_disk):
    assert steklov_fem(disk04).eigenvalues[0] == pytest.approx(1.0, abs=1e-2)
    assert steklov_fem(disk_mesh(0.0, 2.0, 0.08)).eigenvalues[0] == pytest.approx(0.5, abs=5e-3)
    assert steklov_fem(hyp_disk).eigenvalues[0] == pytest.approx(1 / math.sinh(1.0), abs=1e-2)


def test_steklov_modes_have_zero_boundary_mean(disk04):
    s = assemble(disk04)
    res = steklov_fem(disk04, k=3, system=s)
    one = np.ones(disk04.n_vertices)
    np.testing.assert_allclose(one @ (s.B @ res.eigenvectors), 0.0, atol=1e-10)
    assert np.all(np.diff(res.eigenvalues) >= 0)
    assert np.all(res.residuals < 1e-8)


# --- refinement ----------------------------------------------------------------------

def test_refine_counts_and_projection():
    m = disk_mesh(0.0, 1.0, 0.2)
    r = refine(m)
    assert len(r.triangles) == 4 * len(m.triangles)
    assert r.n_vertices == m.n_vertices + len(m.edges())
    assert len(r.boundary_edges) == 2 * len(m.boundary_edges)
    np.testing.assert_allclose(np.linalg.norm(r.vertices[r.boundary_vertices], axis=1), 1.0, atol=1e-12)
    r.validate()


def test_refine_convergence_rate():
    exact = robin_eigenvalue_ball(BallSpec(0.0, 2, 1.0), 0.0)
    m = disk_mesh(0.0, 1.0, 0.16)
    errs = []
    for _ in range(3):
        errs.append(abs(robin_eigs_fem(m, 0.0).eigenvalues[1] - exact))
        m = refine(m)
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.0) & (ratios < 5.5)), ratios


# --- mesh file format ------------------------------------------------------------------

def test_mesh_roundtrip(tmp_path, hyp_disk):
    path = tmp_path / "m.mesh"
    write_mesh(hyp_disk, path)
    first = path.read_text().splitlines()[0]
    assert first == "mesh2d v1 kappa=-1.0"
    back = read_mesh(path)
    assert back.kappa == -1.0
    np.testing.assert_array_equal(back.vertices, hyp_disk.vertices)
    np.testing.assert_array_equal(back.triangles, hyp_disk.triangles)
    np.testing.assert_array_equal(back.boundary_edges, hyp_disk.boundary_edges)
    back.validate()


def test_mesh_file_errors(tmp_path):
    bad = tmp_path / "bad.mesh"
    bad.write_text("mesh3d v1 kappa=0\n0\n0\n0\n")
    with pytest.raises(DegenerateMeshError):
        read_mesh(bad)
    bad.write_text("mesh2d v1 kappa=0\n3\n0 0\n1 0\n")
    with pytest.raises(DegenerateMeshError):
        read_mesh(bad)
    bad.write_text("mesh2d v1 kappa=0\n3\n0 0\n1 0\n0 1\n1\n0 1 2\n3\n0 1\n1 2\n2 0\n7\n")
    with pytest.raises(DegenerateMeshError):
        read_mesh(bad)


# --- validation ------------------------------------------------------------------------

def test_validate_detects_problems():
    Mesh2D(**ONE_TRIANGLE).validate()
    inverted = dict(ONE_TRIANGLE, triangles=[[0, 2, 1]])
    with pytest.raises(DegenerateMeshError):
        Mesh2D(**inverted).validate()
    missing = dict(ONE_TRIANGLE, boundary_edges=[[0, 1], [1, 2]])
    with pytest.raises(DegenerateMeshError):
        Mesh2D(**missing).validate()
    sliver = Mesh2D([[0, 0], [1, 0], [0.5, 0.05]], [[0, 1, 2]], [[0, 1], [1, 2], [2, 0]])
    with pytest.raises(DegenerateMeshError):
        sliver.validate()
    outside = Mesh2D(np.array(ONE_TRIANGLE["vertices"], float) * 2, ONE_TRIANGLE["triangles"],
                     ONE_TRIANGLE["boundary_edges"], kappa=-1.0)
    with pytest.raises(DegenerateMeshError):
        outside.validate()
