"""P1 finite elements for Robin, Neumann and Steklov eigenproblems in 2-D.

Domains live in the conformal disk model of curvature ``kappa <= 0``: the
metric is ``rho(x)^2 |dx|^2`` with ``rho = 2/(1 + kappa|x|^2)`` (``rho = 1``
in the flat case). In two dimensions the Dirichlet energy is conformally
invariant, so the stiffness matrix is the Euclidean one; only the interior
mass (weight rho^2) and the boundary mass (weight rho) see the metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from .errors import DegenerateMeshError, SolverError, UnsupportedParameterError
from .spaceform import conformal_factor

MIN_AREA = 1e-14
DENSE_THRESHOLD = 2000
RESIDUAL_TOL = 1e-8

# barycentric quadrature rules on the reference triangle, weights sum to 1
_TRI_RULES = {
    2: (
        np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]]),
        np.full(3, 1 / 3),
    ),
    5: (
        np.array([
            [1 / 3, 1 / 3, 1 / 3],
            [0.059715871789770, 0.470142064105115, 0.470142064105115],
            [0.470142064105115, 0.059715871789770, 0.470142064105115],
            [0.470142064105115, 0.470142064105115, 0.059715871789770],
            [0.797426985353087, 0.101286507323456, 0.101286507323456],
            [0.101286507323456, 0.797426985353087, 0.101286507323456],
            [0.101286507323456, 0.101286507323456, 0.797426985353087],
        ]),
        np.array([0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3),
    ),
}


@dataclass
class Mesh2D:
    """Triangulated domain in model coordinates.

    ``boundary_projector`` maps points near the boundary onto the analytic
    boundary curve; it is used by :func:`refine` and is not serialized.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    kappa: float = 0.0
    boundary_projector: Callable | None = field(default=None, repr=False, compare=False)
    h: float | None = None

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float).reshape(-1, 2)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.boundary_edges = np.ascontiguousarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        if self.kappa > 0:
            raise UnsupportedParameterError("FEM meshes support kappa <= 0 only")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edges(self) -> np.ndarray:
        """Unique undirected edges, sorted (i < j)."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def angles(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        out = np.empty((len(p), 3))
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            cos = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            out[:, i] = np.degrees(np.arccos(np.clip(cos, -1.0, 1.0)))
        return out

    def min_angle(self) -> float:
        return float(self.angles().min())

    def validate(self, min_angle: float = 15.0) -> None:
        """Raise DegenerateMeshError unless every Mesh2D invariant holds."""
        nv = self.n_vertices
        if self.triangles.size == 0:
            raise DegenerateMeshError("mesh has no triangles")
        if self.triangles.min() < 0 or self.triangles.max() >= nv:
            raise DegenerateMeshError("triangle index out of range")
        areas = self.signed_areas()
        if np.any(areas < MIN_AREA):
            raise DegenerateMeshError(
                f"{int(np.sum(areas < MIN_AREA))} triangles are degenerate or negatively oriented"
            )
        t = self.triangles
        e = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        if np.any(counts > 2):
            raise DegenerateMeshError("an edge is shared by more than two triangles")
        free = uniq[counts == 1]
        given = np.unique(np.sort(self.boundary_edges, axis=1), axis=0)
        if len(given) != len(self.boundary_edges):
            raise DegenerateMeshError("duplicate boundary edges")
        if free.shape != given.shape or not np.array_equal(free, given):
            raise DegenerateMeshError("boundary edges do not match the edges owned by one triangle")
        used = np.zeros(nv, bool)
        used[t.ravel()] = True
        if not used.all():
            raise DegenerateMeshError("mesh has unreferenced vertices")
        if self.kappa < 0:
            lim = 1.0 / math.sqrt(-self.kappa)
            if np.any(np.linalg.norm(self.vertices, axis=1) >= lim):
                raise DegenerateMeshError("vertex outside the model disk")
        ma = self.min_angle()
        if ma <= min_angle:
            raise DegenerateMeshError(f"minimum angle {ma:.2f} deg <= {min_angle} deg")


@dataclass
class AssembledSystem:
    K: sp.csr_matrix
    M: sp.csr_matrix
    B: sp.csr_matrix


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    stats: dict = field(default_factory=dict)


# --- quadrature helpers ------------------------------------------------------

def triangle_quadrature(mesh: Mesh2D, degree: int = 2):
    """Quadrature points ``(T, q, 2)``, Euclidean weights ``(T, q)`` and the
    barycentric values ``(q, 3)`` of the P1 basis at those points."""
    bary, w = _TRI_RULES[degree]
    p = mesh.vertices[mesh.triangles]
    pts = np.einsum("qk,tkd->tqd", bary, p)
    area = np.abs(mesh.signed_areas())
    return pts, area[:, None] * w[None, :], bary


def edge_quadrature(mesh: Mesh2D, n_points: int = 2):
    """Gauss points ``(E, q, 2)``, Euclidean weights ``(E, q)`` and the
    endpoint basis values ``(q, 2)`` on boundary edges."""
    x, w = np.polynomial.legendre.leggauss(n_points)
    s = 0.5 * (x + 1.0)
    phi = np.stack([1.0 - s, s], axis=1)
    p = mesh.vertices[mesh.boundary_edges]
    pts = np.einsum("qk,ekd->eqd", phi, p)
    length = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    return pts, length[:, None] * (0.5 * w)[None, :], phi


def interpolate_p1(mesh: Mesh2D, u: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """Values of the P1 field ``u`` at triangle quadrature points ``(T, q)``."""
    return u[mesh.triangles] @ bary.T


# --- assembly ----------------------------------------------------------------

def assemble(mesh: Mesh2D) -> AssembledSystem:
    """Stiffness K, metric mass M (weight rho^2) and boundary mass B (weight rho)."""
    areas = mesh.signed_areas()
    if np.any(areas < MIN_AREA):
        raise DegenerateMeshError("degenerate or inverted triangle (area < 1e-14)")
    n = mesh.n_vertices
    t = mesh.triangles
    p = mesh.vertices[t]

    # gradients of barycentric coordinates: rotate opposite edges
    e0 = p[:, 2] - p[:, 1]
    e1 = p[:, 0] - p[:, 2]
    e2 = p[:, 1] - p[:, 0]
    grads = np.stack([e0, e1, e2], axis=1)[:, :, ::-1] * np.array([-1.0, 1.0])
    grads /= (2.0 * areas)[:, None, None]
    Ke = areas[:, None, None] * np.einsum("tid,tjd->tij", grads, grads)

    pts, w, bary = triangle_quadrature(mesh, 2)
    rho2 = conformal_factor(mesh.kappa, pts) ** 2
    Me = np.einsum("tq,qi,qj->tij", w * rho2, bary, bary)

    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    epts, ew, phi = edge_quadrature(mesh, 2)
    rho = conformal_factor(mesh.kappa, epts)
    Be = np.einsum("eq,qi,qj->eij", ew * rho, phi, phi)
    be = mesh.boundary_edges
    brows = np.repeat(be, 2, axis=1).ravel()
    bcols = np.tile(be, (1, 2)).ravel()
    B = sp.coo_matrix((Be.ravel(), (brows, bcols)), shape=(n, n)).tocsr()

    K = 0.5 * (K + K.T)
    M = 0.5 * (M + M.T)
    B = 0.5 * (B + B.T)
    return AssembledSystem(K.tocsr(), M.tocsr(), B.tocsr())


def domain_volume(mesh: Mesh2D, degree: int = 2) -> float:
    """Metric area ``int rho^2 dx``."""
    pts, w, _ = triangle_quadrature(mesh, degree)
    return float(np.sum(w * conformal_factor(mesh.kappa, pts) ** 2))


def domain_perimeter(mesh: Mesh2D, n_points: int = 2) -> float:
    """Metric boundary length ``int rho ds``."""
    pts, w, _ = edge_quadrature(mesh, n_points)
    return float(np.sum(w * conformal_factor(mesh.kappa, pts)))


# --- eigensolvers ------------------------------------------------------------

def inertia_below(A, M, sigma: float):
    """Number of eigenvalues of the pencil (A, M) below ``sigma``.

    Counts negative pivots of a symmetric LDL^T-type factorization of
    ``A - sigma M`` (Sylvester's law of inertia). Returns the count and the
    factorization, which doubles as the shift-invert operator.
    """
    lu = splu(
        sp.csc_matrix(A - sigma * M),
        permc_spec="MMD_AT_PLUS_A",
        diag_pivot_thresh=0.0,
        options={"SymmetricMode": True},
    )
    if not np.array_equal(lu.perm_r, lu.perm_c):
        raise SolverError("factorization pivoted off the diagonal; inertia unavailable")
    return int(np.sum(lu.U.diagonal() < 0)), lu


def _residuals(A, M, lam, V):
    R = A @ V - (M @ V) * lam[None, :]
    return np.linalg.norm(R, axis=0) / np.linalg.norm(V, axis=0)


def _normalize_signs(V):
    s = np.sign(V.sum(axis=0))
    s[s == 0] = 1.0
    return V * s[None, :]


def solve_pencil(A, M, k: int, *, lower_guess: float, dense_threshold: int = DENSE_THRESHOLD) -> EigenResult:
    """k smallest eigenpairs of the symmetric pencil (A, M), M SPD.

    ``lower_guess`` is any value at or above the smallest eigenvalue (e.g. a
    Rayleigh quotient); the shift is pushed below it until the inertia count
    certifies that no eigenvalue lies under the shift.
    """
    n = A.shape[0]
    if n <= dense_threshold:
        lam, V = sla.eigh(A.toarray(), M.toarray(), subset_by_index=[0, k - 1])
        stats = {"method": "dense", "n": n}
    else:
        delta = max(1.0, abs(lower_guess)) * 0.25
        tries = 0
        while True:
            sigma = lower_guess - delta
            count, lu = inertia_below(A, M, sigma)
            tries += 1
            if count == 0:
                break
            if tries > 60:
                raise SolverError("could not find a shift below the spectrum", {"sigma": sigma})
            delta *= 2.0
        op = LinearOperator((n, n), matvec=lu.solve, dtype=float)
        try:
            lam, V = eigsh(A, k=k, M=M, sigma=sigma, OPinv=op, which="LM", tol=1e-13,
                           ncv=max(2 * k + 1, 24), maxiter=5000)
        except ArpackNoConvergence as exc:
            raise SolverError("shift-invert Lanczos did not converge",
                              {"sigma": sigma, "converged": len(exc.eigenvalues)}) from exc
        order = np.argsort(lam)
        lam, V = lam[order], V[:, order]
        stats = {"method": "shift-invert", "n": n, "sigma": sigma, "shift_tries": tries}
    V = _normalize_signs(V)
    res = _residuals(A, M, lam, V)
    stats["max_residual"] = float(res.max())
    return EigenResult(np.asarray(lam), V, res, stats)


def robin_eigs_fem(mesh: Mesh2D, alpha: float, k: int = 2, system: AssembledSystem | None = None,
                   dense_threshold: int = DENSE_THRESHOLD) -> EigenResult:
    """k smallest eigenpairs of ``(K + alpha B) u = lam M u``.

    Eigenvectors are M-orthonormal; the first one is sign-normalized to be
    positive on average.
    """
    if alpha > 0:
        raise UnsupportedParameterError(f"alpha > 0 is not supported (got {alpha})")
    if k < 2:
        raise ValueError("k must be at least 2")
    system = system or assemble(mesh)
    A = (system.K + alpha * system.B).tocsr()
    one = np.ones(mesh.n_vertices)
    q0 = float(one @ (A @ one) / (one @ (system.M @ one)))
    res = solve_pencil(A, system.M, k, lower_guess=q0, dense_threshold=dense_threshold)
    res.stats["alpha"] = alpha
    if res.stats["max_residual"] > RESIDUAL_TOL:
        raise SolverError("eigenpair residual above tolerance", res.stats)
    return res


def steklov_fem(mesh: Mesh2D, k: int = 1, system: AssembledSystem | None = None) -> EigenResult:
    """k smallest nonzero Steklov eigenvalues of ``K u = sigma B u``.

    Interior unknowns are eliminated (harmonic extension), leaving the
    Schur complement on boundary vertices. Constants are deflated by
    restricting to the B-orthogonal complement of the constant vector.
    """
    system = system or assemble(mesh)
    K, B = system.K.tocsr(), system.B.tocsr()
    n = mesh.n_vertices
    bnd = mesh.boundary_vertices
    inner = np.setdiff1d(np.arange(n), bnd)
    Kbb = K[bnd][:, bnd].toarray()
    Kib = K[inner][:, bnd].toarray()
    lu = splu(sp.csc_matrix(K[inner][:, inner]))
    X = lu.solve(Kib)
    S = Kbb - Kib.T @ X
    S = 0.5 * (S + S.T)
    Bbb = B[bnd][:, bnd].toarray()
    c = Bbb @ np.ones(len(bnd))
    Q = sla.null_space(c[None, :])
    sig, Y = sla.eigh(Q.T @ S @ Q, Q.T @ Bbb @ Q, subset_by_index=[0, k - 1])
    ub = Q @ Y
    U = np.zeros((n, k))
    U[bnd] = ub
    U[inner] = -X @ ub
    res = _residuals(K, B, sig, U)
    stats = {"method": "schur-dense", "n_boundary": len(bnd), "max_residual": float(res.max())}
    if res.max() > RESIDUAL_TOL:
        raise SolverError("Steklov residual above tolerance", stats)
    return EigenResult(sig, U, res, stats)


# --- refinement and I/O ------------------------------------------------------

def refine(mesh: Mesh2D) -> Mesh2D:
    """Split every triangle into four through edge midpoints.

    Boundary midpoints are projected with ``mesh.boundary_projector`` when
    the mesh carries one.
    """
    edges = mesh.edges()
    nv = mesh.n_vertices
    mid = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    # edge lookup: key = i * nv + j with i < j
    keys = edges[:, 0] * nv + edges[:, 1]
    order = np.argsort(keys)
    keys_sorted = keys[order]

    def mid_index(a, b):
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        pos = np.searchsorted(keys_sorted, lo * nv + hi)
        return nv + order[pos]

    be = mesh.boundary_edges
    bmid = mid_index(be[:, 0], be[:, 1])
    if mesh.boundary_projector is not None:
        mid[bmid - nv] = mesh.boundary_projector(mid[bmid - nv])
    verts = np.vstack([mesh.vertices, mid])
    t = mesh.triangles
    m01 = mid_index(t[:, 0], t[:, 1])
    m12 = mid_index(t[:, 1], t[:, 2])
    m20 = mid_index(t[:, 2], t[:, 0])
    tris = np.concatenate([
        np.stack([t[:, 0], m01, m20], axis=1),
        np.stack([m01, t[:, 1], m12], axis=1),
        np.stack([m20, m12, t[:, 2]], axis=1),
        np.stack([m01, m12, m20], axis=1),
    ])
    bedges = np.concatenate([np.stack([be[:, 0], bmid], axis=1), np.stack([bmid, be[:, 1]], axis=1)])
    return Mesh2D(verts, tris, bedges, mesh.kappa, mesh.boundary_projector,
                  None if mesh.h is None else mesh.h / 2)


MESH_HEADER = "mesh2d v1"


def write_mesh(mesh: Mesh2D, path) -> None:
    """Write the plain-text mesh2d v1 format."""
    lines = [f"{MESH_HEADER} kappa={mesh.kappa!r}", str(mesh.n_vertices)]
    lines += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines.append(str(len(mesh.triangles)))
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines.append(str(len(mesh.boundary_edges)))
    lines += [f"{i} {j}" for i, j in mesh.boundary_edges.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> Mesh2D:
    """Read a mesh2d v1 file."""
    tokens = Path(path).read_text().split("\n")
    header = tokens[0].split()
    if len(header) != 3 or " ".join(header[:2]) != MESH_HEADER or not header[2].startswith("kappa="):
        raise DegenerateMeshError(f"not a mesh2d v1 file: {tokens[0]!r}")
    kappa = float(header[2][len("kappa="):])
    body = " ".join(tokens[1:]).split()
    pos = 0

    def take(count, width, dtype):
        nonlocal pos
        vals = np.array(body[pos:pos + count * width], dtype=dtype)
        if vals.size != count * width:
            raise DegenerateMeshError("truncated mesh file")
        pos += count * width
        return vals.reshape(count, width)

    nv = int(body[pos]); pos += 1
    verts = take(nv, 2, float)
    nt = int(body[pos]); pos += 1
    tris = take(nt, 3, np.int64)
    ne = int(body[pos]); pos += 1
    edges = take(ne, 2, np.int64)
    if pos != len(body):
        raise DegenerateMeshError("trailing data in mesh file")
    return Mesh2D(verts, tris, edges, kappa)
