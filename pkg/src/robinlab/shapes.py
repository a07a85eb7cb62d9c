"""Meshed test domains: disks, ellipses, rectangles and perturbed disks.

Curved domains are meshed by sampling the boundary at arclength ~h, filling
the interior with a hexagonal lattice kept away from the boundary, and
alternating Delaunay triangulation with Laplacian smoothing. With boundary
samples finer than the boundary curvature radius every boundary segment is a
Gabriel edge, so the Delaunay triangulation restricted to the domain
conforms to the boundary polygon; :meth:`Mesh2D.validate` confirms it.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .errors import DegenerateMeshError, UnsupportedParameterError
from .fem2d import Mesh2D, domain_volume
from .spaceform import model_radius

SMOOTHING_SWEEPS = 8
LATTICE_CLEARANCE = 0.6


def points_in_polygon(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd rule; ``poly`` is an (m, 2) closed polygon without repeat."""
    px, py = pts[:, 0][:, None], pts[:, 1][:, None]
    x1, y1 = poly[:, 0][None, :], poly[:, 1][None, :]
    x2, y2 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    crosses = (y1 > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = (x2 - x1) * (py - y1) / (y2 - y1) + x1
    return (np.count_nonzero(crosses & (px < xint), axis=1) % 2) == 1


def turning_number(poly: np.ndarray) -> int:
    """Total turning of the closed polygon divided by 2 pi."""
    d = np.roll(poly, -1, axis=0) - poly
    ang = np.arctan2(d[:, 1], d[:, 0])
    turn = np.diff(np.concatenate([ang, ang[:1]]))
    turn = (turn + np.pi) % (2 * np.pi) - np.pi
    return int(round(turn.sum() / (2 * np.pi)))


def polygonize(curve, h: float, n_probe: int = 20000) -> np.ndarray:
    """Points on the closed curve ``curve(t)``, t in [0, 2 pi), at arclength ~h."""
    t = np.linspace(0.0, 2 * np.pi, n_probe + 1)
    p = curve(t)
    seg = np.linalg.norm(np.diff(p, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    length = s[-1]
    # an even count keeps reflection-symmetric curves symmetric as polygons
    n = max(12, 2 * int(math.ceil(length / (2 * h))))
    targets = np.arange(n) * length / n
    return curve(np.interp(targets, s, t))


def _hex_lattice(lo, hi, h, anchor):
    """Hexagonal lattice covering [lo, hi] with a node at ``anchor``.

    Anchoring at a symmetry centre makes the lattice invariant under the
    reflections x -> -x and y -> -y about it.
    """
    dy = h * math.sqrt(3) / 2
    j = np.arange(math.floor((lo[1] - anchor[1]) / dy) - 1, math.ceil((hi[1] - anchor[1]) / dy) + 2)
    k = np.arange(math.floor((lo[0] - anchor[0]) / h) - 1, math.ceil((hi[0] - anchor[0]) / h) + 2)
    K, J = np.meshgrid(k, j)
    X = anchor[0] + (K + 0.5 * (J % 2)) * h
    Y = anchor[1] + J * dy
    return np.column_stack([X.ravel(), Y.ravel()])


def _restricted_delaunay(pts, poly):
    tri = Delaunay(pts)
    t = tri.simplices
    cent = pts[t].mean(axis=1)
    t = t[points_in_polygon(cent, poly)]
    p = pts[t]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    flip = area < 0
    t[flip] = t[flip][:, [0, 2, 1]]
    return t


def mesh_polygon_domain(boundary: np.ndarray, h: float, kappa: float = 0.0, projector=None,
                        sweeps: int = SMOOTHING_SWEEPS, center=None) -> Mesh2D:
    """Quasi-uniform mesh of the region enclosed by a CCW boundary polygon.

    ``center`` anchors the interior lattice (default: bounding-box centre).
    """
    boundary = np.asarray(boundary, dtype=float)
    if turning_number(boundary) != 1:
        raise DegenerateMeshError("boundary polygon is not a simple CCW curve")
    nb = len(boundary)
    lo, hi = boundary.min(axis=0), boundary.max(axis=0)
    anchor = 0.5 * (lo + hi) if center is None else np.asarray(center, dtype=float)
    lat = _hex_lattice(lo, hi, h, anchor)
    lat = lat[points_in_polygon(lat, boundary)]
    # clearance measured against a densely resampled boundary
    dense = np.concatenate([
        boundary + s * (np.roll(boundary, -1, axis=0) - boundary) for s in np.linspace(0, 1, 8, endpoint=False)
    ])
    dist, _ = cKDTree(dense).query(lat)
    lat = lat[dist >= LATTICE_CLEARANCE * h]
    pts = np.vstack([boundary, lat])

    for _ in range(sweeps):
        t = _restricted_delaunay(pts, boundary)
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e = np.unique(np.sort(e, axis=1), axis=0)
        n = len(pts)
        acc = np.zeros((n, 2))
        deg = np.zeros(n)
        np.add.at(acc, e[:, 0], pts[e[:, 1]])
        np.add.at(acc, e[:, 1], pts[e[:, 0]])
        np.add.at(deg, e[:, 0], 1)
        np.add.at(deg, e[:, 1], 1)
        new = pts.copy()
        movable = np.arange(n) >= nb
        movable &= deg > 0
        new[movable] = acc[movable] / deg[movable, None]
        ok = points_in_polygon(new[nb:], boundary)
        pts[nb:][ok] = new[nb:][ok]

    t = _restricted_delaunay(pts, boundary)
    used = np.unique(t)
    remap = -np.ones(len(pts), dtype=np.int64)
    remap[used] = np.arange(len(used))
    if np.any(remap[:nb] < 0):
        raise DegenerateMeshError("boundary vertex dropped by the triangulation")
    edges = np.column_stack([np.arange(nb), (np.arange(nb) + 1) % nb])
    mesh = Mesh2D(pts[used], remap[t], remap[edges], kappa, projector, h)
    mesh.validate()
    return mesh


def _check_kappa(kappa):
    if kappa > 0:
        raise UnsupportedParameterError("spherical (kappa > 0) domains are not generated")


def _radial_projector(radius_fn):
    def project(x):
        th = np.arctan2(x[:, 1], x[:, 0])
        r = radius_fn(th)
        return np.column_stack([r * np.cos(th), r * np.sin(th)])
    return project


def disk_mesh(kappa: float, radius: float, h: float) -> Mesh2D:
    """Geodesic disk of the given radius centred at the origin.

    ``h`` is the target edge length in model coordinates (Euclidean for
    kappa = 0).
    """
    _check_kappa(kappa)
    if not radius > 0:
        raise ValueError("radius must be positive")
    rm = float(model_radius(kappa, radius))

    def curve(t):
        return np.column_stack([rm * np.cos(t), rm * np.sin(t)])

    project = _radial_projector(lambda th: np.full_like(th, rm))
    return mesh_polygon_domain(project(polygonize(curve, h)), h, kappa, project, center=(0.0, 0.0))


def ellipse_mesh(a: float, b: float, h: float, kappa: float = 0.0, center=(0.0, 0.0)) -> Mesh2D:
    """Flat ellipse with semi-axes a (along x) and b."""
    if kappa != 0:
        raise UnsupportedParameterError("ellipses are generated in the flat case only")
    if not (a > 0 and b > 0):
        raise ValueError("semi-axes must be positive")
    c = np.asarray(center, dtype=float)

    def curve(t):
        return np.column_stack([a * np.cos(t), b * np.sin(t)]) + c

    def project(x):
        y = x - c
        s = np.sqrt((y[:, 0] / a) ** 2 + (y[:, 1] / b) ** 2)
        return y / s[:, None] + c

    return mesh_polygon_domain(polygonize(curve, h), h, 0.0, project, center=c)


def rectangle_mesh(w: float, l: float, h: float, kappa: float = 0.0) -> Mesh2D:
    """Structured right-triangle mesh of ``[0, w] x [0, l]``."""
    if kappa != 0:
        raise UnsupportedParameterError("rectangles are generated in the flat case only")
    if not (w > 0 and l > 0):
        raise ValueError("side lengths must be positive")
    nx = max(1, int(math.ceil(w / h)))
    ny = max(1, int(math.ceil(l / h)))
    xs = np.linspace(0.0, w, nx + 1)
    ys = np.linspace(0.0, l, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    verts = np.column_stack([X.ravel(), Y.ravel()])
    idx = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    a, b = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    c, d = idx[1:, 1:].ravel(), idx[1:, :-1].ravel()
    # alternate diagonals so the mesh has no preferred direction
    flip = ((np.arange(ny)[:, None] + np.arange(nx)[None, :]) % 2 == 1).ravel()
    t1 = np.where(flip[:, None], np.column_stack([a, b, d]), np.column_stack([a, b, c]))
    t2 = np.where(flip[:, None], np.column_stack([b, c, d]), np.column_stack([a, c, d]))
    tris = np.vstack([t1, t2])
    ring = np.concatenate([idx[0, :-1], idx[:-1, -1], idx[-1, :0:-1], idx[:0:-1, 0]])
    edges = np.column_stack([ring, np.roll(ring, -1)])
    mesh = Mesh2D(verts, tris, edges, 0.0, None, max(w / nx, l / ny))
    mesh.validate()
    return mesh


def perturbed_disk_mesh(kappa: float, radius: float, eps: float, k: int, h: float) -> Mesh2D:
    """Domain bounded by ``r(theta) = R_m (1 + eps cos k theta)`` in model
    coordinates, where R_m is the model radius of the geodesic ``radius``."""
    _check_kappa(kappa)
    if not 0 <= eps < 0.3:
        raise ValueError("eps must lie in [0, 0.3)")
    if int(k) != k or k < 2:
        raise ValueError("mode k must be an integer >= 2")
    rm = float(model_radius(kappa, radius))
    if kappa < 0 and rm * (1 + eps) >= 1.0 / math.sqrt(-kappa):
        raise ValueError("perturbed boundary leaves the model disk")

    def rfun(th):
        return rm * (1.0 + eps * np.cos(k * th))

    def curve(t):
        r = rfun(t)
        return np.column_stack([r * np.cos(t), r * np.sin(t)])

    project = _radial_projector(rfun)
    pts = project(polygonize(curve, h))
    if turning_number(pts) != 1:
        raise DegenerateMeshError("perturbed boundary self-intersects")
    return mesh_polygon_domain(pts, h, kappa, project, center=(0.0, 0.0))


def normalize_to_volume(mesh: Mesh2D, target_volume: float) -> Mesh2D:
    """Scale a flat mesh about the origin so its area equals ``target_volume``."""
    if mesh.kappa != 0:
        raise UnsupportedParameterError("volume normalization by scaling is flat-only")
    if not target_volume > 0:
        raise ValueError("target volume must be positive")
    s = math.sqrt(target_volume / domain_volume(mesh))
    proj = mesh.boundary_projector
    scaled_proj = None if proj is None else (lambda x, p=proj, s=s: s * p(x / s))
    return Mesh2D(mesh.vertices * s, mesh.triangles.copy(), mesh.boundary_edges.copy(), 0.0,
                  scaled_proj, None if mesh.h is None else mesh.h * s)
