"""Robin, Neumann and Steklov eigenvalues on geodesic balls and planar domains
of constant-curvature space forms."""

from .errors import (
    BracketError,
    DegenerateMeshError,
    DomainError,
    IntegrationError,
    RobinLabError,
    SolverError,
    UnsupportedParameterError,
)
from .fem2d import (
    AssembledSystem,
    EigenResult,
    Mesh2D,
    assemble,
    domain_perimeter,
    domain_volume,
    read_mesh,
    refine,
    robin_eigs_fem,
    steklov_fem,
    write_mesh,
)
from .profile import ExtendedProfile, check_h_monotone, check_profile_bounds, extend_profile, h_value
from .radial import (
    RadialMode,
    RadialProfile,
    integrate_radial,
    rayleigh_radial,
    robin_eigenvalue_ball,
    shoot_residual,
    solve_robin_ball,
    steklov_ball,
)
from .shapes import disk_mesh, ellipse_mesh, normalize_to_volume, perturbed_disk_mesh, rectangle_mesh
from .spaceform import (
    BallSpec,
    ball_area,
    ball_volume,
    cot_ratio,
    radius_for_volume,
    sn,
    sn_prime,
)
from .verify import (
    ChainReport,
    center_of_mass,
    comparison_sweep,
    inequality_chain,
    sector_order_check,
    shape_opt_sweep,
    steklov_via_robin_root,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledSystem",
    "BallSpec",
    "BracketError",
    "ChainReport",
    "DegenerateMeshError",
    "DomainError",
    "EigenResult",
    "ExtendedProfile",
    "IntegrationError",
    "Mesh2D",
    "RadialMode",
    "RadialProfile",
    "RobinLabError",
    "SolverError",
    "UnsupportedParameterError",
    "assemble",
    "ball_area",
    "ball_volume",
    "center_of_mass",
    "check_h_monotone",
    "check_profile_bounds",
    "comparison_sweep",
    "cot_ratio",
    "disk_mesh",
    "domain_perimeter",
    "domain_volume",
    "ellipse_mesh",
    "extend_profile",
    "h_value",
    "inequality_chain",
    "integrate_radial",
    "normalize_to_volume",
    "perturbed_disk_mesh",
    "radius_for_volume",
    "rayleigh_radial",
    "read_mesh",
    "rectangle_mesh",
    "refine",
    "robin_eigenvalue_ball",
    "robin_eigs_fem",
    "sector_order_check",
    "shape_opt_sweep",
    "shoot_residual",
    "sn",
    "sn_prime",
    "solve_robin_ball",
    "steklov_ball",
    "steklov_fem",
    "steklov_via_robin_root",
    "write_mesh",
    "__version__",
]
