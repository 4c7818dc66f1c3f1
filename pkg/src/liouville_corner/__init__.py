"""Half-plane Liouville fields with a conical corner.

A numpy/scipy library for the boundary-value problem

    -laplace(u) = |x|^(2*alpha) * exp(u)     in the upper half-plane,
    du/dt = c * |x|^alpha * exp(u/2)         on the boundary rays,

covering the explicit solution family and its gauges (:mod:`.core`), pointwise
conformal-geometry diagnostics (:mod:`.geometry`), adaptive energy quadrature
and integral identities (:mod:`.quadrature`), a finite-difference Newton
solver and family fitting (:mod:`.solver`), and a command-line front end
(:mod:`.cli`, console script ``liouville-corner``).
"""

__version__ = "0.1.0"

from .core import (
    BoundaryCurvatures,
    ConeParams,
    DomainError,
    FamilyParams,
    Gauge,
    IncompatibleCurvatures,
    NearIntegerAlphaWarning,
    ScalarField,
    curvatures_from_z0,
    eval_grad_u,
    eval_laplacian_u,
    eval_u,
    eval_u_polar,
    halfplane_power,
    polar_from_complex,
    wirtinger_derivatives,
    z0_from_curvatures,
)
from .geometry import (
    CenterNotAtOrigin,
    ProjectiveConnectionValue,
    ResidualMode,
    ResidualSample,
    boundary_geodesic_curvature,
    boundary_residual,
    h_system_residuals,
    interior_residual,
    inversion_symmetry_residual,
    kelvin_transform,
    projective_connection,
    projective_connection_fd,
    scalar_curvature,
    schwarzian,
    wirtinger_derivatives_fd,
)
from .quadrature import (
    EnergyReport,
    NonConvergence,
    QuadratureConfig,
    adaptive_quadrature,
    asymptotic_slope,
    borderline_divergence_control,
    d_identity,
    energy_area,
    energy_boundary,
    pohozaev_d_estimate,
    pohozaev_residual,
)
from .solver import (
    FitResult,
    IllPosed,
    NoConvergence,
    NotInFamily,
    SolverConfig,
    fit_family,
    solve_bvp,
)

__all__ = [
    "__version__",
    # core
    "BoundaryCurvatures",
    "ConeParams",
    "DomainError",
    "FamilyParams",
    "Gauge",
    "IncompatibleCurvatures",
    "NearIntegerAlphaWarning",
    "ScalarField",
    "curvatures_from_z0",
    "eval_grad_u",
    "eval_laplacian_u",
    "eval_u",
    "eval_u_polar",
    "halfplane_power",
    "polar_from_complex",
    "wirtinger_derivatives",
    "z0_from_curvatures",
    # geometry
    "CenterNotAtOrigin",
    "ProjectiveConnectionValue",
    "ResidualMode",
    "ResidualSample",
    "boundary_geodesic_curvature",
    "boundary_residual",
    "h_system_residuals",
    "interior_residual",
    "inversion_symmetry_residual",
    "kelvin_transform",
    "projective_connection",
    "projective_connection_fd",
    "scalar_curvature",
    "schwarzian",
    "wirtinger_derivatives_fd",
    # quadrature
    "EnergyReport",
    "NonConvergence",
    "QuadratureConfig",
    "adaptive_quadrature",
    "asymptotic_slope",
    "borderline_divergence_control",
    "d_identity",
    "energy_area",
    "energy_boundary",
    "pohozaev_d_estimate",
    "pohozaev_residual",
    # solver
    "FitResult",
    "IllPosed",
    "NoConvergence",
    "NotInFamily",
    "SolverConfig",
    "fit_family",
    "solve_bvp",
]
