"""Product-formula approximation of heat flow on smooth bounded domains.

The iteration alternates an extension across the boundary, a free-space
Gaussian step and restriction back to the domain; the choice of
extension operator encodes a Robin, Neumann or Dirichlet boundary
condition.  Independent eigenexpansion and Crank-Nicolson solvers back
the convergence studies, and a scikit-learn style propagator exposes
the iteration to array pipelines.
"""

from .analytic import (
    Constant,
    CosineMode1D,
    DiskBesselMode,
    GaussianBump1D,
    Polynomial1D,
    RadialPolynomial2D,
    SeparableProduct2D,
    SineMode1D,
    SmoothTestFunction,
    one_sided_laplacian,
)
from .chernoff import (
    VARIANTS,
    ChernoffScheme,
    ConvergenceReport,
    SchemeConfig,
    StudyRow,
    boundary_diffusion_probe,
    consistency_scan,
    convergence_study,
    evolve,
    robin_step,
)
from .errors import (
    ChernoffHeatError,
    CollarTooWide,
    ConfigError,
    DegenerateGeometry,
    EdgeClipping,
    GridTooCoarse,
    MismatchedGrid,
    NegativeArgument,
    OutsideTubularNeighborhood,
    ReferenceUnavailable,
    RootBracketFailure,
    StepRejected,
    StepTooSmall,
    TruncationInsufficient,
)
from .estimator import ChernoffHeatPropagator
from .extension import (
    EndpointRobin,
    FourierRobin,
    KinkProfile,
    RobinCoefficient,
    check_robin_bc,
    constant_beta,
    extend_constant_normal,
    extend_dirichlet,
    extend_robin,
    extend_zero,
    interior_cutoff,
)
from .fields import Grid, GridFrame, ScalarField, make_grid
from .geometry import BoundaryPoint, Disk, DomainGeometry, Interval, StarDomain
from .heat_kernel import KernelPlan, apply_gaussian, heat_kernel_value, make_plan
from .reference import (
    IntervalEigenExpansion,
    RadialSolution,
    compare_fields,
    disk_robin_frequency,
    radial_crank_nicolson,
    robin_eigenvalues,
    series_solve,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryPoint",
    "ChernoffHeatError",
    "ChernoffHeatPropagator",
    "ChernoffScheme",
    "CollarTooWide",
    "ConfigError",
    "Constant",
    "ConvergenceReport",
    "CosineMode1D",
    "DegenerateGeometry",
    "Disk",
    "DiskBesselMode",
    "DomainGeometry",
    "EdgeClipping",
    "EndpointRobin",
    "FourierRobin",
    "GaussianBump1D",
    "Grid",
    "GridFrame",
    "GridTooCoarse",
    "Interval",
    "IntervalEigenExpansion",
    "KernelPlan",
    "KinkProfile",
    "MismatchedGrid",
    "NegativeArgument",
    "OutsideTubularNeighborhood",
    "Polynomial1D",
    "RadialPolynomial2D",
    "RadialSolution",
    "ReferenceUnavailable",
    "RobinCoefficient",
    "RootBracketFailure",
    "ScalarField",
    "SchemeConfig",
    "SeparableProduct2D",
    "SineMode1D",
    "SmoothTestFunction",
    "StarDomain",
    "StepRejected",
    "StepTooSmall",
    "StudyRow",
    "TruncationInsufficient",
    "VARIANTS",
    "apply_gaussian",
    "boundary_diffusion_probe",
    "check_robin_bc",
    "compare_fields",
    "consistency_scan",
    "constant_beta",
    "convergence_study",
    "disk_robin_frequency",
    "evolve",
    "extend_constant_normal",
    "extend_dirichlet",
    "extend_robin",
    "extend_zero",
    "heat_kernel_value",
    "interior_cutoff",
    "make_grid",
    "make_plan",
    "one_sided_laplacian",
    "radial_crank_nicolson",
    "robin_eigenvalues",
    "robin_step",
    "series_solve",
]
