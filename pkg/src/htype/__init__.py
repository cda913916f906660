"""H-type groups: Clifford structures, subriemannian geometry and heat kernel."""

from .clifford import HTypeStructure, build_structure, hurwitz_radon, is_admissible, j_map
from .errors import (
    AdmissibilityError,
    DomainError,
    FallbackWarning,
    HTypeError,
    PreconditionError,
    QuadratureError,
)
from .geometry import GeodesicSolution, distance, geodesic, geodesic_point, nu, nu_inverse
from .group import GroupPoint, bracket, dilate, multiply, radial_subgradient
from .heatkernel import (
    KernelEvaluation,
    QuadratureConfig,
    hankel_coefficients,
    hankel_residue,
    kernel,
    kernel_shifted,
    sphere_factor,
)
from .estimates import (
    SweepReport,
    crude_bounds_check,
    grad_correction,
    hadamard_descent_check,
    heat_residual,
    q_correction,
    ratio_sweep,
)

__version__ = "0.1.0"
