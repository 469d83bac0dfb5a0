import dataclasses
import math

HALF_PI = math.pi / 2
SCHEMA_VERSION = 1
VERSION = "1.0.0"


@dataclasses.dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    normalization: float = 1e-12
    parameter_normalization: float = 1e-10
    trace: float = 1e-10
    positivity: float = 1e-10
    eig_residual: float = 1e-10
    jacobi_off_diagonal: float = 1e-14
    jacobi_max_sweeps: int = 100
    degenerate_cluster: float = 1e-10
    singular_det: float = 1e-12
    # relative to the largest eigenvalue of Q
    qfim_rank: float = 1e-10
    qfim_symmetry: float = 1e-10
    support: float = 1e-10
    sqrt_clamp: float = 1e-10
    finite_difference_step: float = 1e-6
    canonical_domain: float = 1e-12
    canonicalize_max_iterations: int = 16
    gamma: float = 1e-12
    precision_floor: float = 1e-12
    # eigenvalues of the concurrence R^2 operator below this are roundoff
    concurrence_floor: float = 1e-13


TOL = Tolerances()
