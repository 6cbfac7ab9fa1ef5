"""Solver and certifier for the unsteady planar four-velocity Broadwell gas.

The public surface mirrors the build blocks: model constants and collision
terms, grid fields and norms, boundary data families, backward-characteristic
geometry, the transport operator and its relaxed/derivative variants, the
explicit bound certificate, the Picard solver, and the finite-difference
oracle.
"""

from .boundary import (
    BoundaryData,
    CompatibilityReport,
    check_compatibility,
    constant_family,
    transport_family,
)
from .certify import (
    BoundCertificate,
    certify,
    compute_alpha,
    compute_beta,
    compute_beta_t,
    compute_p,
    compute_p_prime,
    compute_q,
)
from .errors import (
    BroadwellError,
    ConfigError,
    ConvergenceError,
    DataError,
    DomainError,
    GateError,
    NumericalError,
)
from .fields import (
    Field4,
    FieldPartials,
    GridSpec,
    c1_norm,
    fd_partials,
    read_snapshot_csv,
    sample,
    sup_norm,
    v_functional,
    write_snapshot_csv,
)
from .geometry import (
    CharFoot,
    Region,
    classify,
    foot,
    nodes_off_region_planes,
    path_point,
)
from .model import (
    COLLISION_SIGNS,
    ModelParams,
    SpaceTimeBox,
    Species,
    collision,
    density,
    regularized_collision,
    species_table,
    velocity_of,
)
from .oracle import (
    ComparisonReport,
    UpwindConfig,
    compare,
    free_streaming_exact,
    upwind_solve,
)
from .solver import (
    IterationReport,
    SolveConfig,
    data_shell_guess,
    initial_guess,
    residual,
    solve,
)
from .transport import (
    OperatorOutput,
    QuadratureSpec,
    apply_T,
    apply_T_derivatives,
    apply_T_sigma,
    apply_T_with_derivatives,
)

__version__ = "0.1.0"
