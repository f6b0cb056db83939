"""Approximate joint triangularization of nearly commuting matrix sets.

The package finds an orthogonal frame U that simultaneously pushes a
collection of matrices close to upper triangular form, evaluates a priori
and a posteriori error certificates for the recovered frame, and applies
the method to symmetric rank-d tensor decomposition.
"""

from .errors import (
    ComplexEigenvalues,
    DegenerateSpectrum,
    DimensionMismatch,
    JointTriError,
    LineSearchStalled,
    LogBranchAmbiguous,
    NearDefective,
    NegativeDeterminant,
    NoComparableFrame,
    NonUnitBeta,
    NoSeparatingBeta,
    RankDeficient,
    SingularOperator,
    SingularY,
    SingularZ,
    TooLarge,
    ZeroColumnSum,
)
from .linalg import (
    EigenSystem,
    LowProjector,
    build_low_projector,
    low_part,
    lower_pairs,
    matrix_metrics,
    ordered_schur,
    orthogonal_log,
    real_eigen,
    skew_exp,
    unvec,
    up_part,
    vec,
)
from .triangularize import (
    DescentTrace,
    MatrixSet,
    OptimizerConfig,
    descend,
    eigenvalue_separation,
    find_separating_beta,
    gradient,
    hessian_form,
    loss,
    schur_initializer,
)
from .bounds import (
    BoundReport,
    GroundTruthModel,
    OperatorBundle,
    a_posteriori_bound,
    a_priori_bound,
    assemble_t_tilde,
    eigenvalue_error_bound,
    explicit_bound,
    hessian_constants,
    init_noise_threshold,
    inverse_spectral_norm,
    predicted_direction,
)
from .tensor import (
    Tensor3,
    component_error_bound,
    component_gamma,
    estimate_components,
    first_order_model,
    match_columns,
    observable_matrices,
    recover_scales,
    slices,
    tensor_from_components,
)
from .harness import (
    GeneratorSpec,
    SweepReport,
    TriangularizerFamily,
    converge,
    distance_to_nearest,
    enumerate_exact_triangularizers,
    gen_components,
    gen_ground_truth,
    gen_tensor,
    nearest_direction,
    sample_noise,
    sigma_sweep,
    verify_bounds,
    verify_component_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "1.0.0"
