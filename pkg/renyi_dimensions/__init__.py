"""
Renyi Dimensions

Builds dyadic cascade measures with prescribed partition functions, evaluates
partition functions and Gaussian-filtered L^q norms, and estimates upper and
lower Renyi and Matuszewska dimensions by secant, subsequence and best-fit
slope methods.
"""

from .config import EstimatorSettings, MeasureSpec, dump_config, parse_config
from .exceptions import (
    ArtifactNotFoundError,
    ConfigError,
    DomainError,
    EstimatorError,
    InvariantViolationError,
    OutputSaveError,
    PrecisionGuardError,
    QuadratureError,
    RationalModeError,
    RenyiDimensionsError,
    ResourceLimitError,
)
from .gaussfilter import (
    EnvelopeConstants,
    GaussianKernel,
    QuadratureSpec,
    check_monotonicity,
    check_ratio_bound,
    envelope_constants,
    filtered_density,
    gaussian_lq_closed_form,
    lq_norm_q,
)
from .measure import (
    CascadeMeasure,
    DiscretizedMeasure,
    build_cascade,
    cdf,
    convolve,
    discretize,
    interval_mass,
    solve_omega,
)
from .partition import (
    JumpDiagnostics,
    PartitionTable,
    build_table,
    check_jump_bounds,
    partition_bucket,
    partition_enumerate,
    partition_exact_dyadic,
)
from .profiles import (
    ProfileStats,
    WeightProfile,
    profile_block48,
    profile_geometric_blocks,
    running_stats,
)
from .slopes import (
    DimensionReport,
    SlopeFit,
    convolution_bound_check,
    dimension_report,
    lsq_continuous,
    lsq_discrete,
    lsq_discrete_curve,
    lsq_gap_check,
    matuszewska_estimate,
    nearly_lipschitz_constants,
    secant_estimate,
    sequence_estimate,
    small_jump_constant,
)

__version__ = "0.1.0"

__all__ = [
    'EstimatorSettings',
    'MeasureSpec',
    'dump_config',
    'parse_config',
    'RenyiDimensionsError',
    'DomainError',
    'ResourceLimitError',
    'PrecisionGuardError',
    'QuadratureError',
    'EstimatorError',
    'RationalModeError',
    'InvariantViolationError',
    'ConfigError',
    'ArtifactNotFoundError',
    'OutputSaveError',
    'EnvelopeConstants',
    'GaussianKernel',
    'QuadratureSpec',
    'check_monotonicity',
    'check_ratio_bound',
    'envelope_constants',
    'filtered_density',
    'gaussian_lq_closed_form',
    'lq_norm_q',
    'CascadeMeasure',
    'DiscretizedMeasure',
    'build_cascade',
    'cdf',
    'convolve',
    'discretize',
    'interval_mass',
    'solve_omega',
    'JumpDiagnostics',
    'PartitionTable',
    'build_table',
    'check_jump_bounds',
    'partition_bucket',
    'partition_enumerate',
    'partition_exact_dyadic',
    'ProfileStats',
    'WeightProfile',
    'profile_block48',
    'profile_geometric_blocks',
    'running_stats',
    'DimensionReport',
    'SlopeFit',
    'convolution_bound_check',
    'dimension_report',
    'lsq_continuous',
    'lsq_discrete',
    'lsq_discrete_curve',
    'lsq_gap_check',
    'matuszewska_estimate',
    'nearly_lipschitz_constants',
    'secant_estimate',
    'sequence_estimate',
    'small_jump_constant',
]
