"""Hilbert-space-valued linear processes: simulation, exact partial-sum
decompositions, and Monte Carlo measurement of normal-approximation rates."""

from .berry_esseen import (
    BlockNormReport,
    BoundReport,
    CrucialInequalityReport,
    InsufficientSignalError,
    RateFit,
    ReferenceLaw,
    TailBoundReport,
    block_norm_bounds_check,
    bounded_rate_bound,
    build_reference,
    crucial_inequality_check,
    inverse_h,
    measure_delta_n,
    orlicz_rate_bound,
    phi,
    rate_fit,
    tail_bound_check,
)
from .empirical import EmpiricalLaw, dkw_noise_floor, sup_distance
from .gaussian_limit import (
    LimitSpec,
    density_bound,
    limit_covariance,
    sample_limit,
    sample_limit_norms,
    silverman_bandwidth,
)
from .hilbert import LinOp, covariance_operator, operator_norm
from .innovations import (
    DirectionLaw,
    DivergenceError,
    InnovationModel,
    YoungFunction,
    envelope_holds,
    fit_moment_envelope,
    lr_norm,
    luxemburg_norm,
)
from .linproc import (
    BatchNorms,
    CoeffSeq,
    Realization,
    SumDecomposition,
    SupBoundReport,
    batch_norms,
    outer_via_blocks,
    partial_sum,
    sup_norm_bound_check,
)

__version__ = "0.1.0"
