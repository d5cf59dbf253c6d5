"""mirrorkit: stochastic mirror descent with numerically certified identities.

The package provides the algebraic substrate (potentials, losses, Bregman
divergences), the iteration engines (SMD, its symmetric variant, SGD),
exponential-family samplers, a step-level identity auditor, and desk-scale
experiments for the optimality properties these algorithms carry.
"""

from .audit import (
    AuditRecord,
    MinimaxReport,
    audit_trajectory,
    exponent_identity_residual,
    global_identity,
    local_identity,
    minimax_ratio,
    step_exponent_residual,
)
from .bregman import (
    BregmanValue,
    bregman,
    complete_squares,
    law_of_cosines_residual,
    loss_bregman,
)
from .config import ExperimentConfig, make_config, parse_config
from .descent import (
    Constant,
    DataPoint,
    GeneralizedLinear,
    Linear,
    NoiseSpec,
    RobbinsMonro,
    Trajectory,
    convexity_margin,
    iterate,
    persistent_excitation,
    run_general_recursion,
    run_trajectory,
    smd_step,
    ssmd_step,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    GridError,
    MirrorkitError,
    ParseError,
    RankError,
    ScheduleError,
    StabilityWarning,
    StepCapError,
    ValidationError,
)
from .experiments import (
    EstimatorCost,
    ImplicitRegReport,
    MsqReport,
    OracleSolution,
    RiskReport,
    SMDCost,
    SSMDCost,
    ScaledQuadratic,
    exponent_blowup_probe,
    implicit_reg_experiment,
    implicit_reg_oracle,
    msq_convergence,
    risk_compare,
    risk_cost,
    run_interpolating_descent,
)
from .losses import LogCosh, LossFn, Quadratic, Quartic, make_loss
from .potentials import NegEntropy, Potential, SeparableQ, SquaredL2
from .samplers import (
    ExpFamilySpec,
    GridSpec,
    MirrorMeanReport,
    RngStream,
    mirror_mean_check,
    sample_noise,
    sample_weight,
    sample_white_noise,
)

__version__ = "0.1.0"
