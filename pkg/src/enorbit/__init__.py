"""Fixed-energy periodic orbits by constrained variational minimization.

The workflow: describe a potential (`make_power_law`, `make_exp_well`,
`make_combined`, or a custom `PotentialModel`), check the structural
hypotheses (`check_conditions`), minimize the action-like objective over
antiperiodic trigonometric loops (`multi_start` / `minimize`), recover the
physical period and time-parametrized orbit (`recover_period`, `rescale`),
and cross-check it against a symplectic integrator
(`verify_by_integration`).
"""
from .backend import backend_name
from .errors import (
    ConfigError,
    DegenerateLoop,
    EnorbitError,
    GridTooCoarse,
    IntegratorBlowup,
    InvalidParameter,
    NoConvergedStart,
    NonMonotoneScaling,
    NonpositiveForce,
    RootNotBracketed,
    StallError,
    VanishingConstraintGradient,
)
from .loops import (
    AntiperiodicLoop,
    SampleGrid,
    coefficient_adjoint,
    grid_for,
    kinetic_norm,
    quadrature,
    random_loop,
    synthesize,
    synthesize_at,
    synthesize_velocity,
)
from .optimizer import (
    MultiStartResult,
    SolverConfig,
    SolverReport,
    StartOutcome,
    minimize,
    multi_start,
)
from .orbit import OrbitSolution, recover_period, rescale, verify_by_integration
from .potentials import (
    BUILTIN_FACTORIES,
    ConditionReport,
    GrowthParams,
    PotentialModel,
    Verdict,
    check_conditions,
    make_combined,
    make_exp_well,
    make_power_law,
)
from .variational import (
    ConstraintSpec,
    ProjectionResult,
    constraint_gradient,
    f_eval,
    f_gradient,
    force_integral_floor,
    g_eval,
    g_scale_derivative,
    project_to_constraint,
    tangent_project,
    value_and_gradients,
)

__version__ = "0.1.0"

__all__ = [
    "AntiperiodicLoop",
    "BUILTIN_FACTORIES",
    "ConditionReport",
    "ConfigError",
    "ConstraintSpec",
    "DegenerateLoop",
    "EnorbitError",
    "GridTooCoarse",
    "GrowthParams",
    "IntegratorBlowup",
    "InvalidParameter",
    "MultiStartResult",
    "NoConvergedStart",
    "NonMonotoneScaling",
    "NonpositiveForce",
    "OrbitSolution",
    "PotentialModel",
    "ProjectionResult",
    "RootNotBracketed",
    "SampleGrid",
    "SolverConfig",
    "SolverReport",
    "StallError",
    "StartOutcome",
    "VanishingConstraintGradient",
    "Verdict",
    "backend_name",
    "check_conditions",
    "coefficient_adjoint",
    "constraint_gradient",
    "f_eval",
    "f_gradient",
    "force_integral_floor",
    "g_eval",
    "g_scale_derivative",
    "grid_for",
    "kinetic_norm",
    "make_combined",
    "make_exp_well",
    "make_power_law",
    "minimize",
    "multi_start",
    "project_to_constraint",
    "quadrature",
    "random_loop",
    "recover_period",
    "rescale",
    "synthesize",
    "synthesize_at",
    "synthesize_velocity",
    "tangent_project",
    "value_and_gradients",
    "verify_by_integration",
    "__version__",
]
