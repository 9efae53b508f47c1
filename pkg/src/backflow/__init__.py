"""Maximum quantum probability backflow as a function of the momentum cutoff."""

from .discretize import (
    DiscretizedOperator,
    OperatorSpec,
    QuadratureGrid,
    assemble_operator,
    build_grid,
    discretize,
)
from .eigensolve import (
    ConvergedEstimate,
    ConvergenceControl,
    SpectralResult,
    converge_lambda_max,
    final_operator,
    largest_eigenpair,
)
from .estimator import BackflowCurve
from .exceptions import BudgetExceededError, ConvergenceError, DomainError, TruncationError
from .kernel import PhysicalParams, dimensionless_cutoff, kernel_eval, sinc_stable
from .sweep import (
    ClassicalFamily,
    SweepResult,
    SymmetryReport,
    classical_family,
    classical_step,
    find_half_crossing,
    sweep_lambda_max,
    symmetry_residuals,
)
from .validate import (
    ExtremalState,
    PositionGrid,
    TransportResult,
    extremal_state,
    rayleigh_quotient,
    transport_backflow,
)

__version__ = "0.1.0"

__all__ = [
    "BackflowCurve",
    "BudgetExceededError",
    "ClassicalFamily",
    "ConvergedEstimate",
    "ConvergenceControl",
    "ConvergenceError",
    "DiscretizedOperator",
    "DomainError",
    "ExtremalState",
    "OperatorSpec",
    "PhysicalParams",
    "PositionGrid",
    "QuadratureGrid",
    "SpectralResult",
    "SweepResult",
    "SymmetryReport",
    "TransportResult",
    "TruncationError",
    "assemble_operator",
    "build_grid",
    "classical_family",
    "classical_step",
    "converge_lambda_max",
    "dimensionless_cutoff",
    "discretize",
    "extremal_state",
    "final_operator",
    "find_half_crossing",
    "kernel_eval",
    "largest_eigenpair",
    "rayleigh_quotient",
    "sinc_stable",
    "sweep_lambda_max",
    "symmetry_residuals",
    "transport_backflow",
]
