"""Minimum relative-entropy projections (Kullback-Leibler and Tsallis) on finite spaces."""

from ._minrel import (
    ConvergenceError,
    DomainError,
    Error,
    GeometryReport,
    InfeasibleError,
    InvalidArgument,
    PreconditionError,
    SolveResult,
    __version__,
    brute_force_primal,
    q_exp,
    q_exp_by_limit,
    q_log,
    q_power_n,
    q_product,
    relative_entropy,
    run_cli,
    solve,
    thermodynamic_checks,
    triangle,
    tsallis_entropy,
    verify_classical_pythagoras,
)

__all__ = [
    "ConvergenceError",
    "DomainError",
    "Error",
    "GeometryReport",
    "InfeasibleError",
    "InvalidArgument",
    "PreconditionError",
    "SolveResult",
    "__version__",
    "brute_force_primal",
    "q_exp",
    "q_exp_by_limit",
    "q_log",
    "q_power_n",
    "q_product",
    "relative_entropy",
    "run_cli",
    "solve",
    "thermodynamic_checks",
    "triangle",
    "tsallis_entropy",
    "verify_classical_pythagoras",
]
