"""Hybrid optimal control of a four-phase epidemic intervention model."""

from .errors import (
    ConfigError,
    HocpError,
    InfeasibleScheduleError,
    NoCrossingError,
    TransversalityError,
)
from .hybrid import (
    HybridSystemDefinition,
    ModeId,
    ModeSpec,
    TransitionKind,
    TransitionSpec,
    ValidationReport,
    apply_jump,
    manifold_value,
    validate_system,
)
from .model import (
    ControlBounds,
    EpiModel,
    EpiParams,
    PhaseWeights,
    TerminalWeights,
    Thresholds,
    build_system,
    paper_model,
    paper_weights,
)
from .solver import (
    AdjointTrajectory,
    ControlProfile,
    CostBreakdown,
    GradientCheck,
    GridSearchResult,
    HybridTrajectory,
    IterationRecord,
    Solution,
    SolverConfig,
    backward_pass,
    evaluate_cost,
    forward_pass,
    gradient_check_x0,
    grid_search_ts2,
    hamiltonian_gap,
    simulate,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "AdjointTrajectory",
    "ConfigError",
    "ControlBounds",
    "ControlProfile",
    "CostBreakdown",
    "EpiModel",
    "EpiParams",
    "GradientCheck",
    "GridSearchResult",
    "HocpError",
    "HybridSystemDefinition",
    "HybridTrajectory",
    "InfeasibleScheduleError",
    "IterationRecord",
    "ModeId",
    "ModeSpec",
    "NoCrossingError",
    "PhaseWeights",
    "Solution",
    "SolverConfig",
    "TerminalWeights",
    "Thresholds",
    "TransitionKind",
    "TransitionSpec",
    "TransversalityError",
    "ValidationReport",
    "apply_jump",
    "backward_pass",
    "build_system",
    "evaluate_cost",
    "forward_pass",
    "gradient_check_x0",
    "grid_search_ts2",
    "hamiltonian_gap",
    "manifold_value",
    "paper_model",
    "paper_weights",
    "simulate",
    "solve",
    "validate_system",
    "__version__",
]
