"""Monotone and backtracking Frank-Wolfe variants for self-concordant-type objectives."""

from .algorithms import (
    ALGORITHMS,
    StopCriteria,
    run_bafw,
    run_bfw,
    run_halving_mfw,
    run_mfw,
    run_stateless_mfw,
)
from .core import (
    CountedObjective,
    DomainError,
    GscParams,
    IterationRecord,
    Objective,
    OracleCounters,
    RunTrace,
    StepType,
    TerminalStatus,
    counted_objective,
)
from .lmo import ActiveSet, Birkhoff, L1Ball, ProbabilitySimplex, UnitSimplex
from .stepsize import BacktrackConfig

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "ActiveSet",
    "BacktrackConfig",
    "Birkhoff",
    "CountedObjective",
    "DomainError",
    "GscParams",
    "IterationRecord",
    "L1Ball",
    "Objective",
    "OracleCounters",
    "ProbabilitySimplex",
    "RunTrace",
    "StepType",
    "StopCriteria",
    "TerminalStatus",
    "UnitSimplex",
    "counted_objective",
    "run_bafw",
    "run_bfw",
    "run_halving_mfw",
    "run_mfw",
    "run_stateless_mfw",
]
