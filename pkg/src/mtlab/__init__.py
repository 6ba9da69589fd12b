"""Metamorphic testing of a small linear-algebra library under operator mutation."""

from .errors import DimensionError, ExecutionBudgetExceeded, MTLabError, SingularMatrixError, UndefinedMetricError
from .experiment import RunConfig, run_experiment
from .harness import (
    KillMatrix,
    MetricsReport,
    compare_reports,
    fault_detection_ratio,
    mutation_score,
    run_baseline_campaign,
    run_mt_campaign,
)
from .matrix import Matrix
from .mutation import Mutant, MutationContext, enumerate_sites, generate_mutants, run_with_mutant
from .relations import CATALOG, aggregate, check_relation, screen_applicability, transform_source
from .solvers import SolveResult, Vector, solve_forward_back_substitution, solve_least_squares, solve_square_root
from .subjects import METHODS, SourceTestCase, generate_suite

__all__ = [
    "CATALOG",
    "DimensionError",
    "ExecutionBudgetExceeded",
    "KillMatrix",
    "METHODS",
    "MTLabError",
    "Matrix",
    "MetricsReport",
    "Mutant",
    "MutationContext",
    "RunConfig",
    "SingularMatrixError",
    "SolveResult",
    "SourceTestCase",
    "UndefinedMetricError",
    "Vector",
    "aggregate",
    "check_relation",
    "compare_reports",
    "enumerate_sites",
    "fault_detection_ratio",
    "generate_mutants",
    "generate_suite",
    "mutation_score",
    "run_baseline_campaign",
    "run_experiment",
    "run_mt_campaign",
    "run_with_mutant",
    "screen_applicability",
    "solve_forward_back_substitution",
    "solve_least_squares",
    "solve_square_root",
    "transform_source",
]
