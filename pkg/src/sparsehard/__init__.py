"""Constraint systems compiled into provably incoherent dictionaries,
with exact coherence analysis, greedy pursuit solvers, and brute-force
oracles for desk-scale completeness/soundness experiments."""

from .errors import (
    BudgetExceededError,
    DimensionError,
    GadgetShapeError,
    IncompleteAssignmentError,
    MalformedFormulaError,
    ParameterError,
)
from .harness import ExperimentConfig, GapReport, run_pipeline, solve_sparse_instance
from .label_cover import (
    Assignment,
    LabelCoverInstance,
    Max3SatFormula,
    MultilayeredInstance,
    brute_force_optimum,
    evaluate,
    evaluate_strong,
    generate,
    max3sat_to_label_cover,
    multilayer,
    parallel_repetition,
    random_max3sat,
    smoothness,
)
from .reduction import (
    CoherenceReport,
    SparseInstance,
    SupportColumn,
    assignment_to_support,
    coherence,
    coverage_fraction,
    reduce_multilayered_smooth,
    reduce_multilayered_unique,
    reduce_two_layered,
)
from .serialize import load_file, save_file
from .solvers import (
    SolverResult,
    brute_force_sparse,
    lebesgue_check,
    omp,
    ols,
    restricted_least_squares,
)
from .vector_systems import (
    Codeword,
    HadamardCodeSet,
    IncoherentVectorSystem,
    build_hadamard_code_set,
    build_incoherent_vector_system,
    complement,
    dot,
    verify_system,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BudgetExceededError",
    "Codeword",
    "CoherenceReport",
    "DimensionError",
    "ExperimentConfig",
    "GadgetShapeError",
    "GapReport",
    "HadamardCodeSet",
    "IncoherentVectorSystem",
    "IncompleteAssignmentError",
    "LabelCoverInstance",
    "MalformedFormulaError",
    "Max3SatFormula",
    "MultilayeredInstance",
    "ParameterError",
    "SolverResult",
    "SparseInstance",
    "SupportColumn",
    "assignment_to_support",
    "brute_force_optimum",
    "brute_force_sparse",
    "build_hadamard_code_set",
    "build_incoherent_vector_system",
    "coherence",
    "complement",
    "coverage_fraction",
    "dot",
    "evaluate",
    "evaluate_strong",
    "generate",
    "lebesgue_check",
    "load_file",
    "max3sat_to_label_cover",
    "multilayer",
    "omp",
    "ols",
    "parallel_repetition",
    "random_max3sat",
    "reduce_multilayered_smooth",
    "reduce_multilayered_unique",
    "reduce_two_layered",
    "restricted_least_squares",
    "run_pipeline",
    "save_file",
    "smoothness",
    "solve_sparse_instance",
    "verify_system",
]
