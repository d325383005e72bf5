"""Scoring entities from mixed ratings and pairwise comparisons.

Latent scores are recovered by MAP estimation of a strongly convex negative
log-posterior in which both comparisons and ratings are generalized
Bradley-Terry observations; ratings compare an entity against a learned
threshold.  The package also ships the synthetic-experiment harness and the
property suites that verify the estimator's structural guarantees.
"""

from scora.core import (
    Comparison,
    Dataset,
    Embedding,
    FlexModel,
    FlexObservation,
    Rating,
    ScoraModel,
    flexible_gradient,
    flexible_loss,
    scora_gradient,
    scora_loss,
    to_flexible,
)
from scora.experiments import (
    ExperimentConfig,
    ResultRow,
    default_convergence_config,
    default_sweetspot_config,
    read_results_csv,
    run_convergence,
    run_sweetspot,
    write_results_csv,
)
from scora.metrics import UndefinedMetricError, pearson_corr, weighted_corr_exp
from scora.rootlaw import (
    ContinuousUniform,
    Gaussian,
    KAry,
    RootLaw,
    law_from_arity,
    parse_root_law,
)
from scora.solver import (
    ConvergenceError,
    MapResult,
    NumericalError,
    SolverConfig,
    SolverError,
    solve_map,
    solve_map_flexible,
)
from scora.synth import (
    ActiveLearningPlan,
    BudgetPlan,
    GroundTruth,
    PriorSpec,
    allocate_budget,
    build_one_hot_embedding,
    generate_observations,
    run_active_pipeline,
    sample_comparison_queries_active,
    sample_comparison_queries_uniform,
    sample_ground_truth,
    sample_rating_queries,
)

__all__ = [
    "ActiveLearningPlan",
    "BudgetPlan",
    "Comparison",
    "ContinuousUniform",
    "ConvergenceError",
    "Dataset",
    "Embedding",
    "ExperimentConfig",
    "FlexModel",
    "FlexObservation",
    "Gaussian",
    "GroundTruth",
    "KAry",
    "MapResult",
    "NumericalError",
    "PriorSpec",
    "Rating",
    "ResultRow",
    "RootLaw",
    "ScoraModel",
    "SolverConfig",
    "SolverError",
    "UndefinedMetricError",
    "allocate_budget",
    "build_one_hot_embedding",
    "default_convergence_config",
    "default_sweetspot_config",
    "flexible_gradient",
    "flexible_loss",
    "generate_observations",
    "law_from_arity",
    "parse_root_law",
    "pearson_corr",
    "read_results_csv",
    "run_active_pipeline",
    "run_convergence",
    "run_sweetspot",
    "sample_comparison_queries_active",
    "sample_comparison_queries_uniform",
    "sample_ground_truth",
    "sample_rating_queries",
    "scora_gradient",
    "scora_loss",
    "solve_map",
    "solve_map_flexible",
    "to_flexible",
    "weighted_corr_exp",
]
