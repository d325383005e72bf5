"""Synthetic ground truth, budget allocation, query sampling, and observation generation.

Implements the elicitation protocol used by the experiment harness: a budget
is split between comparisons and ratings by a fraction ``p_c`` under per-query
costs, queries are drawn uniformly (or actively, weighted by provisional
scores), and observed values are sampled from the tilted root laws at the
hidden ground-truth scores.  All sampling is driven by an explicit generator;
identical seeds reproduce identical datasets byte for byte.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from scora.core import Dataset, Embedding, ScoraModel
from scora.rootlaw import RootLaw
from scora.solver import SolverConfig, solve_map


@dataclass(frozen=True)
class GroundTruth:
    """Hidden parameters a synthetic run tries to recover."""

    beta: np.ndarray
    theta0: float
    scores: np.ndarray


@dataclass(frozen=True)
class BudgetPlan:
    """Counts of comparisons and ratings affordable under a budget split."""

    budget: float
    fraction_comparisons: float
    cost_comparison: float
    cost_rating: float
    n_comparisons: int
    n_ratings: int


def allocate_budget(
    budget: float,
    fraction_comparisons: float,
    cost_comparison: float,
    cost_rating: float,
) -> BudgetPlan:
    """Split the budget: floor(p_c b / c_c) comparisons, floor((1-p_c) b / c_r) ratings."""
    if not budget > 0:
        raise ValueError(f"budget must be positive, got {budget}")
    if not (cost_comparison > 0 and cost_rating > 0):
        raise ValueError("costs must be positive")
    if not 0.0 <= fraction_comparisons <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction_comparisons}")
    return BudgetPlan(
        budget=budget,
        fraction_comparisons=fraction_comparisons,
        cost_comparison=cost_comparison,
        cost_rating=cost_rating,
        n_comparisons=math.floor(fraction_comparisons * budget / cost_comparison),
        n_ratings=math.floor((1.0 - fraction_comparisons) * budget / cost_rating),
    )


@dataclass(frozen=True)
class PriorSpec:
    """Generative family for the hidden coordinates.

    ``scale`` is the variance of the Gaussian family or the scale of the
    Cauchy family; the threshold is always Gaussian with its own variance.
    """

    family: str = "gaussian"
    scale: float = 1.0
    threshold_variance: float = 1.0

    def __post_init__(self):
        if self.family not in ("gaussian", "cauchy"):
            raise ValueError(f"unknown prior family {self.family!r}")
        if not (self.scale > 0 and self.threshold_variance > 0):
            raise ValueError("prior scale and threshold variance must be positive")

    @property
    def token(self) -> str:
        return f"{self.family}:{self.scale:g}"


def parse_prior(token: str) -> PriorSpec:
    """Parse ``gaussian:<variance>`` or ``cauchy:<scale>`` (bare names mean 1)."""
    text = token.strip().lower()
    family, _, value = text.partition(":")
    return PriorSpec(family=family, scale=float(value) if value else 1.0)


def sample_ground_truth(
    prior: PriorSpec, embedding: Embedding, rng: np.random.Generator
) -> GroundTruth:
    """Draw hidden coordinates iid from the prior family and derive scores."""
    d = embedding.n_features
    if prior.family == "gaussian":
        beta = rng.normal(0.0, math.sqrt(prior.scale), size=d)
    else:
        beta = prior.scale * rng.standard_cauchy(size=d)
    theta0 = float(rng.normal(0.0, math.sqrt(prior.threshold_variance)))
    return GroundTruth(beta=beta, theta0=theta0, scores=embedding.scores(beta))


def save_ground_truth_csv(scores, path):
    """Write rows ``entity,theta_dagger`` for the hidden scores."""
    scores = np.asarray(scores, dtype=float).reshape(-1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["entity", "theta_dagger"])
        for entity, value in enumerate(scores):
            writer.writerow([entity, repr(float(value))])


def load_ground_truth_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"entity", "theta_dagger"}.issubset(
            reader.fieldnames
        ):
            raise ValueError(f"{path}: expected columns entity,theta_dagger")
        pairs = sorted((int(row["entity"]), float(row["theta_dagger"])) for row in reader)
    return np.array([value for _, value in pairs])


def sample_rating_queries(n: int, n_entities: int, rng: np.random.Generator) -> np.ndarray:
    """n entities drawn uniformly with replacement."""
    if n_entities < 1:
        raise ValueError("need at least one entity")
    return rng.integers(0, n_entities, size=n)


def sample_comparison_queries_uniform(
    n: int, n_entities: int, rng: np.random.Generator
) -> np.ndarray:
    """n unordered distinct pairs drawn uniformly with replacement, random order.

    Returns an (n, 2) index array.  Drawing the first entity uniformly and the
    second uniformly among the rest puts equal mass 2/(A(A-1)) on both
    orientations of every pair.
    """
    if n_entities < 2 and n > 0:
        raise ValueError("need at least two entities to sample comparisons")
    first = rng.integers(0, n_entities, size=n)
    second = rng.integers(0, n_entities - 1, size=n) if n else np.empty(0, dtype=np.int64)
    second = second + (second >= first)
    return np.column_stack([first, second]).astype(np.int64, copy=False)


def sample_comparison_queries_active(
    n: int, scores, rng: np.random.Generator
) -> np.ndarray:
    """n pairs drawn with probability proportional to exp(score_a + score_b).

    Enumerates all unordered distinct pairs explicitly and samples from the
    max-shifted categorical; orientation is randomized per draw.
    """
    scores = np.asarray(scores, dtype=float).reshape(-1)
    if len(scores) < 2 and n > 0:
        raise ValueError("need at least two entities to sample comparisons")
    if not np.all(np.isfinite(scores)):
        raise ValueError("provisional scores must be finite")
    if n == 0:
        return np.empty((0, 2), dtype=np.int64)
    left, right = np.triu_indices(len(scores), k=1)
    log_weights = scores[left] + scores[right]
    weights = np.exp(log_weights - log_weights.max())
    chosen = rng.choice(len(weights), size=n, p=weights / weights.sum())
    flip = rng.random(n) < 0.5
    first = np.where(flip, right[chosen], left[chosen])
    second = np.where(flip, left[chosen], right[chosen])
    return np.column_stack([first, second]).astype(np.int64, copy=False)


def generate_observations(
    rating_queries,
    comparison_queries,
    truth: GroundTruth,
    comparison_law: RootLaw,
    rating_law: RootLaw,
    rng: np.random.Generator,
) -> Dataset:
    """Sample observed values at the ground-truth scores (ratings drawn first)."""
    rating_queries = np.asarray(rating_queries, dtype=np.int64).reshape(-1)
    comparison_queries = np.asarray(comparison_queries, dtype=np.int64).reshape(-1, 2)
    rating_values = rating_law.sample_tilted(
        truth.scores[rating_queries] - truth.theta0, rng
    )
    comparison_values = comparison_law.sample_tilted(
        truth.scores[comparison_queries[:, 0]] - truth.scores[comparison_queries[:, 1]],
        rng,
    )
    return Dataset(
        rating_entities=rating_queries,
        rating_values=np.atleast_1d(rating_values),
        comparison_first=comparison_queries[:, 0],
        comparison_second=comparison_queries[:, 1],
        comparison_values=np.atleast_1d(comparison_values),
    )


def build_one_hot_embedding(
    n_entities: int, n_clusters: int, rng: np.random.Generator
) -> tuple[Embedding, np.ndarray]:
    """Identity block stacked on a one-hot cluster indicator block.

    Every entity keeps its own coordinate and shares one of ``n_clusters``
    offset coordinates; cluster membership is uniform iid.  Returns the
    (A + n_clusters) x A embedding and the cluster assignment.
    """
    if n_entities < 1 or n_clusters < 1:
        raise ValueError("need at least one entity and one cluster")
    clusters = rng.integers(0, n_clusters, size=n_entities)
    matrix = np.zeros((n_entities + n_clusters, n_entities))
    matrix[:n_entities, :] = np.eye(n_entities)
    matrix[n_entities + clusters, np.arange(n_entities)] = 1.0
    return Embedding(matrix), clusters


@dataclass(frozen=True)
class ActiveLearningPlan:
    """Two-phase elicitation: cheap first phase, score-guided comparisons second.

    The first phase spends the (1 - p_c) share of the budget on ratings (or on
    uniformly sampled comparisons), fits provisional scores, and the second
    phase spends the p_c share on comparisons whose pairs are drawn with
    probability proportional to exp of the provisional score sum.
    """

    first_phase: str = "ratings"

    def __post_init__(self):
        if self.first_phase not in ("ratings", "comparisons"):
            raise ValueError(f"unknown first phase {self.first_phase!r}")


def run_active_pipeline(
    model: ScoraModel,
    truth: GroundTruth,
    gen_comparison_law: RootLaw,
    gen_rating_law: RootLaw,
    budget: float,
    fraction_comparisons: float,
    cost_comparison: float,
    cost_rating: float,
    plan: ActiveLearningPlan,
    rng: np.random.Generator,
    solver_config: SolverConfig | None = None,
) -> tuple[Dataset, np.ndarray]:
    """Run both phases; returns (all collected data, provisional scores).

    Phase-1 observations are retained in the returned dataset.  With a zero
    first-phase budget the provisional scores are the prior mode (all zeros),
    which makes the active sampler uniform.
    """
    n_entities = model.embedding.n_entities
    n_active = math.floor(fraction_comparisons * budget / cost_comparison)
    first_phase_budget = (1.0 - fraction_comparisons) * budget
    if plan.first_phase == "ratings":
        n_first = math.floor(first_phase_budget / cost_rating)
        phase1 = generate_observations(
            sample_rating_queries(n_first, n_entities, rng),
            np.empty((0, 2), dtype=np.int64),
            truth,
            gen_comparison_law,
            gen_rating_law,
            rng,
        )
    else:
        n_first = math.floor(first_phase_budget / cost_comparison)
        phase1 = generate_observations(
            np.empty(0, dtype=np.int64),
            sample_comparison_queries_uniform(n_first, n_entities, rng),
            truth,
            gen_comparison_law,
            gen_rating_law,
            rng,
        )
    if phase1.n_observations:
        provisional = solve_map(model, phase1, solver_config).scores_star
    else:
        provisional = np.zeros(n_entities)
    pairs = sample_comparison_queries_active(n_active, provisional, rng)
    phase2 = generate_observations(
        np.empty(0, dtype=np.int64),
        pairs,
        truth,
        gen_comparison_law,
        gen_rating_law,
        rng,
    )
    return phase1.combined(phase2), provisional
