"""Seeded, repeatable experiment runs aggregated to CSV rows.

Two protocols are provided.  ``run_convergence`` sweeps budget and allocation
fraction with passive uniform queries and reports Pearson correlation against
the hidden scores.  ``run_sweetspot`` runs the two-phase active pipeline and
reports the exp-weighted correlation that emphasizes top entities.  Every
repetition derives its own generator from (base_seed, budget index, fraction
index, repetition), so runs are reproducible byte for byte and repetitions
are independent.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from scora.core import Embedding, ScoraModel
from scora.metrics import UndefinedMetricError, pearson_corr, weighted_corr_exp
from scora.rootlaw import RootLaw, law_from_arity, parse_root_law
from scora.solver import SolverConfig, SolverError, solve_map
from scora.synth import (
    ActiveLearningPlan,
    PriorSpec,
    allocate_budget,
    build_one_hot_embedding,
    generate_observations,
    parse_prior,
    run_active_pipeline,
    sample_comparison_queries_uniform,
    sample_ground_truth,
    sample_rating_queries,
)

# Run-scale solves: at 1e5 observations the loss carries eps-level noise that
# makes tighter infinity-norm gradients meaningless for correlation metrics.
RUN_SOLVER = SolverConfig(gradient_tolerance=1e-6)

_DEFAULT_CONVERGENCE_BUDGETS = tuple(float(10.0**e) for e in
                                     (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0))
_DEFAULT_FRACTION_SWEEP = tuple(round(0.1 * i, 1) for i in range(11))

_PIPELINES = ("passive", "active:ratings", "active:comparisons")


def _as_tuple(value) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(v) for v in value)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines one experiment sweep.

    ``b`` and ``p_c`` may be scalars or sweep lists.  ``k_c``/``k_r`` control
    the generating root laws (integer arity or "uniform"); ``inference_laws``
    optionally overrides the laws used for fitting (model-mismatch runs) with
    a (comparison, rating) pair of root-law tokens.
    """

    A: int = 100
    embedding_scheme: str = "identity"
    k_c: int | str = "uniform"
    k_r: int | str = "uniform"
    inference_laws: tuple[str, str] | None = None
    prior: str = "gaussian:1"
    prior_threshold_var: float = 1.0
    b: tuple[float, ...] = _DEFAULT_CONVERGENCE_BUDGETS
    p_c: tuple[float, ...] = (0.0, 0.5, 1.0)
    c_c: float = 1.0
    c_r: float = 1.0
    pipeline: str = "passive"
    repetitions: int = 20
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "b", _as_tuple(self.b))
        object.__setattr__(self, "p_c", _as_tuple(self.p_c))
        if not self.b or not self.p_c:
            raise ValueError("budget and fraction sweeps must be nonempty")
        if any(not 0.0 <= p <= 1.0 for p in self.p_c):
            raise ValueError("fractions must lie in [0, 1]")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be nonnegative")
        if self.A < 2:
            raise ValueError("need at least two entities")
        if self.pipeline not in _PIPELINES:
            raise ValueError(f"pipeline must be one of {_PIPELINES}")
        if not (self.embedding_scheme == "identity"
                or self.embedding_scheme.startswith("onehot:")):
            raise ValueError(f"unknown embedding scheme {self.embedding_scheme!r}")
        if self.inference_laws is not None:
            pair = tuple(self.inference_laws)
            if len(pair) != 2:
                raise ValueError("inference_laws needs a (comparison, rating) pair")
            object.__setattr__(self, "inference_laws", pair)
        parse_prior(self.prior)  # validates

    # --- derived pieces -------------------------------------------------

    @property
    def generation_laws(self) -> tuple[RootLaw, RootLaw]:
        return law_from_arity(self.k_c), law_from_arity(self.k_r)

    @property
    def fitting_laws(self) -> tuple[RootLaw, RootLaw]:
        if self.inference_laws is None:
            return self.generation_laws
        return parse_root_law(self.inference_laws[0]), parse_root_law(self.inference_laws[1])

    @property
    def prior_spec(self) -> PriorSpec:
        spec = parse_prior(self.prior)
        return replace(spec, threshold_variance=self.prior_threshold_var)

    @property
    def fitting_prior_variances(self) -> tuple[float, float]:
        """Inference prior variances: match a Gaussian generator, stay at 1
        under the heavy-tailed generator (deliberate mismatch)."""
        spec = self.prior_spec
        if spec.family == "gaussian":
            return spec.scale, spec.threshold_variance
        return 1.0, spec.threshold_variance

    def build_embedding(self, rng) -> Embedding:
        if self.embedding_scheme == "identity":
            return Embedding.identity(self.A)
        n_clusters = int(self.embedding_scheme.split(":", 1)[1])
        embedding, _ = build_one_hot_embedding(self.A, n_clusters, rng)
        return embedding


def default_convergence_config(**overrides) -> ExperimentConfig:
    """Passive uniform elicitation over the logarithmic budget grid."""
    return ExperimentConfig(**overrides)


def default_sweetspot_config(**overrides) -> ExperimentConfig:
    """Active ratings-first elicitation, heavy-tailed truth, binary laws."""
    settings = dict(
        embedding_scheme="onehot:5",
        k_c=2,
        k_r=2,
        prior="cauchy:1",
        b=(1e5,),
        p_c=_DEFAULT_FRACTION_SWEEP,
        c_c=8.0,
        c_r=1.0,
        pipeline="active:ratings",
    )
    settings.update(overrides)
    return ExperimentConfig(**settings)


@dataclass(frozen=True)
class ResultRow:
    """Aggregated metric at one sweep point, with enough echo to rerun it."""

    b: float
    p_c: float
    metric: str
    mean: float
    ci95: float
    n_success: int
    n_failed: int
    embedding: str
    f: str
    g: str
    k_c: str
    k_r: str
    prior: str
    c_c: float
    c_r: float
    pipeline: str
    repetitions: int
    base_seed: int
    mean_iterations: float
    max_gradient_norm: float


RESULT_COLUMNS = [f.name for f in fields(ResultRow)]


def repetition_rng(base_seed: int, b_index: int, pc_index: int, repetition: int):
    """Independent stream per repetition of one sweep point."""
    return np.random.default_rng(
        np.random.SeedSequence((base_seed, b_index, pc_index, repetition))
    )


def _aggregate(values: list[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    mean = float(np.mean(values))
    if len(values) < 2:
        return mean, math.nan
    return mean, float(1.96 * np.std(values, ddof=1) / math.sqrt(len(values)))


def _sweep(config: ExperimentConfig, metric_name: str, one_repetition) -> list[ResultRow]:
    """Shared sweep/aggregation loop.

    ``one_repetition(rng, b, p_c)`` returns (metric value, solve result); the
    final fit's iteration count and gradient norm are aggregated into the row
    as diagnostics.
    """
    laws = config.fitting_laws
    rows = []
    for b_index, budget in enumerate(config.b):
        for pc_index, fraction in enumerate(config.p_c):
            values: list[float] = []
            iteration_counts: list[int] = []
            worst_gradient = 0.0
            failed = 0
            for repetition in range(config.repetitions):
                rng = repetition_rng(config.base_seed, b_index, pc_index, repetition)
                try:
                    value, solve_result = one_repetition(rng, budget, fraction)
                except (UndefinedMetricError, SolverError):
                    failed += 1
                    continue
                values.append(value)
                iteration_counts.append(solve_result.iterations)
                worst_gradient = max(worst_gradient, solve_result.final_gradient_norm)
            mean, ci95 = _aggregate(values)
            rows.append(
                ResultRow(
                    b=budget,
                    p_c=fraction,
                    metric=metric_name,
                    mean=mean,
                    ci95=ci95,
                    n_success=len(values),
                    n_failed=failed,
                    embedding=config.embedding_scheme,
                    f=laws[0].token,
                    g=laws[1].token,
                    k_c=str(config.k_c),
                    k_r=str(config.k_r),
                    prior=config.prior_spec.token,
                    c_c=config.c_c,
                    c_r=config.c_r,
                    pipeline=config.pipeline,
                    repetitions=config.repetitions,
                    base_seed=config.base_seed,
                    mean_iterations=float(np.mean(iteration_counts)) if iteration_counts else math.nan,
                    max_gradient_norm=worst_gradient if iteration_counts else math.nan,
                )
            )
    return rows


def _build_model(config: ExperimentConfig, embedding: Embedding) -> ScoraModel:
    comparison_law, rating_law = config.fitting_laws
    var_beta, var_threshold = config.fitting_prior_variances
    return ScoraModel(embedding, comparison_law, rating_law, var_beta, var_threshold)


def run_convergence(config: ExperimentConfig) -> list[ResultRow]:
    """Passive protocol: uniform queries, Pearson correlation per sweep point.

    A nonpositive budget yields no observations, an all-zero estimate, and an
    undefined correlation; such repetitions count as failed rather than fatal.
    """
    if config.pipeline != "passive":
        raise ValueError("run_convergence needs pipeline='passive'")
    gen_comparison, gen_rating = config.generation_laws

    def one_repetition(rng, budget, fraction) -> float:
        embedding = config.build_embedding(rng)
        truth = sample_ground_truth(config.prior_spec, embedding, rng)
        if budget > 0:
            plan = allocate_budget(budget, fraction, config.c_c, config.c_r)
            n_comparisons, n_ratings = plan.n_comparisons, plan.n_ratings
        else:
            n_comparisons = n_ratings = 0
        dataset = generate_observations(
            sample_rating_queries(n_ratings, config.A, rng),
            sample_comparison_queries_uniform(n_comparisons, config.A, rng),
            truth,
            gen_comparison,
            gen_rating,
            rng,
        )
        result = solve_map(_build_model(config, embedding), dataset, RUN_SOLVER)
        return pearson_corr(result.scores_star, truth.scores), result

    return _sweep(config, "corr", one_repetition)


def run_sweetspot(config: ExperimentConfig) -> list[ResultRow]:
    """Active two-phase protocol, exp-weighted correlation per sweep point."""
    if config.pipeline == "passive":
        raise ValueError("run_sweetspot needs an active pipeline")
    plan = ActiveLearningPlan(config.pipeline.split(":", 1)[1])
    gen_comparison, gen_rating = config.generation_laws

    def one_repetition(rng, budget, fraction) -> float:
        embedding = config.build_embedding(rng)
        truth = sample_ground_truth(config.prior_spec, embedding, rng)
        model = _build_model(config, embedding)
        dataset, _ = run_active_pipeline(
            model,
            truth,
            gen_comparison,
            gen_rating,
            budget,
            fraction,
            config.c_c,
            config.c_r,
            plan,
            rng,
            RUN_SOLVER,
        )
        result = solve_map(model, dataset, RUN_SOLVER)
        return weighted_corr_exp(result.scores_star, truth.scores), result

    return _sweep(config, "corr_exp", one_repetition)


# ---------------------------------------------------------------------------
# CSV and config-file plumbing
# ---------------------------------------------------------------------------


def write_results_csv(rows: list[ResultRow], path):
    """Stable float formatting (repr) so identical runs give identical bytes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            record = []
            for name in RESULT_COLUMNS:
                value = getattr(row, name)
                record.append(repr(value) if isinstance(value, float) else value)
            writer.writerow(record)


def read_results_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RESULT_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing result columns {sorted(missing)}")
        for record in reader:
            rows.append(
                ResultRow(
                    b=float(record["b"]),
                    p_c=float(record["p_c"]),
                    metric=record["metric"],
                    mean=float(record["mean"]),
                    ci95=float(record["ci95"]),
                    n_success=int(record["n_success"]),
                    n_failed=int(record["n_failed"]),
                    embedding=record["embedding"],
                    f=record["f"],
                    g=record["g"],
                    k_c=record["k_c"],
                    k_r=record["k_r"],
                    prior=record["prior"],
                    c_c=float(record["c_c"]),
                    c_r=float(record["c_r"]),
                    pipeline=record["pipeline"],
                    repetitions=int(record["repetitions"]),
                    base_seed=int(record["base_seed"]),
                    mean_iterations=float(record["mean_iterations"]),
                    max_gradient_norm=float(record["max_gradient_norm"]),
                )
            )
    return rows


_CONFIG_FIELDS = {f.name for f in fields(ExperimentConfig)}


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build a config from flat key/value pairs (TOML table or overrides)."""
    unknown = set(mapping) - _CONFIG_FIELDS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    values = dict(mapping)
    if "inference_laws" in values and values["inference_laws"] is not None:
        values["inference_laws"] = tuple(values["inference_laws"])
    return ExperimentConfig(**values)


def load_config_file(path) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python 3.10
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)
