"""Observations, embeddings, and the negative log-posterior machinery.

Two model surfaces live here.  The primary one scores ``A`` entities through a
``D x A`` embedding from two observation kinds: pairwise comparisons between
entities, and ratings interpreted as comparisons against a shared learned
threshold.  The second is the comparison-only formulation with per-observation
root laws and a diagonal Gaussian prior; the primary model reduces to it
exactly by augmenting the embedding with one threshold coordinate, and
``to_flexible`` performs that reduction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from scora.rootlaw import RootLaw


@dataclass(frozen=True)
class Rating:
    """A single rating of ``entity`` with value drawn from the rating law."""

    entity: int
    value: float


@dataclass(frozen=True)
class Comparison:
    """A single comparison of ``first`` against ``second`` (indices differ)."""

    first: int
    second: int
    value: float


def _int_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    return arr.reshape(-1)


def _float_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    return arr.reshape(-1)


@dataclass(frozen=True)
class Dataset:
    """Flat multisets of ratings and comparisons (duplicates allowed).

    Stored as column arrays for fast repeated loss evaluation; ``ratings`` and
    ``comparisons`` expose the observation-level view.  Instances are
    immutable; the ``adding_*`` / ``without_*`` / ``with_*`` helpers build
    edited copies for sensitivity experiments.
    """

    rating_entities: np.ndarray = field(default_factory=lambda: _int_array([]))
    rating_values: np.ndarray = field(default_factory=lambda: _float_array([]))
    comparison_first: np.ndarray = field(default_factory=lambda: _int_array([]))
    comparison_second: np.ndarray = field(default_factory=lambda: _int_array([]))
    comparison_values: np.ndarray = field(default_factory=lambda: _float_array([]))

    def __post_init__(self):
        object.__setattr__(self, "rating_entities", _int_array(self.rating_entities))
        object.__setattr__(self, "rating_values", _float_array(self.rating_values))
        object.__setattr__(self, "comparison_first", _int_array(self.comparison_first))
        object.__setattr__(self, "comparison_second", _int_array(self.comparison_second))
        object.__setattr__(self, "comparison_values", _float_array(self.comparison_values))
        if len(self.rating_entities) != len(self.rating_values):
            raise ValueError("rating column lengths differ")
        if not (
            len(self.comparison_first)
            == len(self.comparison_second)
            == len(self.comparison_values)
        ):
            raise ValueError("comparison column lengths differ")
        if np.any(self.comparison_first == self.comparison_second):
            raise ValueError("comparisons must involve two distinct entities")

    @classmethod
    def empty(cls) -> "Dataset":
        return cls()

    @classmethod
    def build(cls, ratings=(), comparisons=()) -> "Dataset":
        """Create from iterables of (entity, value) and (first, second, value)."""
        ratings = list(ratings)
        comparisons = list(comparisons)
        return cls(
            rating_entities=[r[0] for r in ratings],
            rating_values=[r[1] for r in ratings],
            comparison_first=[c[0] for c in comparisons],
            comparison_second=[c[1] for c in comparisons],
            comparison_values=[c[2] for c in comparisons],
        )

    @property
    def n_ratings(self) -> int:
        return len(self.rating_entities)

    @property
    def n_comparisons(self) -> int:
        return len(self.comparison_first)

    @property
    def n_observations(self) -> int:
        return self.n_ratings + self.n_comparisons

    @property
    def ratings(self) -> list[Rating]:
        return [
            Rating(int(a), float(t))
            for a, t in zip(self.rating_entities, self.rating_values)
        ]

    @property
    def comparisons(self) -> list[Comparison]:
        return [
            Comparison(int(b), int(c), float(r))
            for b, c, r in zip(
                self.comparison_first, self.comparison_second, self.comparison_values
            )
        ]

    @cached_property
    def _index_range(self) -> tuple[int, int]:
        lows, highs = [0], [-1]
        for arr in (self.rating_entities, self.comparison_first, self.comparison_second):
            if len(arr):
                lows.append(int(arr.min()))
                highs.append(int(arr.max()))
        return min(lows), max(highs)

    def validate_entities(self, n_entities: int):
        low, high = self._index_range
        if low < 0 or high >= n_entities:
            raise ValueError(
                f"dataset references entities outside [0, {n_entities}): "
                f"saw indices in [{low}, {high}]"
            )

    def combined(self, other: "Dataset") -> "Dataset":
        return Dataset(
            np.concatenate([self.rating_entities, other.rating_entities]),
            np.concatenate([self.rating_values, other.rating_values]),
            np.concatenate([self.comparison_first, other.comparison_first]),
            np.concatenate([self.comparison_second, other.comparison_second]),
            np.concatenate([self.comparison_values, other.comparison_values]),
        )

    def adding_rating(self, entity: int, value: float) -> "Dataset":
        return Dataset(
            np.append(self.rating_entities, entity),
            np.append(self.rating_values, value),
            self.comparison_first,
            self.comparison_second,
            self.comparison_values,
        )

    def adding_comparison(self, first: int, second: int, value: float) -> "Dataset":
        return Dataset(
            self.rating_entities,
            self.rating_values,
            np.append(self.comparison_first, first),
            np.append(self.comparison_second, second),
            np.append(self.comparison_values, value),
        )

    def with_rating_value(self, index: int, value: float) -> "Dataset":
        values = self.rating_values.copy()
        values[index] = value
        return Dataset(
            self.rating_entities,
            values,
            self.comparison_first,
            self.comparison_second,
            self.comparison_values,
        )

    def with_comparison_value(self, index: int, value: float) -> "Dataset":
        values = self.comparison_values.copy()
        values[index] = value
        return Dataset(
            self.rating_entities,
            self.rating_values,
            self.comparison_first,
            self.comparison_second,
            values,
        )

    def without_rating(self, index: int) -> "Dataset":
        return Dataset(
            np.delete(self.rating_entities, index),
            np.delete(self.rating_values, index),
            self.comparison_first,
            self.comparison_second,
            self.comparison_values,
        )

    def without_comparison(self, index: int) -> "Dataset":
        return Dataset(
            self.rating_entities,
            self.rating_values,
            np.delete(self.comparison_first, index),
            np.delete(self.comparison_second, index),
            np.delete(self.comparison_values, index),
        )

    def to_csv(self, path):
        """Write rows ``kind,first,second,value``; ratings leave second empty."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["kind", "first", "second", "value"])
            for a, t in zip(self.rating_entities, self.rating_values):
                writer.writerow(["rating", int(a), "", repr(float(t))])
            for b, c, r in zip(
                self.comparison_first, self.comparison_second, self.comparison_values
            ):
                writer.writerow(["comparison", int(b), int(c), repr(float(r))])

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        ratings, comparisons = [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            expected = {"kind", "first", "second", "value"}
            if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
                raise ValueError(f"{path}: expected columns {sorted(expected)}")
            for row in reader:
                kind = row["kind"].strip()
                if kind == "rating":
                    ratings.append((int(row["first"]), float(row["value"])))
                elif kind == "comparison":
                    comparisons.append(
                        (int(row["first"]), int(row["second"]), float(row["value"]))
                    )
                else:
                    raise ValueError(f"{path}: unknown observation kind {kind!r}")
        return cls.build(ratings, comparisons)


@dataclass(frozen=True)
class Embedding:
    """Feature matrix with one column per entity (``D x A``)."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise ValueError(f"embedding must be a D x A matrix, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("embedding entries must be finite")
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, n_entities: int) -> "Embedding":
        return cls(np.eye(n_entities))

    @property
    def n_features(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_entities(self) -> int:
        return self.matrix.shape[1]

    def scores(self, beta) -> np.ndarray:
        """Latent scores of all entities: transpose(matrix) @ beta."""
        beta = _float_array(beta)
        if len(beta) != self.n_features:
            raise ValueError(
                f"beta has length {len(beta)}, embedding expects {self.n_features}"
            )
        return self.matrix.T @ beta

    @property
    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    @property
    def max_column_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.matrix, axis=0)))


@dataclass(frozen=True)
class ScoraModel:
    """Embedding, the two root laws, and the Gaussian prior variances."""

    embedding: Embedding
    comparison_law: RootLaw
    rating_law: RootLaw
    prior_var_beta: float = 1.0
    prior_var_threshold: float = 1.0

    def __post_init__(self):
        if not (self.prior_var_beta > 0 and self.prior_var_threshold > 0):
            raise ValueError("prior variances must be positive")

    @property
    def max_prior_var(self) -> float:
        return max(self.prior_var_beta, self.prior_var_threshold)


def _check_point(model: ScoraModel, dataset: Dataset, beta) -> np.ndarray:
    beta = _float_array(beta)
    if len(beta) != model.embedding.n_features:
        raise ValueError(
            f"beta has length {len(beta)}, expected {model.embedding.n_features}"
        )
    dataset.validate_entities(model.embedding.n_entities)
    return beta


def scora_loss(model: ScoraModel, dataset: Dataset, beta, theta0: float) -> float:
    """Negative log-posterior (up to an additive constant)."""
    beta = _check_point(model, dataset, beta)
    theta = model.embedding.scores(beta)
    total = 0.5 * float(beta @ beta) / model.prior_var_beta
    total += 0.5 * theta0**2 / model.prior_var_threshold
    if dataset.n_comparisons:
        z = theta[dataset.comparison_first] - theta[dataset.comparison_second]
        total += float(np.sum(model.comparison_law.cgf(z)) - dataset.comparison_values @ z)
    if dataset.n_ratings:
        z = theta[dataset.rating_entities] - theta0
        total += float(np.sum(model.rating_law.cgf(z)) - dataset.rating_values @ z)
    return total


def scora_gradient(
    model: ScoraModel, dataset: Dataset, beta, theta0: float
) -> tuple[np.ndarray, float]:
    """Exact gradient of ``scora_loss`` in (beta, theta0)."""
    beta = _check_point(model, dataset, beta)
    n = model.embedding.n_entities
    theta = model.embedding.scores(beta)
    per_entity = np.zeros(n)
    grad_theta0 = theta0 / model.prior_var_threshold
    if dataset.n_comparisons:
        z = theta[dataset.comparison_first] - theta[dataset.comparison_second]
        w = model.comparison_law.cgf_prime(z) - dataset.comparison_values
        per_entity += np.bincount(dataset.comparison_first, weights=w, minlength=n)
        per_entity -= np.bincount(dataset.comparison_second, weights=w, minlength=n)
    if dataset.n_ratings:
        z = theta[dataset.rating_entities] - theta0
        w = model.rating_law.cgf_prime(z) - dataset.rating_values
        per_entity += np.bincount(dataset.rating_entities, weights=w, minlength=n)
        grad_theta0 -= float(np.sum(w))
    grad_beta = beta / model.prior_var_beta + model.embedding.matrix @ per_entity
    return grad_beta, grad_theta0


def _pair_curvature_matrix(n, first, second, weights) -> np.ndarray:
    """Sum of w * (e_first - e_second)(e_first - e_second)^T as a dense matrix."""
    diag = np.bincount(first, weights=weights, minlength=n)
    diag += np.bincount(second, weights=weights, minlength=n)
    cross = np.bincount(first * n + second, weights=weights, minlength=n * n)
    cross = cross.reshape(n, n)
    matrix = -(cross + cross.T)
    matrix[np.diag_indices(n)] += diag
    return matrix


def scora_hessian(model: ScoraModel, dataset: Dataset, beta, theta0: float) -> np.ndarray:
    """Exact Hessian in the stacked point (beta, theta0); always positive definite."""
    beta = _check_point(model, dataset, beta)
    d = model.embedding.n_features
    n = model.embedding.n_entities
    x = model.embedding.matrix
    theta = model.embedding.scores(beta)
    pair_part = np.zeros((n, n))
    if dataset.n_comparisons:
        z = theta[dataset.comparison_first] - theta[dataset.comparison_second]
        w = model.comparison_law.cgf_double_prime(z)
        pair_part += _pair_curvature_matrix(
            n, dataset.comparison_first, dataset.comparison_second, w
        )
    cross = np.zeros(d)
    corner = 1.0 / model.prior_var_threshold
    if dataset.n_ratings:
        z = theta[dataset.rating_entities] - theta0
        w = model.rating_law.cgf_double_prime(z)
        per_entity = np.bincount(dataset.rating_entities, weights=w, minlength=n)
        pair_part[np.diag_indices(n)] += per_entity
        cross = -(x @ per_entity)
        corner += float(np.sum(w))
    hessian = np.zeros((d + 1, d + 1))
    hessian[:d, :d] = x @ pair_part @ x.T
    hessian[:d, :d][np.diag_indices(d)] += 1.0 / model.prior_var_beta
    hessian[:d, d] = cross
    hessian[d, :d] = cross
    hessian[d, d] = corner
    return hessian


@dataclass(frozen=True)
class FlexObservation:
    """A comparison carrying its own root law."""

    first: int
    second: int
    value: float
    law: RootLaw

    def __post_init__(self):
        if self.first == self.second:
            raise ValueError("observation must involve two distinct entities")


@dataclass(frozen=True)
class FlexModel:
    """Comparison-only model: embedding plus a diagonal Gaussian prior."""

    embedding: Embedding
    prior_variances: np.ndarray

    def __post_init__(self):
        variances = _float_array(self.prior_variances)
        if len(variances) != self.embedding.n_features:
            raise ValueError(
                f"{len(variances)} prior variances for embedding dimension "
                f"{self.embedding.n_features}"
            )
        if not np.all(variances > 0):
            raise ValueError("prior variances must be positive")
        object.__setattr__(self, "prior_variances", variances)


class FlexData:
    """Observations grouped by root law for fast repeated evaluation."""

    def __init__(self, groups):
        self.groups = list(groups)

    @classmethod
    def from_observations(cls, observations: Sequence[FlexObservation]) -> "FlexData":
        by_law: dict[RootLaw, list[FlexObservation]] = {}
        for obs in observations:
            by_law.setdefault(obs.law, []).append(obs)
        groups = []
        for law, items in by_law.items():
            groups.append(
                (
                    law,
                    _int_array([o.first for o in items]),
                    _int_array([o.second for o in items]),
                    _float_array([o.value for o in items]),
                )
            )
        return cls(groups)

    @classmethod
    def coerce(cls, observations) -> "FlexData":
        if isinstance(observations, cls):
            return observations
        return cls.from_observations(observations)

    @property
    def n_observations(self) -> int:
        return sum(len(first) for _, first, _, _ in self.groups)

    def max_index(self) -> int:
        top = -1
        for _, first, second, _ in self.groups:
            if len(first):
                top = max(top, int(first.max()), int(second.max()))
        return top


def _check_flex_point(model: FlexModel, data: FlexData, beta_tilde) -> np.ndarray:
    beta_tilde = _float_array(beta_tilde)
    if len(beta_tilde) != model.embedding.n_features:
        raise ValueError(
            f"beta has length {len(beta_tilde)}, expected {model.embedding.n_features}"
        )
    if data.max_index() >= model.embedding.n_entities:
        raise ValueError("observation references an entity outside the embedding")
    return beta_tilde


def flexible_loss(model: FlexModel, observations, beta_tilde) -> float:
    """Negative log-posterior of the comparison-only model."""
    data = FlexData.coerce(observations)
    beta_tilde = _check_flex_point(model, data, beta_tilde)
    theta = model.embedding.scores(beta_tilde)
    total = 0.5 * float(np.sum(beta_tilde**2 / model.prior_variances))
    for law, first, second, values in data.groups:
        z = theta[first] - theta[second]
        total += float(np.sum(law.cgf(z)) - values @ z)
    return total


def flexible_gradient(model: FlexModel, observations, beta_tilde) -> np.ndarray:
    data = FlexData.coerce(observations)
    beta_tilde = _check_flex_point(model, data, beta_tilde)
    n = model.embedding.n_entities
    theta = model.embedding.scores(beta_tilde)
    per_entity = np.zeros(n)
    for law, first, second, values in data.groups:
        z = theta[first] - theta[second]
        w = law.cgf_prime(z) - values
        per_entity += np.bincount(first, weights=w, minlength=n)
        per_entity -= np.bincount(second, weights=w, minlength=n)
    return beta_tilde / model.prior_variances + model.embedding.matrix @ per_entity


def flexible_hessian(model: FlexModel, observations, beta_tilde) -> np.ndarray:
    data = FlexData.coerce(observations)
    beta_tilde = _check_flex_point(model, data, beta_tilde)
    n = model.embedding.n_entities
    theta = model.embedding.scores(beta_tilde)
    pair_part = np.zeros((n, n))
    for law, first, second, _ in data.groups:
        z = theta[first] - theta[second]
        w = law.cgf_double_prime(z)
        pair_part += _pair_curvature_matrix(n, first, second, w)
    x = model.embedding.matrix
    hessian = x @ pair_part @ x.T
    hessian[np.diag_indices(len(beta_tilde))] += 1.0 / model.prior_variances
    return hessian


def to_flexible(
    model: ScoraModel, dataset: Dataset
) -> tuple[FlexModel, list[FlexObservation]]:
    """Rewrite the threshold model as a comparison-only model.

    The embedding gains one coordinate and one fictive entity whose score is
    the rating threshold; each rating becomes a comparison against that
    entity under the rating law.  Losses agree pointwise with the original
    under the stacking (beta, theta0).
    """
    dataset.validate_entities(model.embedding.n_entities)
    d = model.embedding.n_features
    n = model.embedding.n_entities
    augmented = np.zeros((d + 1, n + 1))
    augmented[:d, :n] = model.embedding.matrix
    augmented[d, n] = 1.0
    variances = np.concatenate(
        [np.full(d, model.prior_var_beta), [model.prior_var_threshold]]
    )
    flex_model = FlexModel(Embedding(augmented), variances)
    observations = [
        FlexObservation(int(b), int(c), float(r), model.comparison_law)
        for b, c, r in zip(
            dataset.comparison_first, dataset.comparison_second, dataset.comparison_values
        )
    ]
    observations.extend(
        FlexObservation(int(a), n, float(t), model.rating_law)
        for a, t in zip(dataset.rating_entities, dataset.rating_values)
    )
    return flex_model, observations
