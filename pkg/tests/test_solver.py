"""MAP solves: closed forms, cross-solver agreement, determinism, failures."""

import numpy as np
import pytest
from scipy.optimize import brentq

from scora.core import Dataset, Embedding, FlexObservation, FlexModel, ScoraModel, to_flexible
from scora.rootlaw import ContinuousUniform, Gaussian, KAry
from scora.solver import (
    ConvergenceError,
    SolverConfig,
    solve_map,
    solve_map_flexible,
)

TIGHT = SolverConfig(gradient_tolerance=1e-10)


def random_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    embedding = Embedding(rng.normal(size=(n, n)))
    model = ScoraModel(embedding, ContinuousUniform(), KAry(3), 1.0, 1.0)
    ratings = [(int(rng.integers(n)), float(rng.uniform(-1, 1))) for _ in range(8)]
    comparisons = []
    for _ in range(8):
        b = int(rng.integers(n))
        c = int(rng.integers(n - 1))
        c += c >= b
        comparisons.append((b, c, float(rng.uniform(-1, 1))))
    return model, Dataset.build(ratings, comparisons)


class TestSolveMap:
    def test_empty_dataset_returns_prior_mode(self):
        model = ScoraModel(Embedding.identity(3), KAry(2), KAry(2))
        result = solve_map(model, Dataset.empty())
        np.testing.assert_array_equal(result.beta_star, np.zeros(3))
        assert result.theta0_star == 0.0
        assert result.final_gradient_norm == 0.0

    def test_two_entity_binary_closed_form(self):
        # Optimality reduces to d/2 + tanh(d) = 1 for the score gap d.
        model = ScoraModel(Embedding.identity(2), KAry(2), KAry(2), 1.0, 1.0)
        dataset = Dataset.build(comparisons=[(0, 1, 1.0)])
        result = solve_map(model, dataset, TIGHT)
        gap_root = brentq(lambda d: d / 2 + np.tanh(d) - 1.0, 0.0, 2.0, xtol=1e-14)
        assert gap_root == pytest.approx(0.7408, abs=5e-4)
        assert result.scores_star[0] == pytest.approx(gap_root / 2, abs=1e-9)
        assert result.scores_star[1] == pytest.approx(-gap_root / 2, abs=1e-9)
        assert result.theta0_star == pytest.approx(0.0, abs=1e-10)

    def test_threshold_identity_for_identity_embedding(self):
        model = ScoraModel(Embedding.identity(4), KAry(2), ContinuousUniform(), 1.5, 0.5)
        dataset = Dataset.build(
            ratings=[(0, 1.0), (1, -0.5), (2, 0.25)],
            comparisons=[(0, 3, 1.0), (2, 1, -1.0)],
        )
        result = solve_map(model, dataset, TIGHT)
        ratio = model.prior_var_threshold / model.prior_var_beta
        assert result.theta0_star == pytest.approx(
            -ratio * float(np.sum(result.scores_star)), abs=1e-6
        )

    def test_scores_match_embedding_times_beta(self):
        model, dataset = random_instance(5)
        result = solve_map(model, dataset, TIGHT)
        np.testing.assert_allclose(
            result.scores_star, model.embedding.scores(result.beta_star), atol=1e-14
        )

    def test_gradient_tolerance_honored(self):
        model, dataset = random_instance(6)
        for tolerance in (1e-6, 1e-10):
            result = solve_map(model, dataset, SolverConfig(gradient_tolerance=tolerance))
            assert result.final_gradient_norm <= tolerance

    def test_deterministic_bitwise(self):
        model, dataset = random_instance(7)
        first = solve_map(model, dataset, TIGHT)
        second = solve_map(model, dataset, TIGHT)
        np.testing.assert_array_equal(first.stacked_point, second.stacked_point)
        assert first.iterations == second.iterations

    def test_warm_start_reaches_same_optimum(self):
        model, dataset = random_instance(8)
        cold = solve_map(model, dataset, TIGHT)
        warm = solve_map(
            model,
            dataset,
            SolverConfig(gradient_tolerance=1e-10, initial_point=cold.stacked_point),
        )
        np.testing.assert_allclose(warm.stacked_point, cold.stacked_point, atol=1e-9)

    def test_nonconvergence_carries_best_iterate(self):
        model, dataset = random_instance(9)
        with pytest.raises(ConvergenceError) as excinfo:
            solve_map(
                model,
                dataset,
                SolverConfig(gradient_tolerance=1e-15, max_iterations=2),
            )
        error = excinfo.value
        assert error.best_point.shape == (model.embedding.n_features + 1,)
        assert error.gradient_norm > 0

    def test_bad_initial_point_shape_rejected(self):
        model, dataset = random_instance(10)
        with pytest.raises(ValueError):
            solve_map(model, dataset, SolverConfig(initial_point=np.zeros(2)))

    def test_nonfinite_start_raises_numerical_error(self):
        from scora.solver import NumericalError

        model, dataset = random_instance(10)
        start = np.full(model.embedding.n_features + 1, np.nan)
        with pytest.raises(NumericalError):
            solve_map(model, dataset, SolverConfig(initial_point=start))


class TestSolveMapFlexible:
    def test_no_observations_returns_zero(self):
        model = FlexModel(Embedding.identity(3), np.ones(3))
        result = solve_map_flexible(model, [])
        np.testing.assert_array_equal(result.beta_tilde_star, np.zeros(3))

    def test_gaussian_single_observation_quadratic_oracle(self):
        # minimize b1^2/2 + b2^2/2 + (b1-b2)^2/2 - (b1-b2): optimum (1/3, -1/3)
        model = FlexModel(Embedding.identity(2), np.ones(2))
        observations = [FlexObservation(0, 1, 1.0, Gaussian(1.0))]
        result = solve_map_flexible(model, observations, TIGHT)
        np.testing.assert_allclose(result.beta_tilde_star, [1 / 3, -1 / 3], atol=1e-9)

    def test_agrees_with_threshold_solver_under_reduction(self):
        model, dataset = random_instance(11)
        flex_model, observations = to_flexible(model, dataset)
        primal = solve_map(model, dataset, TIGHT)
        flex = solve_map_flexible(flex_model, observations, TIGHT)
        np.testing.assert_allclose(
            flex.beta_tilde_star, primal.stacked_point, atol=1e-6
        )

    def test_tolerance_honored(self):
        model, dataset = random_instance(12)
        flex_model, observations = to_flexible(model, dataset)
        result = solve_map_flexible(flex_model, observations, TIGHT)
        assert result.final_gradient_norm <= 1e-10
