"""Root-law CGFs, tilted sampling, and serialization."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from scora.rootlaw import (
    ContinuousUniform,
    Gaussian,
    KAry,
    law_from_arity,
    parse_root_law,
)

ALL_LAWS = [KAry(2), KAry(3), KAry(5), ContinuousUniform(), Gaussian(1.0), Gaussian(4.0)]


def enumeration_cgf(law: KAry, theta: float) -> float:
    """Independent oracle: direct log-mean-exp over the atom grid."""
    return math.log(np.mean(np.exp(theta * law.atoms)))


def enumeration_tilted_mean(law: KAry, theta: float) -> float:
    weights = np.exp(theta * law.atoms)
    return float(weights @ law.atoms / weights.sum())


class TestCgfValues:
    def test_zero_is_zero_for_all_laws(self):
        for law in ALL_LAWS:
            assert law.cgf(0.0) == pytest.approx(0.0, abs=1e-15)

    def test_binary_at_one_matches_enumeration(self):
        # log((e + 1/e)/2) = 0.4337808304830271...
        expected = enumeration_cgf(KAry(2), 1.0)
        assert expected == pytest.approx(0.4337808304830271, abs=1e-15)
        assert KAry(2).cgf(1.0) == pytest.approx(expected, abs=1e-14)

    def test_gaussian_closed_form(self):
        assert Gaussian(1.0).cgf(2.0) == pytest.approx(2.0, abs=1e-15)

    def test_uniform_near_zero_limit(self):
        assert abs(ContinuousUniform().cgf(1e-12)) < 1e-15

    def test_uniform_matches_log_sinh_formula(self):
        law = ContinuousUniform()
        for theta in (0.01, 0.5, 1.0, 3.0, 12.0):
            assert law.cgf(theta) == pytest.approx(
                math.log(math.sinh(theta) / theta), rel=1e-13
            )

    def test_kary_matches_enumeration_on_grid(self):
        for k in (2, 3, 4, 9):
            law = KAry(k)
            for theta in (-5.0, -0.3, 0.7, 4.0):
                assert law.cgf(theta) == pytest.approx(
                    enumeration_cgf(law, theta), rel=1e-12
                )

    def test_large_theta_does_not_overflow(self):
        for law in (KAry(2), KAry(6), ContinuousUniform()):
            value = law.cgf(500.0)
            assert np.isfinite(value)
            # dominated by the largest atom: cgf ~ theta - log(k or 2*theta)
            assert value == pytest.approx(500.0, rel=0.05)


class TestCgfDerivatives:
    def test_prime_at_zero_is_zero(self):
        for law in ALL_LAWS:
            assert law.cgf_prime(0.0) == pytest.approx(0.0, abs=1e-14)

    def test_binary_prime_matches_enumeration(self):
        expected = enumeration_tilted_mean(KAry(2), 1.0)
        assert expected == pytest.approx(math.tanh(1.0), abs=1e-15)
        assert KAry(2).cgf_prime(1.0) == pytest.approx(expected, abs=1e-14)

    def test_gaussian_prime_is_linear(self):
        assert Gaussian(1.0).cgf_prime(-3.0) == pytest.approx(-3.0, abs=1e-15)

    def test_binary_variance_at_zero_by_enumeration(self):
        atoms = KAry(2).atoms
        assert float(np.mean(atoms**2) - np.mean(atoms) ** 2) == 1.0
        assert KAry(2).cgf_double_prime(0.0) == pytest.approx(1.0, abs=1e-14)

    def test_uniform_variance_at_zero_by_quadrature(self):
        expected = quad(lambda r: r * r * 0.5, -1.0, 1.0)[0]
        assert expected == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert ContinuousUniform().cgf_double_prime(0.0) == pytest.approx(
            expected, abs=1e-12
        )

    def test_gaussian_second_derivative_is_constant(self):
        assert Gaussian(4.0).cgf_double_prime(7.3) == pytest.approx(4.0, abs=1e-15)

    def test_prime_strictly_increasing(self):
        grid = np.linspace(-8.0, 8.0, 401)
        for law in ALL_LAWS:
            values = law.cgf_prime(grid)
            assert np.all(np.diff(values) > 0), law.token

    def test_prime_bounded_by_support(self):
        grid = np.linspace(-50.0, 50.0, 101)
        for law in (KAry(2), KAry(5), ContinuousUniform()):
            assert np.all(np.abs(law.cgf_prime(grid)) <= law.support_bound)

    def test_second_derivative_nonnegative(self):
        grid = np.linspace(-20.0, 20.0, 201)
        for law in ALL_LAWS:
            assert np.all(law.cgf_double_prime(grid) >= 0.0)

    def test_fused_matches_separate_calls(self):
        rng = np.random.default_rng(4)
        theta = np.concatenate(
            [rng.normal(size=500) * 5, [0.0, 1e-9, -1e-9, 1e-5, 5e-4, 2e-3]]
        )
        for law in ALL_LAWS:
            value, prime = law.cgf_and_prime(theta)
            np.testing.assert_array_equal(value, law.cgf(theta))
            np.testing.assert_array_equal(prime, law.cgf_prime(theta))


class TestSampling:
    def test_untilted_mean_within_five_standard_errors(self):
        rng = np.random.default_rng(10)
        n = 100_000
        for law in ALL_LAWS:
            draws = law.sample_tilted(np.zeros(n), rng)
            se = math.sqrt(law.cgf_double_prime(0.0) / n)
            assert abs(draws.mean()) < 5 * se, law.token

    def test_binary_tilted_mean_matches_tanh(self):
        rng = np.random.default_rng(11)
        n = 100_000
        draws = KAry(2).sample_tilted(np.full(n, 1.0), rng)
        se = math.sqrt(KAry(2).cgf_double_prime(1.0) / n)
        assert abs(draws.mean() - 0.7615941559557649) < 5 * se

    def test_uniform_tilted_variance_matches_second_derivative(self):
        rng = np.random.default_rng(12)
        n = 100_000
        law = ContinuousUniform()
        draws = law.sample_tilted(np.full(n, 2.0), rng)
        # SE of the sample variance from quadrature of the fourth moment
        norm = quad(lambda r: math.exp(2.0 * r), -1, 1)[0]
        mean = quad(lambda r: r * math.exp(2.0 * r), -1, 1)[0] / norm
        m2 = quad(lambda r: (r - mean) ** 2 * math.exp(2.0 * r), -1, 1)[0] / norm
        m4 = quad(lambda r: (r - mean) ** 4 * math.exp(2.0 * r), -1, 1)[0] / norm
        se_var = math.sqrt((m4 - m2 * m2) / n)
        assert abs(draws.var(ddof=1) - law.cgf_double_prime(2.0)) < 5 * se_var

    def test_bounded_laws_stay_in_unit_interval(self):
        rng = np.random.default_rng(13)
        theta = rng.uniform(-100, 100, size=20_000)
        for law in (KAry(2), KAry(7), ContinuousUniform()):
            draws = law.sample_tilted(theta, rng)
            assert np.all(np.abs(draws) <= 1.0)

    def test_gaussian_tilt_shifts_mean(self):
        rng = np.random.default_rng(14)
        draws = Gaussian(4.0).sample_tilted(np.full(50_000, 1.5), rng)
        assert draws.mean() == pytest.approx(6.0, abs=5 * math.sqrt(4.0 / 50_000))

    def test_scalar_theta_gives_scalar_draw(self):
        rng = np.random.default_rng(15)
        for law in ALL_LAWS:
            assert isinstance(law.sample_tilted(0.3, rng), float)

    def test_seeded_draws_reproduce(self):
        theta = np.linspace(-2, 2, 1000)
        for law in ALL_LAWS:
            a = law.sample_tilted(theta, np.random.default_rng(99))
            b = law.sample_tilted(theta, np.random.default_rng(99))
            np.testing.assert_array_equal(a, b)


class TestSupportAndTokens:
    def test_support_bounds(self):
        assert KAry(5).support_bound == 1.0
        assert ContinuousUniform().support_bound == 1.0
        assert Gaussian(1.0).support_bound == math.inf

    def test_kary_atom_grid(self):
        np.testing.assert_allclose(KAry(2).atoms, [-1.0, 1.0])
        np.testing.assert_allclose(KAry(5).atoms, [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_token_round_trip(self):
        for law in (KAry(2), KAry(17), ContinuousUniform(), Gaussian(1.0), Gaussian(2.5)):
            assert parse_root_law(law.token) == law

    def test_parse_rejects_unknown(self):
        with pytest.raises(ValueError):
            parse_root_law("triangular:3")

    def test_arity_mapping(self):
        assert law_from_arity(2) == KAry(2)
        assert law_from_arity("7") == KAry(7)
        assert law_from_arity("uniform") == ContinuousUniform()
        assert law_from_arity(math.inf) == ContinuousUniform()

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            KAry(1)
        with pytest.raises(ValueError):
            Gaussian(0.0)
