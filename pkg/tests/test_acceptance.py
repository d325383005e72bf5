"""Acceptance gate: figure-level statistics and full-scale property suites.

Each test prints one line per criterion with the measured numbers.  The runs
use 20 repetitions at the pinned settings; expect the whole module to take
on the order of ten minutes.

Known-red criterion: the sweet-spot allocation test asserts the stated
endpoint/gap values for the exp-weighted correlation.  With the metric
computed exactly as specified (uncentered weighted cosine, weights
exp(truth)), heavy-tailed ground truth concentrates all weight on the single
top entity and the metric reads ~1.0 for every allocation, so the stated
0.6 -> 0.9 shape cannot emerge.  The test is kept faithful to the criterion
and fails; see the analysis in the project notes.
"""

import pytest

from scora import properties
from scora.experiments import (
    ExperimentConfig,
    default_sweetspot_config,
    run_convergence,
    run_sweetspot,
)

SEED = 20240801
BUDGET_GRID = (1e2, 1e3, 1e4, 1e5)
FRACTIONS = (0.0, 0.5, 1.0)
FRACTION_GRID = tuple(round(0.1 * i, 1) for i in range(11))


def by_point(rows):
    return {(row.b, row.p_c): row for row in rows}


@pytest.fixture(scope="module")
def convergence_rows():
    config = ExperimentConfig(
        A=100,
        embedding_scheme="identity",
        k_c="uniform",
        k_r="uniform",
        prior="gaussian:1",
        b=BUDGET_GRID,
        p_c=FRACTIONS,
        c_c=1.0,
        c_r=1.0,
        repetitions=20,
        base_seed=SEED,
    )
    return run_convergence(config)


@pytest.fixture(scope="module")
def mismatch_rows():
    config = ExperimentConfig(
        A=100,
        embedding_scheme="identity",
        k_c="uniform",
        k_r="uniform",
        inference_laws=("gaussian:1", "gaussian:1"),
        prior="gaussian:1",
        b=BUDGET_GRID,
        p_c=FRACTIONS,
        c_c=1.0,
        c_r=1.0,
        repetitions=20,
        base_seed=SEED,
    )
    return run_convergence(config)


@pytest.fixture(scope="module")
def sweetspot_rows():
    config = default_sweetspot_config(
        A=100, b=(1e5,), p_c=FRACTION_GRID, repetitions=20, base_seed=SEED
    )
    return run_sweetspot(config)


@pytest.fixture(scope="module")
def baseline_rows():
    settings = dict(
        A=100,
        k_c=2,
        k_r=5,
        b=(1e4,),
        p_c=FRACTION_GRID,
        c_c=3.0,
        c_r=1.0,
        repetitions=20,
        base_seed=SEED,
    )
    ratings_first = run_sweetspot(default_sweetspot_config(**settings))
    comparisons_first = run_sweetspot(
        default_sweetspot_config(pipeline="active:comparisons", **settings)
    )
    return ratings_first, comparisons_first


class TestConvergence:
    def test_high_budget_recovers_scores(self, convergence_rows):
        rows = by_point(convergence_rows)
        for fraction in FRACTIONS:
            mean = rows[(1e5, fraction)].mean
            print(f"[convergence] b=1e5 p_c={fraction}: mean corr = {mean:.4f} (need >= 0.95)")
            assert mean >= 0.95

    def test_low_budget_correlation_is_modest(self, convergence_rows):
        rows = by_point(convergence_rows)
        for fraction in FRACTIONS:
            mean = rows[(1e2, fraction)].mean
            print(f"[convergence] b=1e2 p_c={fraction}: mean corr = {mean:.4f} (need <= 0.7)")
            assert mean <= 0.7

    def test_monotone_up_to_ci_overlap(self, convergence_rows):
        rows = by_point(convergence_rows)
        for fraction in FRACTIONS:
            sequence = [rows[(budget, fraction)] for budget in BUDGET_GRID]
            for lower, upper in zip(sequence, sequence[1:]):
                slack = lower.ci95 + upper.ci95
                print(
                    f"[convergence] p_c={fraction}: corr(b={lower.b:g})={lower.mean:.4f} ->"
                    f" corr(b={upper.b:g})={upper.mean:.4f} (slack {slack:.4f})"
                )
                assert upper.mean >= lower.mean - slack

    def test_no_failed_repetitions(self, convergence_rows):
        assert all(row.n_failed == 0 for row in convergence_rows)


class TestModelMismatch:
    def test_high_budget_still_recovers(self, mismatch_rows):
        rows = by_point(mismatch_rows)
        for fraction in FRACTIONS:
            mean = rows[(1e5, fraction)].mean
            print(f"[mismatch] b=1e5 p_c={fraction}: mean corr = {mean:.4f} (need >= 0.9)")
            assert mean >= 0.9

    def test_gap_to_matched_run_small(self, convergence_rows, mismatch_rows):
        matched = by_point(convergence_rows)
        mismatched = by_point(mismatch_rows)
        for fraction in FRACTIONS:
            gap = matched[(1e5, fraction)].mean - mismatched[(1e5, fraction)].mean
            print(f"[mismatch] b=1e5 p_c={fraction}: matched-minus-mismatched = {gap:.4f} (need <= 0.05)")
            assert gap <= 0.05


class TestSweetSpot:
    def test_split_beats_pure_allocations(self, sweetspot_rows):
        rows = {row.p_c: row for row in sweetspot_rows}
        curve = {fraction: rows[fraction].mean for fraction in FRACTION_GRID}
        print("[sweetspot] mean corr_exp by p_c: "
              + ", ".join(f"{p}:{m:.4f}" for p, m in curve.items()))
        mid, low, high = curve[0.5], curve[0.0], curve[1.0]
        print(
            f"[sweetspot] split-vs-endpoints gaps: {mid - low:.4f}, {mid - high:.4f} "
            f"(need >= 0.15); endpoints {low:.4f}/{high:.4f} (need within 0.1 of 0.6); "
            f"split {mid:.4f} (need >= 0.8)"
        )
        for interior in FRACTION_GRID[1:-1]:
            assert curve[interior] > low and curve[interior] > high, (
                f"interior p_c={interior} does not beat both endpoints"
            )
        assert mid - low >= 0.15 and mid - high >= 0.15
        assert abs(low - 0.6) <= 0.1 and abs(high - 0.6) <= 0.1
        assert mid >= 0.8


class TestRatingsFirstBaseline:
    def test_ratings_first_weakly_dominates(self, baseline_rows):
        ratings_first, comparisons_first = baseline_rows
        best_ratings = max(ratings_first, key=lambda row: row.mean)
        best_comparisons = max(comparisons_first, key=lambda row: row.mean)
        slack = best_ratings.ci95 + best_comparisons.ci95
        print(
            f"[baseline] ratings-first best {best_ratings.mean:.4f} (p_c={best_ratings.p_c})"
            f" vs comparisons-first best {best_comparisons.mean:.4f} "
            f"(p_c={best_comparisons.p_c}), slack {slack:.4f}"
        )
        assert best_ratings.mean >= best_comparisons.mean - slack


class TestPropertySuites:
    """Full-scale property suites; the backbone of the acceptance gate."""

    @pytest.mark.parametrize("name", list(properties.SUITES))
    def test_suite(self, name):
        function, kwargs = properties.SUITES[name]
        report = function(seed=SEED, **kwargs)
        print(f"[properties] {report.line()}")
        assert report.passed, report.line()
