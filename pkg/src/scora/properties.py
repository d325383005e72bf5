"""Randomized property suites verifying the estimator's structural guarantees.

Each check returns a :class:`PropertyReport`; the CLI ``properties``
subcommand prints one line per suite and the test suite asserts on them.
Checks draw their instances from an explicit seed, so failures reproduce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from scora.core import (
    Dataset,
    Embedding,
    ScoraModel,
    flexible_gradient,
    flexible_loss,
    scora_gradient,
    scora_loss,
    to_flexible,
)
from scora.metrics import pearson_corr, weighted_corr_exp
from scora.rootlaw import ContinuousUniform, Gaussian, KAry, RootLaw
from scora.solver import SolverConfig, solve_map, solve_map_flexible

# Solves inside property trials run well below the asserted slacks so that
# solver noise cannot masquerade as a violation.
_TRIAL_SOLVER = SolverConfig(gradient_tolerance=1e-10)


@dataclass
class PropertyReport:
    name: str
    trials: int
    violations: int
    worst: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  [{self.detail}]" if self.detail else ""
        return (
            f"{status}  {self.name}: trials={self.trials} "
            f"violations={self.violations} worst={self.worst:.3e}{extra}"
        )


_STANDARD_LAWS = (
    KAry(2),
    KAry(3),
    KAry(5),
    ContinuousUniform(),
    Gaussian(1.0),
    Gaussian(4.0),
)


def _random_law(rng, kinds=("kary", "uniform", "gaussian")) -> RootLaw:
    kind = kinds[rng.integers(len(kinds))]
    if kind == "kary":
        return KAry(int(rng.integers(2, 7)))
    if kind == "uniform":
        return ContinuousUniform()
    return Gaussian(float(rng.uniform(0.5, 2.0)))


def _random_instance(
    rng,
    identity=False,
    law_kinds=("kary", "uniform", "gaussian"),
    unit_priors=False,
    min_ratings=1,
    min_comparisons=1,
):
    """A small random model plus data generated from a hidden ground truth."""
    n_entities = int(rng.integers(3, 8))
    if identity:
        embedding = Embedding.identity(n_entities)
    else:
        d = int(rng.integers(2, n_entities + 2))
        embedding = Embedding(rng.normal(size=(d, n_entities)))
    comparison_law = _random_law(rng, law_kinds)
    rating_law = _random_law(rng, law_kinds)
    if unit_priors:
        var_beta = var_threshold = 1.0
    else:
        var_beta = float(rng.uniform(0.5, 2.0))
        var_threshold = float(rng.uniform(0.5, 2.0))
    model = ScoraModel(embedding, comparison_law, rating_law, var_beta, var_threshold)

    beta_truth = rng.normal(size=embedding.n_features)
    theta0_truth = float(rng.normal())
    scores = embedding.scores(beta_truth)
    n_ratings = int(rng.integers(min_ratings, 16))
    n_comparisons = int(rng.integers(min_comparisons, 16))
    rating_entities = rng.integers(0, n_entities, size=n_ratings)
    rating_values = rating_law.sample_tilted(scores[rating_entities] - theta0_truth, rng)
    first = rng.integers(0, n_entities, size=n_comparisons)
    second = rng.integers(0, n_entities - 1, size=n_comparisons)
    second = second + (second >= first)
    comparison_values = comparison_law.sample_tilted(scores[first] - scores[second], rng)
    dataset = Dataset(
        rating_entities=rating_entities,
        rating_values=np.atleast_1d(rating_values),
        comparison_first=first,
        comparison_second=second,
        comparison_values=np.atleast_1d(comparison_values),
    )
    return model, dataset


def _warm(config: SolverConfig, point) -> SolverConfig:
    return replace(config, initial_point=point)


# ---------------------------------------------------------------------------
# Root-law suites
# ---------------------------------------------------------------------------


def check_cgf_convexity(seed=0, grid_size=41) -> PropertyReport:
    """Midpoint convexity of every CGF on a [-10, 10] grid."""
    worst = -math.inf
    violations = trials = 0
    grid = np.linspace(-10.0, 10.0, grid_size)
    for law in _STANDARD_LAWS:
        values = law.cgf(grid)
        for i in range(len(grid)):
            for j in range(i + 1, len(grid)):
                mid = law.cgf(0.5 * (grid[i] + grid[j]))
                gap = mid - 0.5 * (values[i] + values[j])
                worst = max(worst, gap)
                trials += 1
                if gap > 1e-12:
                    violations += 1
    return PropertyReport("cgf midpoint convexity", trials, violations, worst)


_FD_GRID = np.array(
    [0.0, 0.05, 0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0]
)
_FD_GRID = np.unique(np.concatenate([-_FD_GRID, _FD_GRID]))


def check_cgf_derivative_consistency(seed=0) -> PropertyReport:
    """Central differences of cgf match cgf_prime (and prime matches
    double_prime) to 1e-6 relative at step 1e-5 on |theta| <= 10."""
    step = 1e-5
    worst = 0.0
    violations = trials = 0
    for law in _STANDARD_LAWS:
        fd_prime = (law.cgf(_FD_GRID + step) - law.cgf(_FD_GRID - step)) / (2 * step)
        fd_double = (law.cgf_prime(_FD_GRID + step) - law.cgf_prime(_FD_GRID - step)) / (
            2 * step
        )
        for fd, exact in (
            (fd_prime, law.cgf_prime(_FD_GRID)),
            (fd_double, law.cgf_double_prime(_FD_GRID)),
        ):
            # The difference quotient itself carries ~eps/step absolute noise,
            # which dwarfs saturated second derivatives (~1e-8 at |theta|=10);
            # below that floor the relative criterion is vacuous.
            gap = np.abs(fd - exact)
            rel = gap / np.maximum(np.abs(exact), 1e-8)
            bad = (rel > 1e-6) & (gap > 1e-10)
            worst = max(worst, float(rel[gap > 1e-10].max(initial=0.0)))
            trials += len(rel)
            violations += int(np.sum(bad))
    return PropertyReport("cgf derivative consistency", trials, violations, worst)


def check_cgf_symmetry(seed=0, n_points=200) -> PropertyReport:
    """cgf is even and cgf_prime odd, to 1e-12."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-20.0, 20.0, size=n_points)
    worst = 0.0
    violations = trials = 0
    for law in _STANDARD_LAWS:
        even_gap = np.abs(law.cgf(theta) - law.cgf(-theta))
        odd_gap = np.abs(law.cgf_prime(theta) + law.cgf_prime(-theta))
        gap = np.maximum(even_gap, odd_gap)
        worst = max(worst, float(gap.max()))
        trials += len(theta)
        violations += int(np.sum(gap > 1e-12))
    return PropertyReport("cgf symmetry", trials, violations, worst)


def check_atom_containment(seed=0, n_draws=20000) -> PropertyReport:
    """Bounded-law draws stay in [-1, 1]; k-ary draws land on atoms."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = trials = 0
    for law in (KAry(2), KAry(4), KAry(7), ContinuousUniform()):
        theta = rng.uniform(-30.0, 30.0, size=n_draws)
        draws = law.sample_tilted(theta, rng)
        excess = float(np.max(np.abs(draws))) - 1.0
        worst = max(worst, excess)
        trials += n_draws
        violations += int(np.sum(np.abs(draws) > 1.0))
        if isinstance(law, KAry):
            off_atom = np.min(np.abs(draws[:, None] - law.atoms), axis=1)
            violations += int(np.sum(off_atom > 1e-15))
            worst = max(worst, float(off_atom.max()))
    return PropertyReport("tilted draw containment", trials, violations, worst)


def _tilted_moments_oracle(law: RootLaw, theta: float):
    """Mean, variance, fourth central moment of the tilted law, computed
    independently of the CGF derivatives (enumeration / quadrature / closed
    Gaussian forms)."""
    if isinstance(law, KAry):
        logits = theta * law.atoms
        weights = np.exp(logits - logits.max())
        probs = weights / weights.sum()
        mean = float(probs @ law.atoms)
        centered = law.atoms - mean
        return mean, float(probs @ centered**2), float(probs @ centered**4)
    if isinstance(law, Gaussian):
        return law.variance * theta, law.variance, 3.0 * law.variance**2
    norm = quad(lambda r: math.exp(theta * r), -1.0, 1.0)[0]
    mean = quad(lambda r: r * math.exp(theta * r), -1.0, 1.0)[0] / norm
    var = quad(lambda r: (r - mean) ** 2 * math.exp(theta * r), -1.0, 1.0)[0] / norm
    m4 = quad(lambda r: (r - mean) ** 4 * math.exp(theta * r), -1.0, 1.0)[0] / norm
    return mean, var, m4


def check_moments(seed=0, n_draws=100000) -> PropertyReport:
    """Monte Carlo mean/variance of sample_tilted match cgf_prime and
    cgf_double_prime within 5 standard errors; the oracle moments come from
    enumeration/quadrature, independent of the CGF code."""
    rng = np.random.default_rng(seed)
    laws = (KAry(2), KAry(5), ContinuousUniform(), Gaussian(1.0))
    worst = 0.0
    violations = trials = 0
    for law in laws:
        for theta in (-2.0, 0.0, 0.5, 3.0):
            mean_oracle, var_oracle, m4_oracle = _tilted_moments_oracle(law, theta)
            # dual-route check: the oracle must agree with the CGF derivatives
            if abs(mean_oracle - law.cgf_prime(theta)) > 1e-8 or (
                abs(var_oracle - law.cgf_double_prime(theta)) > 1e-8
            ):
                violations += 1
            draws = law.sample_tilted(np.full(n_draws, theta), rng)
            se_mean = math.sqrt(var_oracle / n_draws)
            # The variance estimator fluctuates by (mu4 - var^2)/n to first
            # order plus a chi-square style mean^2 term that dominates when
            # the law is two-point (mu4 = var^2 exactly).
            se_var = math.sqrt(max(m4_oracle - var_oracle**2, 0.0) / n_draws)
            var_tolerance = 5.0 * se_var + 25.0 * var_oracle / n_draws
            mean_dev = abs(float(draws.mean()) - law.cgf_prime(theta)) / (5.0 * se_mean)
            var_dev = abs(
                float(draws.var(ddof=1)) - law.cgf_double_prime(theta)
            ) / var_tolerance
            worst = max(worst, mean_dev, var_dev)
            trials += 2
            violations += int(mean_dev > 1.0) + int(var_dev > 1.0)
    return PropertyReport(
        "tilted sampler moments",
        trials,
        violations,
        worst,
        detail="worst as fraction of the 5-SE band",
    )


# ---------------------------------------------------------------------------
# Loss / reduction suites
# ---------------------------------------------------------------------------


def check_gradient_finite_differences(seed=0, instances=50) -> PropertyReport:
    """Analytic gradients match central differences to 1e-6 relative."""
    rng = np.random.default_rng(seed)
    step = 1e-6
    worst = 0.0
    violations = 0
    for _ in range(instances):
        model, dataset = _random_instance(rng)
        d = model.embedding.n_features
        beta = rng.normal(size=d)
        theta0 = float(rng.normal())
        grad_beta, grad_theta0 = scora_gradient(model, dataset, beta, theta0)
        analytic = np.concatenate([grad_beta, [grad_theta0]])
        numeric = np.empty(d + 1)
        for i in range(d + 1):
            delta = np.zeros(d + 1)
            delta[i] = step
            plus = scora_loss(
                model, dataset, beta + delta[:d], theta0 + delta[d]
            )
            minus = scora_loss(
                model, dataset, beta - delta[:d], theta0 - delta[d]
            )
            numeric[i] = (plus - minus) / (2 * step)
        rel = np.linalg.norm(numeric - analytic) / max(np.linalg.norm(analytic), 1e-8)
        worst = max(worst, float(rel))
        if rel > 1e-6:
            violations += 1

        flex_model, observations = to_flexible(model, dataset)
        point = rng.normal(size=d + 1)
        analytic_flex = flexible_gradient(flex_model, observations, point)
        numeric_flex = np.empty(d + 1)
        for i in range(d + 1):
            delta = np.zeros(d + 1)
            delta[i] = step
            numeric_flex[i] = (
                flexible_loss(flex_model, observations, point + delta)
                - flexible_loss(flex_model, observations, point - delta)
            ) / (2 * step)
        rel = np.linalg.norm(numeric_flex - analytic_flex) / max(
            np.linalg.norm(analytic_flex), 1e-8
        )
        worst = max(worst, float(rel))
        if rel > 1e-6:
            violations += 1
    return PropertyReport("gradient finite differences", 2 * instances, violations, worst)


def check_strong_convexity(seed=0, instances=100) -> PropertyReport:
    """Midpoint inequality with modulus 1/max-prior-variance."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    violations = 0
    for _ in range(instances):
        model, dataset = _random_instance(rng)
        d = model.embedding.n_features
        p1 = rng.normal(size=d + 1) * 2.0
        p2 = rng.normal(size=d + 1) * 2.0
        values = [
            scora_loss(model, dataset, p[:d], float(p[d]))
            for p in (p1, p2, 0.5 * (p1 + p2))
        ]
        modulus = 1.0 / model.max_prior_var
        bound = 0.5 * (values[0] + values[1]) - (modulus / 8.0) * float(
            np.sum((p1 - p2) ** 2)
        )
        gap = values[2] - bound
        worst = max(worst, gap)
        if gap > 1e-10:
            violations += 1
    return PropertyReport("strong convexity midpoint", instances, violations, worst)


def check_translation_structure(seed=0, instances=100) -> PropertyReport:
    """With the identity embedding, shifting all scores and the threshold by
    the same constant leaves the likelihood terms unchanged."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    for _ in range(instances):
        model, dataset = _random_instance(rng, identity=True)
        d = model.embedding.n_features
        beta = rng.normal(size=d)
        theta0 = float(rng.normal())
        shift = float(rng.normal()) * 2.0

        def likelihood(b, t0):
            prior = 0.5 * float(b @ b) / model.prior_var_beta
            prior += 0.5 * t0**2 / model.prior_var_threshold
            return scora_loss(model, dataset, b, t0) - prior

        gap = abs(likelihood(beta, theta0) - likelihood(beta + shift, theta0 + shift))
        worst = max(worst, gap)
        if gap > 1e-9:
            violations += 1
    return PropertyReport("translation structure", instances, violations, worst)


def check_reduction_exactness(seed=0, instances=100, points=20) -> PropertyReport:
    """Threshold-model and comparison-only losses agree pointwise under the
    embedding augmentation (<= 1e-12 relative) and their MAPs agree to 1e-6."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    trials = 0
    for _ in range(instances):
        model, dataset = _random_instance(rng)
        d = model.embedding.n_features
        flex_model, observations = to_flexible(model, dataset)
        for _ in range(points):
            point = rng.normal(size=d + 1) * 2.0
            original = scora_loss(model, dataset, point[:d], float(point[d]))
            reduced = flexible_loss(flex_model, observations, point)
            rel = abs(original - reduced) / max(abs(original), 1.0)
            worst = max(worst, rel)
            trials += 1
            if rel > 1e-12:
                violations += 1
        primal = solve_map(model, dataset, _TRIAL_SOLVER)
        flex = solve_map_flexible(flex_model, observations, _TRIAL_SOLVER)
        gap = float(np.max(np.abs(primal.stacked_point - flex.beta_tilde_star)))
        worst = max(worst, gap)
        trials += 1
        if gap > 1e-6:
            violations += 1
    return PropertyReport("reduction exactness", trials, violations, worst)


# ---------------------------------------------------------------------------
# MAP estimator suites
# ---------------------------------------------------------------------------


def check_threshold_identity(seed=0, trials=200) -> PropertyReport:
    """Identity embedding: threshold = -(var_threshold/var_beta) * score sum."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    for _ in range(trials):
        model, dataset = _random_instance(rng, identity=True)
        result = solve_map(model, dataset, _TRIAL_SOLVER)
        ratio = model.prior_var_threshold / model.prior_var_beta
        gap = abs(result.theta0_star + ratio * float(np.sum(result.scores_star)))
        worst = max(worst, gap)
        if gap > 1e-6:
            violations += 1
    return PropertyReport("threshold identity", trials, violations, worst)


def check_pairwise_monotonicity(seed=0, trials=1000) -> PropertyReport:
    """Raising one observed value never lowers the matching score difference."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    violations = 0
    for trial in range(trials):
        model, dataset = _random_instance(rng)
        edit_comparison = trial % 2 == 0
        if edit_comparison:
            index = int(rng.integers(dataset.n_comparisons))
            law = model.comparison_law
        else:
            index = int(rng.integers(dataset.n_ratings))
            law = model.rating_law
        draws = sorted(
            (float(law.sample_tilted(0.0, rng)), float(law.sample_tilted(0.0, rng)))
        )
        if edit_comparison:
            low = dataset.with_comparison_value(index, draws[0])
            high = dataset.with_comparison_value(index, draws[1])
        else:
            low = dataset.with_rating_value(index, draws[0])
            high = dataset.with_rating_value(index, draws[1])
        low_map = solve_map(model, low, _TRIAL_SOLVER)
        high_map = solve_map(model, high, _warm(_TRIAL_SOLVER, low_map.stacked_point))
        if edit_comparison:
            b = int(dataset.comparison_first[index])
            c = int(dataset.comparison_second[index])
            before = low_map.scores_star[b] - low_map.scores_star[c]
            after = high_map.scores_star[b] - high_map.scores_star[c]
        else:
            a = int(dataset.rating_entities[index])
            before = low_map.scores_star[a] - low_map.theta0_star
            after = high_map.scores_star[a] - high_map.theta0_star
        drop = before - after
        worst = max(worst, drop)
        if drop > 1e-8:
            violations += 1
    return PropertyReport(
        "pairwise monotonicity", trials, violations, worst, detail="worst decrease"
    )


def check_directional_update(seed=0, trials=500) -> PropertyReport:
    """Adding an observation moves its score difference toward the observed
    value: the sign of the change equals the sign of (value - tilted mean),
    with |value - tilted mean| <= 1e-6 exempted as a tie."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    ties = 0
    for trial in range(trials):
        model, dataset = _random_instance(rng)
        n = model.embedding.n_entities
        base = solve_map(model, dataset, _TRIAL_SOLVER)
        add_comparison = trial % 2 == 0
        if add_comparison:
            b = int(rng.integers(n))
            c = int(rng.integers(n - 1))
            c += c >= b
            value = float(model.comparison_law.sample_tilted(0.0, rng))
            edge = base.scores_star[b] - base.scores_star[c]
            residual = value - model.comparison_law.cgf_prime(edge)
            edited = dataset.adding_comparison(b, c, value)
        else:
            a = int(rng.integers(n))
            value = float(model.rating_law.sample_tilted(0.0, rng))
            edge = base.scores_star[a] - base.theta0_star
            residual = value - model.rating_law.cgf_prime(edge)
            edited = dataset.adding_rating(a, value)
        if abs(residual) <= 1e-6:
            ties += 1
            continue
        updated = solve_map(model, edited, _warm(_TRIAL_SOLVER, base.stacked_point))
        if add_comparison:
            new_edge = updated.scores_star[b] - updated.scores_star[c]
        else:
            new_edge = updated.scores_star[a] - updated.theta0_star
        change = new_edge - edge
        signed = change * math.copysign(1.0, residual)
        if signed <= 0:
            violations += 1
            worst = max(worst, -signed)
    return PropertyReport(
        "directional update",
        trials,
        violations,
        worst,
        detail=f"{ties} ties exempted",
    )


def check_zero_update(seed=0, trials=500) -> PropertyReport:
    """Adding an observation equal to its current tilted mean leaves the MAP
    unchanged (within 1e-6)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    for trial in range(trials):
        model, dataset = _random_instance(rng)
        n = model.embedding.n_entities
        base = solve_map(model, dataset, _TRIAL_SOLVER)
        if trial % 2 == 0:
            b = int(rng.integers(n))
            c = int(rng.integers(n - 1))
            c += c >= b
            value = model.comparison_law.cgf_prime(
                float(base.scores_star[b] - base.scores_star[c])
            )
            edited = dataset.adding_comparison(b, c, value)
        else:
            a = int(rng.integers(n))
            value = model.rating_law.cgf_prime(
                float(base.scores_star[a] - base.theta0_star)
            )
            edited = dataset.adding_rating(a, value)
        updated = solve_map(model, edited, _warm(_TRIAL_SOLVER, base.stacked_point))
        shift = float(np.max(np.abs(updated.stacked_point - base.stacked_point)))
        worst = max(worst, shift)
        if shift > 1e-6:
            violations += 1
    return PropertyReport("zero update", trials, violations, worst)


def check_lipschitz_resilience(seed=0, trials=500) -> PropertyReport:
    """Single-edit sensitivity bound with bounded laws, identity embedding and
    unit priors: scores move at most 4 * ||x||_2 and the threshold at most 4."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    violations = 0
    edits = ("add_comparison", "add_rating", "remove", "modify")
    for trial in range(trials):
        model, dataset = _random_instance(
            rng, identity=True, law_kinds=("kary",), unit_priors=True
        )
        n = model.embedding.n_entities
        kind = edits[rng.integers(len(edits))]
        if kind == "add_comparison":
            b = int(rng.integers(n))
            c = int(rng.integers(n - 1))
            c += c >= b
            edited = dataset.adding_comparison(
                b, c, float(model.comparison_law.sample_tilted(0.0, rng))
            )
        elif kind == "add_rating":
            edited = dataset.adding_rating(
                int(rng.integers(n)), float(model.rating_law.sample_tilted(0.0, rng))
            )
        elif kind == "remove":
            if rng.random() < 0.5 and dataset.n_comparisons:
                edited = dataset.without_comparison(int(rng.integers(dataset.n_comparisons)))
            else:
                edited = dataset.without_rating(int(rng.integers(dataset.n_ratings)))
        else:
            if rng.random() < 0.5 and dataset.n_comparisons:
                edited = dataset.with_comparison_value(
                    int(rng.integers(dataset.n_comparisons)),
                    float(model.comparison_law.sample_tilted(0.0, rng)),
                )
            else:
                edited = dataset.with_rating_value(
                    int(rng.integers(dataset.n_ratings)),
                    float(model.rating_law.sample_tilted(0.0, rng)),
                )
        before = solve_map(model, dataset, _TRIAL_SOLVER)
        after = solve_map(model, edited, _warm(_TRIAL_SOLVER, before.stacked_point))
        bound_scores = 4.0 * model.embedding.spectral_norm
        score_move = float(np.linalg.norm(after.scores_star - before.scores_star))
        threshold_move = abs(after.theta0_star - before.theta0_star)
        margin = max(score_move - bound_scores, threshold_move - 4.0)
        worst = max(worst, margin)
        if margin > 0:
            violations += 1
    return PropertyReport(
        "lipschitz resilience", trials, violations, worst, detail="worst margin vs bound"
    )


def check_solver_determinism(seed=0, trials=10) -> PropertyReport:
    """Identical inputs give bit-identical solves."""
    rng_a = np.random.default_rng(seed)
    rng_b = np.random.default_rng(seed)
    violations = 0
    for _ in range(trials):
        model_a, data_a = _random_instance(rng_a)
        model_b, data_b = _random_instance(rng_b)
        result_a = solve_map(model_a, data_a, _TRIAL_SOLVER)
        result_b = solve_map(model_b, data_b, _TRIAL_SOLVER)
        same = np.array_equal(result_a.stacked_point, result_b.stacked_point)
        if not same or result_a.iterations != result_b.iterations:
            violations += 1
    return PropertyReport("solver determinism", trials, violations, float(violations))


# ---------------------------------------------------------------------------
# Metric suites
# ---------------------------------------------------------------------------


def check_metrics_invariances(seed=0, trials=200) -> PropertyReport:
    """Scale invariance, weight-shift exactness, and [-1, 1] bounds."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    count = 0
    for _ in range(trials):
        n = int(rng.integers(2, 40))
        estimated = rng.normal(size=n) * float(rng.uniform(0.1, 10.0))
        truth = rng.standard_cauchy(n)
        value = weighted_corr_exp(estimated, truth)
        scaled = weighted_corr_exp(float(rng.uniform(0.1, 100.0)) * estimated, truth)
        gap = abs(value - scaled)
        worst = max(worst, gap)
        count += 1
        if gap > 1e-12:
            violations += 1

        # direct-formula oracle with an arbitrary extra weight shift
        shift = float(rng.uniform(-5.0, 5.0))
        weights = np.exp(truth - truth.max() + shift)
        direct = float(
            np.sum(weights * estimated * truth)
            / (
                np.sqrt(np.sum(weights * estimated**2))
                * np.sqrt(np.sum(weights * truth**2))
            )
        )
        gap = abs(value - direct)
        worst = max(worst, gap)
        count += 1
        if gap > 1e-12:
            violations += 1

        pearson = pearson_corr(estimated, truth + rng.normal(size=n))
        for metric in (value, pearson):
            count += 1
            if not -1.0 <= metric <= 1.0:
                violations += 1
    return PropertyReport("metric invariances", count, violations, worst)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

# name -> (function, kwargs at full acceptance scale)
SUITES = {
    "cgf_convexity": (check_cgf_convexity, {}),
    "cgf_derivatives": (check_cgf_derivative_consistency, {}),
    "cgf_symmetry": (check_cgf_symmetry, {}),
    "draw_containment": (check_atom_containment, {}),
    "moments": (check_moments, {"n_draws": 100000}),
    "gradient_checks": (check_gradient_finite_differences, {"instances": 50}),
    "strong_convexity": (check_strong_convexity, {"instances": 100}),
    "translation_structure": (check_translation_structure, {}),
    "reduction_exactness": (check_reduction_exactness, {"instances": 100}),
    "threshold_identity": (check_threshold_identity, {"trials": 200}),
    "pairwise_monotonicity": (check_pairwise_monotonicity, {"trials": 1000}),
    "directional_update": (check_directional_update, {"trials": 500}),
    "zero_update": (check_zero_update, {"trials": 500}),
    "lipschitz_resilience": (check_lipschitz_resilience, {"trials": 500}),
    "solver_determinism": (check_solver_determinism, {}),
    "metric_invariances": (check_metrics_invariances, {}),
}


def run_all_property_suites(seed=0, scale=1.0) -> list[PropertyReport]:
    """Run every suite; ``scale`` shrinks trial counts for smoke runs."""
    reports = []
    for function, kwargs in SUITES.values():
        sized = dict(kwargs)
        for key in ("trials", "instances", "n_draws"):
            if key in sized:
                sized[key] = max(2, int(sized[key] * scale))
        reports.append(function(seed=seed, **sized))
    return reports
