"""Accuracy metrics between estimated and ground-truth score vectors."""

from __future__ import annotations

import numpy as np


class UndefinedMetricError(ValueError):
    """The metric is undefined for this input (degenerate vectors)."""


def _check_pair(estimated, truth) -> tuple[np.ndarray, np.ndarray]:
    estimated = np.asarray(estimated, dtype=float).reshape(-1)
    truth = np.asarray(truth, dtype=float).reshape(-1)
    if len(estimated) != len(truth):
        raise ValueError(
            f"score vectors differ in length: {len(estimated)} vs {len(truth)}"
        )
    if len(estimated) < 2:
        raise ValueError("need at least two entities to compare scores")
    if not (np.all(np.isfinite(estimated)) and np.all(np.isfinite(truth))):
        raise ValueError("score vectors must be finite")
    return estimated, truth


def pearson_corr(estimated, truth) -> float:
    """Centered Pearson correlation; raises on zero-variance input."""
    estimated, truth = _check_pair(estimated, truth)
    est = estimated - estimated.mean()
    tru = truth - truth.mean()
    denom = np.linalg.norm(est) * np.linalg.norm(tru)
    if denom == 0.0:
        raise UndefinedMetricError("Pearson correlation undefined for constant scores")
    return float(np.clip(est @ tru / denom, -1.0, 1.0))


def weighted_corr_exp(estimated, truth) -> float:
    """Uncentered cosine with weights exp(truth_i), emphasizing top entities.

    Deliberately not centered: translating the estimated scores changes the
    value.  The weights are computed with a max shift on the truth scores,
    which is exact because the metric is invariant to rescaling all weights.
    """
    estimated, truth = _check_pair(estimated, truth)
    weights = np.exp(truth - truth.max())
    numerator = np.sum(weights * estimated * truth)
    denom = np.sqrt(np.sum(weights * estimated**2)) * np.sqrt(
        np.sum(weights * truth**2)
    )
    if denom == 0.0:
        raise UndefinedMetricError(
            "weighted correlation undefined when a weighted vector is zero"
        )
    return float(np.clip(numerator / denom, -1.0, 1.0))
