"""Classifier and throughput performance measures.

Confusion matrix convention: rows are the true class, columns the
predicted class, so C[0, 1] counts denials predicted as grants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

# Anti-diagonal identity; E = Tr(J C^T) picks out the off-diagonal counts.
ANTI_DIAGONAL = np.array([[0, 1], [1, 0]], dtype=int)

CDF_GRID_POINTS = 512


def confusion_matrix(y_true, y_pred) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape:
        raise ValueError("label vectors must have the same length")
    if y_true.size and (y_true.min() < 0 or y_true.max() > 1 or y_pred.min() < 0 or y_pred.max() > 1):
        raise ValueError("labels must be binary")
    c = np.zeros((2, 2), dtype=int)
    for t in (0, 1):
        for p in (0, 1):
            c[t, p] = int(np.sum((y_true == t) & (y_pred == p)))
    return c


def misclassification(c: np.ndarray, n: int | None = None) -> tuple[int, float]:
    """Misclassification count E = Tr(J C^T) and error mu = E / n."""
    c = np.asarray(c)
    if c.shape != (2, 2) or np.any(c < 0):
        raise ValueError("confusion matrix must be 2x2 with nonnegative counts")
    e = int(np.trace(ANTI_DIAGONAL @ c.T))
    n = int(c.sum()) if n is None else int(n)
    if n == 0:
        raise ValueError("misclassification rate undefined for n = 0")
    return e, e / n


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve via average ranks (Mann-Whitney form)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have the same length")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC AUC needs both classes present")
    ranks = rankdata(scores)  # average rank on ties
    rank_sum_pos = float(np.sum(ranks[labels == 1]))
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def throughput_stats(rates, n_grid: int = CDF_GRID_POINTS) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean and empirical CDF of effective rates on a fixed 0..max grid."""
    rates = np.asarray(rates, dtype=float)
    if rates.size == 0:
        raise ValueError("need at least one rate sample")
    grid = np.linspace(0.0, float(rates.max()), n_grid)
    sorted_rates = np.sort(rates)
    cdf = np.searchsorted(sorted_rates, grid, side="right") / rates.size
    return float(rates.mean()), grid, cdf


@dataclass
class PolicyStats:
    """Outcome of one policy over one run's evaluated UE population."""

    policy: str
    mean: float
    normalized_mean: float
    requests: int
    grants: int
    n_samples: int
    cdf_grid: np.ndarray
    cdf_values: np.ndarray
    samples: np.ndarray


@dataclass
class ClassifierStats:
    kind: str
    feature_mode: str
    confusion: np.ndarray
    error_count: int
    error_rate: float
    roc_area: float | None
    n_scored: int
    n_training: int


@dataclass
class RunReport:
    """Aggregated outcome of one scenario run."""

    scenario: str
    policies: dict[str, PolicyStats]
    classifier: ClassifierStats | None
    t_c_sub6: float
    t_c_mmwave: float
    config: dict
    warnings: list[str] = field(default_factory=list)

    def normalized_means(self) -> dict[str, float]:
        return {name: stats.normalized_mean for name, stats in self.policies.items()}
