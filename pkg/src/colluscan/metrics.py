"""Evaluation metrics and drop-one feature importance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class Metrics:
    tpr: float
    fpr: Optional[float] = None
    accuracy: Optional[float] = None
    auc: Optional[float] = None

    def as_dict(self) -> dict:
        return {"tpr": self.tpr, "fpr": self.fpr,
                "accuracy": self.accuracy, "auc": self.auc}


def auc_score(scores: np.ndarray, truth: np.ndarray) -> float:
    """Rank (Mann-Whitney) AUC with ties at half credit."""
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(truth, dtype=bool)
    n_pos = int(truth.sum())
    n_neg = len(truth) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = rankdata(scores)
    pos_rank_sum = ranks[truth].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def evaluate(scores: Sequence[float], predicted: Sequence[bool],
             truth: Sequence[bool]) -> Metrics:
    """Confusion-matrix metrics plus rank AUC.

    ``predicted``/``truth`` are positive-class indicators ("positive" =
    collusive). With a single-class truth vector only the TPR is defined,
    mirroring one-class evaluation where just held-out positives exist.
    """
    scores = np.asarray(scores, dtype=float)
    predicted = np.asarray(predicted, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if not (len(scores) == len(predicted) == len(truth)):
        raise ValueError("scores, predictions and truth must align")
    if len(truth) == 0:
        raise ValueError("nothing to evaluate")
    tp = int((predicted & truth).sum())
    fn = int((~predicted & truth).sum())
    fp = int((predicted & ~truth).sum())
    tn = int((~predicted & ~truth).sum())
    if tp + fn == 0:
        raise ValueError("no positive examples in truth")
    tpr = tp / (tp + fn)
    if fp + tn == 0:
        return Metrics(tpr=tpr)
    return Metrics(
        tpr=tpr,
        fpr=fp / (fp + tn),
        accuracy=(tp + tn) / len(truth),
        auc=auc_score(scores, truth),
    )


def mean_metrics(per_fold: list[Metrics]) -> Metrics:
    """Field-wise mean over folds; optional fields must agree in presence."""
    def avg(vals):
        vals = [v for v in vals]
        if any(v is None for v in vals):
            return None
        return float(np.mean(vals))
    return Metrics(
        tpr=float(np.mean([m.tpr for m in per_fold])),
        fpr=avg([m.fpr for m in per_fold]),
        accuracy=avg([m.accuracy for m in per_fold]),
        auc=avg([m.auc for m in per_fold]),
    )


def feature_importance(trainer: Callable[[np.ndarray], float],
                       features: np.ndarray,
                       feature_names: Sequence[str]) -> list[tuple[str, float]]:
    """Drop-one importance: metric with all features minus metric without f.

    ``trainer`` maps a feature matrix to the evaluation metric, retraining
    with a fixed seed each call. Result is sorted descending by importance.
    """
    features = np.asarray(features, dtype=float)
    if features.shape[1] < 2:
        raise ValueError("need at least 2 features to drop one")
    if features.shape[1] != len(feature_names):
        raise ValueError("feature names must align with columns")
    baseline = trainer(features)
    importances = []
    for i, name in enumerate(feature_names):
        reduced = np.delete(features, i, axis=1)
        importances.append((name, baseline - trainer(reduced)))
    importances.sort(key=lambda kv: kv[1], reverse=True)
    return importances
