"""Evaluation conventions for memory responses, plus a latent-space classifier.

The response taxonomy is correct / wrong class / rejected.  A wrong-class
response counts as a false positive for the predicted class and a false
negative for the true one; a rejection is a false negative only.  There are
no true negatives, so accuracy and recall coincide by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REJECTED_LABEL = 0xFFFF  # sentinel in predicted-label files


@dataclass(frozen=True)
class ResponseRecord:
    """One cue's outcome; ``predicted_class is None`` means rejected."""

    true_class: int
    predicted_class: int | None


@dataclass
class EvalReport:
    total: int
    correct: int
    wrong_class: int
    rejected: int
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    accuracy: float
    f1: float
    entropy: float | None = None  # memory entropy at evaluation time


def evaluate(records, entropy: float | None = None) -> EvalReport:
    """Tally responses into the precision/recall/accuracy/F1 report."""
    records = list(records)
    if not records:
        raise ValueError("cannot evaluate an empty response list")
    correct = sum(1 for r in records
                  if r.predicted_class is not None
                  and r.predicted_class == r.true_class)
    rejected = sum(1 for r in records if r.predicted_class is None)
    wrong = len(records) - correct - rejected

    tp, fp = correct, wrong
    fn = wrong + rejected
    total = len(records)
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / total
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return EvalReport(total, correct, wrong, rejected, tp, fp, fn,
                      precision, recall, recall, f1, entropy)


def evaluate_labels(true_labels, predicted_labels,
                    entropy: float | None = None) -> EvalReport:
    """Evaluate from label arrays; ``REJECTED_LABEL`` marks rejections."""
    true = np.asarray(true_labels)
    pred = np.asarray(predicted_labels)
    if true.shape != pred.shape or true.ndim != 1:
        raise ValueError(
            f"label arrays must match: {true.shape} vs {pred.shape}")
    records = [ResponseRecord(int(t), None if p == REJECTED_LABEL else int(p))
               for t, p in zip(true, pred)]
    return evaluate(records, entropy)


class CentroidClassifier:
    """Nearest-centroid classifier; ties break toward the lowest class id."""

    def __init__(self, centroids: np.ndarray, classes: np.ndarray):
        self.centroids = np.asarray(centroids, dtype=np.float64)
        self.classes = np.asarray(classes)
        if self.centroids.ndim != 2 or len(self.centroids) != len(self.classes):
            raise ValueError("need one centroid per class")

    @classmethod
    def fit(cls, features, labels) -> "CentroidClassifier":
        x = np.asarray(features, dtype=np.float64)
        y = np.asarray(labels)
        if x.ndim != 2 or x.shape[0] != y.shape[0] or x.shape[0] == 0:
            raise ValueError("features and labels must be non-empty and aligned")
        classes = np.unique(y)  # sorted, so argmin tie-break picks the lowest
        centroids = np.stack([x[y == c].mean(axis=0) for c in classes])
        return cls(centroids, classes)

    def predict(self, features) -> np.ndarray | int:
        x = np.asarray(features, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.centroids.shape[1]:
            raise ValueError(
                f"feature width {x.shape[1]} != centroid width "
                f"{self.centroids.shape[1]}")
        # squared distance minus the per-row ||x||^2 constant, which cannot
        # change the argmin or the tie ordering
        scores = (self.centroids ** 2).sum(axis=1)[None, :] \
            - 2.0 * (x @ self.centroids.T)
        picks = self.classes[np.argmin(scores, axis=1)]
        return picks[0] if single else picks
