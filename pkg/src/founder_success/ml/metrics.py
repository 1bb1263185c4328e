"""Confusion matrix and the four reported metrics: accuracy, precision, F1, TPR.

F1 is the harmonic mean of precision and TPR. Metrics whose denominator is
zero are ``None`` ("undefined"), never silently 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float
    precision: float | None
    f1: float | None
    tpr: float | None


def confusion_matrix(y_true, y_pred) -> ConfusionMatrix:
    t = np.asarray(y_true, dtype=bool)
    p = np.asarray(y_pred, dtype=bool)
    if t.shape != p.shape:
        raise ValueError("label and prediction shapes differ")
    return ConfusionMatrix(
        tp=int(np.sum(t & p)),
        fp=int(np.sum(~t & p)),
        tn=int(np.sum(~t & ~p)),
        fn=int(np.sum(t & ~p)),
    )


def report_from_confusion(cm: ConfusionMatrix) -> EvalReport:
    if cm.total == 0:
        raise ValueError("empty test set")
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp > 0 else None
    tpr = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn > 0 else None
    f1 = None
    if precision is not None and tpr is not None and precision + tpr > 0:
        f1 = 2 * precision * tpr / (precision + tpr)
    return EvalReport(cm, accuracy, precision, f1, tpr)


def evaluate(model, X, y) -> EvalReport:
    return report_from_confusion(confusion_matrix(y, model.predict(X)))
