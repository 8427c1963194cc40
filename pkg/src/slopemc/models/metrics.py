"""Binary classification metrics: accuracy, confusion counts, rank AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Metrics:
    acc: float
    auc: float
    tp: int
    tn: int
    fp: int
    fn: int


def confusion_counts(predictions, labels) -> tuple[int, int, int, int]:
    """(TP, TN, FP, FN) with class 1 (failed) as positive."""
    p = np.asarray(predictions).astype(np.int64)
    y = np.asarray(labels).astype(np.int64)
    if p.shape != y.shape:
        raise ValueError("predictions and labels differ in length")
    tp = int(np.sum((p == 1) & (y == 1)))
    tn = int(np.sum((p == 0) & (y == 0)))
    fp = int(np.sum((p == 1) & (y == 0)))
    fn = int(np.sum((p == 0) & (y == 1)))
    return tp, tn, fp, fn


def accuracy(predictions, labels) -> float:
    tp, tn, fp, fn = confusion_counts(predictions, labels)
    return (tp + tn) / (tp + tn + fp + fn)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned their group average."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sv = values[order]
    i = 0
    while i < len(sv):
        j = i
        while j + 1 < len(sv) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """Rank-based (Mann-Whitney) AUC; tied score pairs count one half.

    Equals the fraction of (positive, negative) pairs the score orders
    correctly. Undefined for single-class inputs.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(np.int64)
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC is undefined when only one class is present")
    ranks = _average_ranks(s)
    rank_sum = float(np.sum(ranks[y == 1]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def evaluate(model, features, labels) -> Metrics:
    """ACC from hard labels at threshold 0.5, AUC from probabilities."""
    proba = model.predict_proba(features)
    preds = (proba >= 0.5).astype(np.int64)
    tp, tn, fp, fn = confusion_counts(preds, labels)
    return Metrics(
        acc=(tp + tn) / (tp + tn + fp + fn),
        auc=roc_auc(proba, labels),
        tp=tp,
        tn=tn,
        fp=fp,
        fn=fn,
    )


def pf_error(predicted_pf: float, reference_pf: float) -> float:
    """Absolute difference in percentage points."""
    return abs(predicted_pf - reference_pf)
