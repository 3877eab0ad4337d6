"""Ranking and thresholded binary metrics, and cross-seed aggregation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError

METRICS = ("auroc", "auprc", "accuracy", "recall", "f1")
THRESHOLD = 0.5


@dataclass(frozen=True)
class MetricValue:
    name: str
    value: float
    n: int
    n_pos: int


def _prep(scores, labels):
    s = np.asarray(scores, dtype=float).reshape(-1)
    y = np.asarray(labels).reshape(-1).astype(np.int64)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    return s, y


def _midranks(x):
    """1-based ranks with ties sharing the mean of their positions."""
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    starts = np.r_[0, np.flatnonzero(np.diff(xs)) + 1]
    ends = np.r_[starts[1:], len(xs)]
    ranks = np.empty(len(x))
    ranks[order] = np.repeat((starts + ends + 1) / 2.0, ends - starts)
    return ranks


def auroc(scores, labels) -> float:
    """Area under the ROC curve via the Mann-Whitney statistic with midrank ties."""
    s, y = _prep(scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUROC needs both classes")
    r = _midranks(s)
    u = r[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auprc(scores, labels) -> float:
    """Step-wise area under the precision-recall curve.

    Thresholds sweep from the highest score down; rows sharing a score enter
    together, and each recall increment is weighted by the precision reached
    after that tie group.
    """
    s, y = _prep(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise UndefinedMetricError("AUPRC needs at least one positive")
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(np.diff(s)), len(s) - 1]  # final index of each tie group
    tp = np.cumsum(y)[last]
    fp = (last + 1) - tp
    precision = tp / (tp + fp)
    recall = tp / n_pos
    d_recall = np.diff(np.r_[0.0, recall])
    return float(np.sum(d_recall * precision))


def thresholded_metrics(scores, labels, threshold: float = THRESHOLD):
    """(accuracy, recall, f1) for predictions ``score >= threshold``.

    Recall is 0 when there are no positives; f1 is 0 when precision + recall is 0.
    """
    s, y = _prep(scores, labels)
    if len(y) == 0:
        raise UndefinedMetricError("no rows to score")
    pred = s >= threshold
    pos = y == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    fn = int(np.sum(~pred & pos))
    tn = len(y) - tp - fp - fn
    accuracy = (tp + tn) / len(y)
    recall = tp / (tp + fn) if tp + fn else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return float(accuracy), float(recall), float(f1)


def compute_metrics(scores, labels, names=METRICS) -> list[MetricValue]:
    """Evaluate each requested metric; undefined ones come back as ``NaN``."""
    s, y = _prep(scores, labels)
    n, n_pos = len(y), int(y.sum())
    out = {}
    for fn, key in ((auroc, "auroc"), (auprc, "auprc")):
        if key in names:
            try:
                out[key] = fn(s, y)
            except UndefinedMetricError:
                out[key] = float("nan")
    if any(k in names for k in ("accuracy", "recall", "f1")):
        if n:
            acc, rec, f1 = thresholded_metrics(s, y)
        else:
            acc = rec = f1 = float("nan")
        out.update(accuracy=acc, recall=rec, f1=f1)
    return [MetricValue(k, out[k], n, n_pos) for k in names]


def aggregate_seeds(values):
    """Mean and population standard deviation."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("aggregate_seeds needs at least one value")
    mean = float(v.mean())
    return mean, float(np.sqrt(np.mean((v - mean) ** 2)))
