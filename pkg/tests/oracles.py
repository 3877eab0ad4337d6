"""Slow, independent reference implementations used only by the tests."""
import itertools

import numpy as np


def pairwise_auroc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p, n in itertools.product(pos, neg):
        total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


def sweep_auprc(scores, labels):
    """Threshold at every distinct score (descending); step-wise precision x recall gain."""
    n_pos = sum(labels)
    area, prev_recall = 0.0, 0.0
    for thr in sorted(set(scores), reverse=True):
        tp = sum(1 for s, y in zip(scores, labels) if s >= thr and y == 1)
        pp = sum(1 for s in scores if s >= thr)
        recall = tp / n_pos
        area += (recall - prev_recall) * (tp / pp)
        prev_recall = recall
    return area


def confusion_metrics(scores, labels, thr=0.5):
    tp = fp = fn = tn = 0
    for s, y in zip(scores, labels):
        pred = 1 if s >= thr else 0
        if pred and y:
            tp += 1
        elif pred:
            fp += 1
        elif y:
            fn += 1
        else:
            tn += 1
    acc = (tp + tn) / len(labels)
    rec = tp / (tp + fn) if tp + fn else 0.0
    prec = tp / (tp + fp) if tp + fp else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return acc, rec, f1


def central_diff(f, x, h=1e-5):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def rel_err(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-12))


def random_scores_with_ties(rng, n):
    """Scores on a coarse grid so ties are common; both classes guaranteed."""
    scores = rng.integers(0, max(2, n // 3), n) / 10.0
    labels = rng.integers(0, 2, n)
    labels[0], labels[1] = 0, 1
    return scores, labels
