"""Gradient boosted regression trees under logistic loss.

Each round fits a depth-limited least-squares tree to the residuals ``y - p``
and replaces every leaf value with a single Newton step
``sum(y - p) / sum(p (1 - p))``, shrunk by the learning rate.

Splits are searched over per-feature candidate thresholds. A feature with at
most ``max_bins`` distinct training values gets every midpoint as a candidate
(exact search); wider features use ``max_bins - 1`` midpoints at evenly spaced
ranks of the sorted distinct values.
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import DomainError
from .base import GBDT, TrainedModel, check_training_data

MAX_BINS = 256
MIN_GAIN = 1e-12


def _candidate_cuts(col, max_bins):
    vals = np.unique(col)
    if len(vals) <= 1:
        return np.empty(0)
    mids = (vals[:-1] + vals[1:]) / 2.0
    if len(mids) > max_bins - 1:
        pick = np.linspace(0, len(mids) - 1, max_bins - 1).round().astype(int)
        mids = mids[np.unique(pick)]
    return mids


def _bin(X, cuts):
    # code k means cuts[k-1] < x <= cuts[k]; rows with code <= k go left of cut k
    return np.column_stack([np.searchsorted(c, X[:, j], side="left")
                            for j, c in enumerate(cuts)]) if cuts else np.zeros((len(X), 0), int)


class _TreeBuilder:
    def __init__(self, codes, cuts, max_depth):
        self.codes = codes
        self.cuts = cuts
        self.max_depth = max_depth
        self.nb = max((len(c) + 1 for c in cuts), default=1)
        self.offsets = np.arange(codes.shape[1]) * self.nb

    def _best_split(self, rows, r):
        n = len(rows)
        d = self.codes.shape[1]
        if n < 2 or d == 0:
            return None
        flat = (self.codes[rows] + self.offsets).ravel()
        size = d * self.nb
        sums = np.bincount(flat, weights=np.repeat(r[rows], d), minlength=size).reshape(d, self.nb)
        cnts = np.bincount(flat, minlength=size).reshape(d, self.nb)
        sl = np.cumsum(sums, axis=1)[:, :-1]
        nl = np.cumsum(cnts, axis=1)[:, :-1]
        total, nr = r[rows].sum(), n - nl
        ok = (nl > 0) & (nr > 0)
        for j, c in enumerate(self.cuts):
            ok[j, len(c):] = False
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = np.where(ok, sl ** 2 / nl + (total - sl) ** 2 / nr - total ** 2 / n, -np.inf)
        j, k = np.unravel_index(np.argmax(gain), gain.shape)
        if not gain[j, k] > MIN_GAIN:
            return None
        return int(j), int(k), float(gain[j, k])

    def build(self, r, h):
        feature, threshold, left, right, value, gain = [], [], [], [], [], []

        def new_node():
            for lst, v in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1),
                           (value, 0.0), (gain, 0.0)):
                lst.append(v)
            return len(feature) - 1

        stack = [(new_node(), np.arange(len(r)), 0)]
        while stack:
            node, rows, depth = stack.pop()
            split = self._best_split(rows, r) if depth < self.max_depth else None
            if split is None:
                den = h[rows].sum()
                value[node] = float(r[rows].sum() / den) if den > 1e-150 else 0.0
                continue
            j, k, g = split
            mask = self.codes[rows, j] <= k
            feature[node], threshold[node], gain[node] = j, float(self.cuts[j][k]), g
            left[node], right[node] = new_node(), new_node()
            stack.append((right[node], rows[~mask], depth + 1))
            stack.append((left[node], rows[mask], depth + 1))
        return {"feature": np.array(feature, dtype=np.int64), "threshold": np.array(threshold),
                "left": np.array(left, dtype=np.int64), "right": np.array(right, dtype=np.int64),
                "value": np.array(value), "gain": np.array(gain)}


def tree_predict(tree, X) -> np.ndarray:
    node = np.zeros(len(X), dtype=np.int64)
    feat = tree["feature"]
    active = feat[node] >= 0
    while active.any():
        idx = np.flatnonzero(active)
        nd = node[idx]
        go_left = X[idx, feat[nd]] <= tree["threshold"][nd]
        node[idx] = np.where(go_left, tree["left"][nd], tree["right"][nd])
        active[idx] = feat[node[idx]] >= 0
    return tree["value"][node]


def tree_depth(tree) -> int:
    depth = np.zeros(len(tree["feature"]), dtype=np.int64)
    for i in range(len(depth)):  # children are always appended after their parent
        if tree["feature"][i] >= 0:
            depth[tree["left"][i]] = depth[tree["right"][i]] = depth[i] + 1
    return int(depth.max())


def ensemble_margin(init, trees, learning_rate, X) -> np.ndarray:
    f = np.full(len(X), float(init))
    for t in trees:
        f += learning_rate * tree_predict(t, X)
    return f


def logistic_loss(y, margin) -> float:
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


def train_gbdt(X, y, n_estimators: int, max_depth: int, learning_rate: float,
               column_names=None, max_bins: int = MAX_BINS):
    if n_estimators < 0 or max_depth < 1 or not learning_rate > 0:
        raise DomainError("invalid GBDT hyperparameters")
    X, y = check_training_data(X, y)
    pos = y.mean()
    init = float(np.log(pos / (1 - pos)))
    cuts = [_candidate_cuts(X[:, j], max_bins) for j in range(X.shape[1])]
    builder = _TreeBuilder(_bin(X, cuts), cuts, max_depth)
    margin = np.full(len(y), init)
    trees, losses = [], [logistic_loss(y, margin)]
    for _ in range(n_estimators):
        p = expit(margin)
        tree = builder.build(y - p, p * (1 - p))
        margin = margin + learning_rate * tree_predict(tree, X)
        trees.append(tree)
        losses.append(logistic_loss(y, margin))
    names = list(column_names) if column_names is not None else [f"x{j}" for j in range(X.shape[1])]
    return TrainedModel(
        GBDT,
        {"n_estimators": int(n_estimators), "max_depth": int(max_depth),
         "learning_rate": float(learning_rate)},
        {"init": np.array(init), "trees": trees},
        names,
        {"iterations": int(n_estimators), "converged": True, "train_loss": losses},
    )
