"""Hyperparameter grids and validation-AUROC model selection."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from ..errors import DomainError, TrainingError, UndefinedMetricError
from ..metrics import auroc
from .base import GBDT, KINDS, LR, MLP, predict_proba
from .gbdt import train_gbdt
from .lr import train_lr
from .mlp import train_mlp

logger = logging.getLogger(__name__)

# Searched values, in listing order; cells enumerate row-major over the keys.
DEFAULT_GRIDS = {
    LR: {"C": [0.01, 0.1, 1.0, 10.0, 1e2, 1e3, 1e4, 1e5]},
    GBDT: {"n_estimators": [50, 100], "max_depth": [3, 5], "learning_rate": [0.01, 0.1]},
    MLP: {"hidden_layer_sizes": [(3,), (5,)], "learning_rate_init": [1e-4, 1e-3, 0.01]},
}


def default_grid(kind: str) -> dict:
    return {k: list(v) for k, v in DEFAULT_GRIDS[kind].items()}


@dataclass
class ModelSpec:
    kind: str
    grid: dict = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown model kind {self.kind!r}")
        if self.grid is None:
            self.grid = default_grid(self.kind)
        else:
            unknown = set(self.grid) - set(DEFAULT_GRIDS[self.kind])
            if unknown:
                raise DomainError(f"{self.kind} grid has unknown keys {sorted(unknown)}")
            merged = default_grid(self.kind)
            merged.update({k: list(v) for k, v in self.grid.items()})
            self.grid = merged
        if "hidden_layer_sizes" in self.grid:
            self.grid["hidden_layer_sizes"] = [tuple(h) if isinstance(h, (list, tuple)) else (int(h),)
                                               for h in self.grid["hidden_layer_sizes"]]
        if not self.cells():
            raise DomainError(f"{self.kind} grid is empty")

    def cells(self) -> list[dict]:
        keys = list(self.grid)
        return [dict(zip(keys, vals)) for vals in itertools.product(*(self.grid[k] for k in keys))]

    def to_dict(self):
        return {"kind": self.kind,
                "grid": {k: [list(v) if isinstance(v, tuple) else v for v in vs]
                         for k, vs in self.grid.items()}}


def train_cell(kind, hp, X, y, seed=0, column_names=None):
    if kind == LR:
        return train_lr(X, y, hp["C"], column_names=column_names)
    if kind == GBDT:
        return train_gbdt(X, y, hp["n_estimators"], hp["max_depth"], hp["learning_rate"],
                          column_names=column_names)
    return train_mlp(X, y, hp["hidden_layer_sizes"], hp["learning_rate_init"], seed=seed,
                     column_names=column_names)


def grid_search(spec: ModelSpec, train, val, seed: int = 0):
    """Fit one model per grid cell and keep the one with the best validation AUROC.

    ``train`` and ``val`` are :class:`~drifteval.data.EncodedMatrix` instances.
    Ties go to the earliest cell. Every cell's score is kept in
    ``model.meta["cell_scores"]`` (``None`` for cells that failed to train).
    """
    yv = val.labels
    if yv.min() == yv.max():
        raise UndefinedMetricError("validation set has a single class")
    best, best_score, scores, failures = None, -1.0, [], []
    for i, hp in enumerate(spec.cells()):
        try:
            model = train_cell(spec.kind, hp, train.rows, train.labels, seed, train.column_names)
        except TrainingError as exc:
            logger.debug("%s cell %d %s failed: %s", spec.kind, i, hp, exc)
            failures.append(f"{hp}: {exc}")
            scores.append(None)
            continue
        score = auroc(predict_proba(model, val.rows), yv)
        scores.append(score)
        if score > best_score:
            best, best_score = model, score
    if best is None:
        raise TrainingError(f"every {spec.kind} grid cell failed: " + "; ".join(failures))
    best.meta["val_auroc"] = best_score
    best.meta["cell_scores"] = scores
    best.meta["cell_index"] = scores.index(best_score)
    return best
