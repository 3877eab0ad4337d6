from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import DomainError, TrainingError

LR, GBDT, MLP = "LR", "GBDT", "MLP"
KINDS = (LR, GBDT, MLP)
_EPS = 1e-15


@dataclass
class TrainedModel:
    """A fitted classifier of one of the three kinds.

    ``params`` holds numpy arrays (LR: ``coef``, ``intercept``; GBDT: ``init`` and
    ``trees``; MLP: ``W1``, ``b1``, ``w2``, ``b2``). ``meta`` carries training
    bookkeeping such as iteration counts, convergence and the grid-search cell
    scores.
    """

    kind: str
    hyperparams: dict
    params: dict
    column_names: list
    meta: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return len(self.column_names)

    def to_dict(self) -> dict:
        params = {}
        for k, v in self.params.items():
            if k == "trees":
                params[k] = [{a: np.asarray(b).tolist() for a, b in t.items()} for t in v]
            else:
                params[k] = np.asarray(v).tolist()
        return {"kind": self.kind, "hyperparams": _jsonable(self.hyperparams),
                "params": params, "column_names": list(self.column_names),
                "meta": _jsonable(self.meta)}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        params = {}
        for k, v in d["params"].items():
            if k == "trees":
                params[k] = [{a: np.asarray(b, dtype=np.int64 if a in _INT_TREE_KEYS else float)
                              for a, b in t.items()} for t in v]
            else:
                params[k] = np.asarray(v, dtype=float)
        hp = dict(d["hyperparams"])
        if "hidden_layer_sizes" in hp:
            hp["hidden_layer_sizes"] = tuple(hp["hidden_layer_sizes"])
        return cls(d["kind"], hp, params, list(d["column_names"]), dict(d.get("meta", {})))

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, path) -> "TrainedModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


_INT_TREE_KEYS = ("feature", "left", "right")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def check_training_data(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).reshape(-1)
    if X.ndim != 2 or X.shape[0] == 0:
        raise TrainingError("training matrix is empty")
    if X.shape[0] != y.shape[0]:
        raise TrainingError("X and y differ in length")
    if not np.all(np.isfinite(X)):
        raise TrainingError("training matrix has non-finite entries")
    if not np.all((y == 0) | (y == 1)):
        raise TrainingError("labels must be 0/1")
    if y.min() == y.max():
        raise TrainingError(f"labels contain a single class ({int(y[0])})")
    return X, y.astype(float)


def decision_function(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DomainError(f"expected {model.n_features} columns, got {X.shape[-1]}")
    p = model.params
    if model.kind == LR:
        return X @ p["coef"] + float(p["intercept"])
    if model.kind == GBDT:
        from .gbdt import ensemble_margin
        return ensemble_margin(p["init"], p["trees"], model.hyperparams["learning_rate"], X)
    if model.kind == MLP:
        from .mlp import forward
        return forward(p["W1"], p["b1"], p["w2"], p["b2"], X)[1]
    raise DomainError(f"unknown model kind {model.kind!r}")


def predict_proba(model: TrainedModel, X) -> np.ndarray:
    """Positive-class probabilities, kept strictly inside (0, 1)."""
    return np.clip(expit(decision_function(model, X)), _EPS, 1 - _EPS)


class ImportanceList(list):
    """``[(column, importance), ...]`` sorted descending; ``supported`` is False for MLP."""

    def __init__(self, items=(), supported=True):
        super().__init__(items)
        self.supported = supported


def feature_importance(model: TrainedModel) -> ImportanceList:
    """Absolute coefficients (LR) or summed split gains (GBDT); MLP is unsupported."""
    if model.kind == LR:
        imp = np.abs(np.asarray(model.params["coef"], dtype=float))
    elif model.kind == GBDT:
        imp = np.zeros(model.n_features)
        for tree in model.params["trees"]:
            internal = tree["feature"] >= 0
            np.add.at(imp, tree["feature"][internal], tree["gain"][internal])
    else:
        return ImportanceList(supported=False)
    order = np.argsort(-imp, kind="stable")
    return ImportanceList((model.column_names[j], float(imp[j])) for j in order)
