from .base import (GBDT, KINDS, LR, MLP, ImportanceList, TrainedModel, decision_function,
                   feature_importance, predict_proba)
from .gbdt import train_gbdt
from .grid import DEFAULT_GRIDS, ModelSpec, default_grid, grid_search
from .lr import lr_objective, train_lr
from .mlp import mlp_loss_and_grad, train_mlp

__all__ = [
    "GBDT", "KINDS", "LR", "MLP", "DEFAULT_GRIDS", "ImportanceList", "ModelSpec", "TrainedModel",
    "decision_function", "default_grid", "feature_importance", "grid_search", "lr_objective",
    "mlp_loss_and_grad", "predict_proba", "train_gbdt", "train_lr", "train_mlp",
]
