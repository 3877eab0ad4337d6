"""Evaluate binary classifiers over simulated deployment dates.

Train at each time point under a chosen historical-data regime, score the model
on every later time point, and summarize how performance decays with staleness.
"""
from .data import (EncodedMatrix, Encoder, FeatureSpec, TemporalDataset, TemporalRecord,
                   first_entry_filter, fit_encoder, load_dataset, missingness_profile, transform)
from .engine import (EvalRecord, ExperimentConfig, ResultTable, max_auroc_drop, run_experiment,
                     staleness_delta)
from .metrics import aggregate_seeds, auprc, auroc, thresholded_metrics
from .models import ModelSpec, TrainedModel, feature_importance, grid_search, predict_proba
from .regimes import (RegimeKind, RegimeSpec, SplitPlan, SplitRatios, in_period_range, make_split,
                      out_of_period_eval_sets, staleness)
from .synthgen import ShiftScript, generate, golden_curve

__all__ = [
    "EncodedMatrix", "Encoder", "EvalRecord", "ExperimentConfig", "FeatureSpec", "ModelSpec",
    "RegimeKind", "RegimeSpec", "ResultTable", "ShiftScript", "SplitPlan", "SplitRatios",
    "TemporalDataset", "TemporalRecord", "TrainedModel", "aggregate_seeds", "auprc", "auroc",
    "feature_importance", "first_entry_filter", "fit_encoder", "generate", "golden_curve",
    "grid_search", "in_period_range", "load_dataset", "make_split", "max_auroc_drop",
    "missingness_profile", "out_of_period_eval_sets", "predict_proba", "run_experiment",
    "staleness", "staleness_delta", "thresholded_metrics", "transform",
]
