"""Fault classifiers over fixed-length feature vectors, with shared
evaluation protocols and a common on-disk model format."""

import numpy as np

from ..features import FeatureVector
from ..types import FaultLabel, GridwardError
from .ann import (
    AnnModel,
    batch_gradients,
    batch_loss,
    gradient_check,
    predict_ann,
    train_ann,
)
from .data import LabeledDataset
from .evaluation import (
    EvalReport,
    budget_sweep,
    classification_windows,
    evaluate,
    preemptive_curve,
    stratified_split,
    train_model,
    predict_model,
)
from .forest import ForestModel, Tree, predict_rf, train_rf, tree_votes
from .model_io import load_model, save_model
from .svm import (
    PairSvm,
    SvmModel,
    decision_values,
    predict_svm,
    rbf_kernel,
    train_svm,
)


def predict(model, x):
    """Classify one feature vector; returns (FaultLabel, confidence)."""
    if isinstance(x, FeatureVector):
        x = x.values
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise GridwardError("predict: expected a single 1-d feature vector")
    codes, conf = predict_model(model, x[None, :])
    return FaultLabel(int(codes[0])), float(conf[0])


__all__ = [
    "AnnModel",
    "EvalReport",
    "ForestModel",
    "LabeledDataset",
    "PairSvm",
    "SvmModel",
    "Tree",
    "batch_gradients",
    "batch_loss",
    "budget_sweep",
    "classification_windows",
    "decision_values",
    "evaluate",
    "gradient_check",
    "load_model",
    "predict",
    "predict_ann",
    "predict_model",
    "predict_rf",
    "predict_svm",
    "preemptive_curve",
    "rbf_kernel",
    "save_model",
    "stratified_split",
    "train_ann",
    "train_model",
    "train_rf",
    "train_svm",
    "tree_votes",
]
