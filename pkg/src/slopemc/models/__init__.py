"""Surrogate classifiers for slope-stability feature vectors."""

from .base import Standardizer, load_model, predicted_pf, save_model
from .forest import RandomForestModel, RfParams, train_random_forest
from .metrics import Metrics, accuracy, confusion_counts, evaluate, pf_error, roc_auc
from .mlp import DivergenceError, MlpModel, MlpParams, train_mlp
from .svm import ConvergenceError, SvcModel, SvcParams, train_svc
from .tuning import CvResult, grid_search_cv, stratified_folds

MODEL_KINDS = ("rf", "svc", "mlp")


def train_model(kind: str, dataset, params=None, seed: int = 0):
    """Dispatch training by model kind with default hyperparameters."""
    if kind == "rf":
        return train_random_forest(dataset, params or RfParams(), seed)
    if kind == "svc":
        return train_svc(dataset, params or SvcParams(), seed)
    if kind == "mlp":
        return train_mlp(dataset, params or MlpParams(), seed)
    raise ValueError(f"unknown model kind: {kind}")


def default_params(kind: str):
    if kind == "rf":
        return RfParams()
    if kind == "svc":
        return SvcParams()
    if kind == "mlp":
        return MlpParams()
    raise ValueError(f"unknown model kind: {kind}")


__all__ = [
    "MODEL_KINDS",
    "Standardizer",
    "Metrics",
    "RfParams",
    "SvcParams",
    "MlpParams",
    "RandomForestModel",
    "SvcModel",
    "MlpModel",
    "ConvergenceError",
    "DivergenceError",
    "CvResult",
    "accuracy",
    "confusion_counts",
    "evaluate",
    "roc_auc",
    "pf_error",
    "predicted_pf",
    "grid_search_cv",
    "stratified_folds",
    "train_model",
    "train_random_forest",
    "train_svc",
    "train_mlp",
    "default_params",
    "save_model",
    "load_model",
]
