"""Grid-search k-fold cross-validation with stratified folds.

Every grid point is scored on identical fold assignments. Fold training
seeds derive from (seed, fold index) only, never from the grid position,
so re-running k-fold at the winning point reproduces its scores exactly.
Ties break toward the simplest model: smallest c, then smallest gamma,
then fewest trees, then fewest units, then grid order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from ..seeding import derive_seed
from .forest import RfParams, fit_random_forest
from .metrics import accuracy
from .mlp import MlpParams, fit_mlp
from .svm import SvcParams, fit_svc


@dataclass(frozen=True)
class CvResult:
    kind: str
    winner: object
    mean_score: float
    fold_scores: tuple[float, ...]
    table: tuple  # ((params, fold_scores, mean), ...) in grid order


_PARAM_CLS = {"rf": RfParams, "svc": SvcParams, "mlp": MlpParams}


def stratified_folds(labels, k: int, seed: int) -> list[np.ndarray]:
    """Fold membership as k disjoint index arrays, class-balanced."""
    y = np.asarray(labels).astype(np.int64)
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(derive_seed(seed, 7))
    fold_of = np.empty(len(y), dtype=np.int64)
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(len(members))]
        fold_of[members] = np.arange(len(members)) % k
    return [np.flatnonzero(fold_of == f) for f in range(k)]


def _expand_grid(kind: str, grid: dict) -> list:
    cls = _PARAM_CLS[kind]
    defaults = cls()
    keys = sorted(grid.keys())
    for key in keys:
        if key not in cls.__dataclass_fields__:
            raise ValueError(f"unknown {kind} hyperparameter: {key}")
    points = []
    for combo in product(*(grid[k] for k in keys)):
        kwargs = {k: v for k, v in zip(keys, combo)}
        points.append(
            cls(**{**{f: getattr(defaults, f) for f in cls.__dataclass_fields__}, **kwargs})
        )
    return points


def _fit_point(kind: str, x, y, ids, params, seed: int):
    if kind == "rf":
        return fit_random_forest(x, y, ids, params, seed)
    if kind == "svc":
        # CV scores label accuracy; skip probability calibration for speed
        return fit_svc(x, y, params, seed, calibrate=False)
    if kind == "mlp":
        return fit_mlp(x, y, params, seed)
    raise ValueError(f"unknown model kind: {kind}")


def _tie_key(params) -> tuple:
    return (
        getattr(params, "c", 0.0),
        getattr(params, "gamma", 0.0),
        getattr(params, "n_estimators", 0),
        getattr(params, "units", 0),
    )


def kfold_scores(kind: str, dataset, params, k: int, seed: int) -> tuple[float, ...]:
    """Per-fold validation accuracies for one hyperparameter point."""
    folds = stratified_folds(dataset.labels, k, seed)
    _check_folds(dataset.labels, folds)
    return _score_point(kind, dataset, params, folds, seed)


def _check_folds(labels, folds):
    y = np.asarray(labels).astype(np.int64)
    n = len(y)
    for f, val_idx in enumerate(folds):
        train_mask = np.ones(n, dtype=bool)
        train_mask[val_idx] = False
        for name, part in (("validation", y[val_idx]), ("training", y[train_mask])):
            if len(np.unique(part)) < 2:
                raise ValueError(
                    f"fold {f} lacks a class in its {name} split; "
                    "use more data or fewer folds"
                )


def _score_point(kind, dataset, params, folds, seed) -> tuple[float, ...]:
    y = dataset.labels
    n = len(y)
    scores = []
    for f, val_idx in enumerate(folds):
        train_mask = np.ones(n, dtype=bool)
        train_mask[val_idx] = False
        tr = np.flatnonzero(train_mask)
        model = _fit_point(
            kind,
            dataset.features[tr],
            y[tr],
            dataset.ids[tr],
            params,
            derive_seed(seed, f),
        )
        preds = model.predict(dataset.features[val_idx])
        scores.append(accuracy(preds, y[val_idx]))
    return tuple(scores)


def grid_search_cv(kind: str, grid: dict, k: int, dataset, seed: int = 0) -> CvResult:
    """Exhaustive search over the hyperparameter grid.

    ``grid`` maps hyperparameter names to candidate value lists; fields
    not listed keep their defaults. Raises before any training when a
    fold would lack a class.
    """
    if kind not in _PARAM_CLS:
        raise ValueError(f"unknown model kind: {kind}")
    if len(dataset) < k:
        raise ValueError("training set smaller than the number of folds")
    points = _expand_grid(kind, grid)
    if not points:
        raise ValueError("empty hyperparameter grid")
    folds = stratified_folds(dataset.labels, k, seed)
    _check_folds(dataset.labels, folds)

    table = []
    for params in points:
        fold_scores = _score_point(kind, dataset, params, folds, seed)
        table.append((params, fold_scores, float(np.mean(fold_scores))))

    best_ix = min(
        range(len(table)),
        key=lambda i: (-table[i][2], _tie_key(table[i][0]), i),
    )
    winner, fold_scores, mean_score = table[best_ix]
    return CvResult(
        kind=kind,
        winner=winner,
        mean_score=mean_score,
        fold_scores=fold_scores,
        table=tuple(table),
    )
