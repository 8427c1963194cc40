"""Random forest classifier built from scratch.

Each tree fits a bootstrap resample with per-node random feature subsets;
the forest's probability for a sample is the fraction of trees voting
"failed". Training canonicalises sample order by id, and every tree's
randomness derives from (model seed, tree index), so permuting the
training rows changes nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..seeding import derive_seed
from .base import check_features

_MAX_FEATURES = ("sqrt", "log2", "all")
_CRITERIA = ("gini", "entropy")


@dataclass(frozen=True)
class RfParams:
    n_estimators: int = 100
    max_depth: int = 1000
    max_features: str = "log2"
    criterion: str = "gini"

    def __post_init__(self):
        if self.n_estimators < 1 or self.max_depth < 1:
            raise ValueError("n_estimators and max_depth must be >= 1")
        if self.max_features not in _MAX_FEATURES:
            raise ValueError(f"max_features must be one of {_MAX_FEATURES}")
        if self.criterion not in _CRITERIA:
            raise ValueError(f"criterion must be one of {_CRITERIA}")

    def to_dict(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "max_depth": self.max_depth,
            "max_features": self.max_features,
            "criterion": self.criterion,
        }


def _n_split_features(d: int, mode: str) -> int:
    if mode == "all":
        return d
    if mode == "sqrt":
        return max(1, int(math.floor(math.sqrt(d))))
    return max(1, int(math.floor(math.log2(d))))


def _impurity(n_pos: np.ndarray, n_tot: np.ndarray, criterion: str) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n_tot > 0, n_pos / n_tot, 0.0)
    if criterion == "gini":
        return 2.0 * p * (1.0 - p)
    q = 1.0 - p
    ent = np.zeros_like(p)
    m = (p > 0) & (p < 1)
    ent[m] = -(p[m] * np.log2(p[m]) + q[m] * np.log2(q[m]))
    return ent


class _Tree:
    """Flat-array decision tree: breadth of lists, leaves flagged by -1."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[int] = []

    def _add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0)
        return len(self.feature) - 1

    def fit(self, x, y, rng, max_depth, k_features, criterion):
        # Depth-first with an explicit stack (left child expanded first)
        # so pathological chains cannot blow the recursion limit.
        stack = [(np.arange(len(y)), 0, -1, True)]
        while stack:
            idx, depth, parent, is_left = stack.pop()
            node = self._add_node()
            if parent >= 0:
                if is_left:
                    self.left[parent] = node
                else:
                    self.right[parent] = node
            sub = y[idx]
            n_pos = int(sub.sum())
            n = len(sub)
            # Majority vote; ties go to "stable" (class 0).
            self.value[node] = 1 if n_pos * 2 > n else 0
            if depth >= max_depth or n_pos == 0 or n_pos == n or n < 2:
                continue

            feats = rng.permutation(x.shape[1])[:k_features]
            best_gain = 0.0
            best_feat = -1
            best_thr = 0.0
            parent_imp = _impurity(np.array([n_pos]), np.array([n]), criterion)[0]
            for f in feats:
                col = x[idx, f]
                order = np.argsort(col, kind="stable")
                cs = col[order]
                ys = sub[order]
                cum_pos = np.cumsum(ys)
                boundary = np.flatnonzero(cs[1:] > cs[:-1])  # between distinct values
                if boundary.size == 0:
                    continue
                n_left = boundary + 1
                pos_left = cum_pos[boundary]
                n_right = n - n_left
                pos_right = n_pos - pos_left
                imp = (
                    n_left * _impurity(pos_left, n_left, criterion)
                    + n_right * _impurity(pos_right, n_right, criterion)
                ) / n
                j = int(np.argmin(imp))
                gain = parent_imp - imp[j]
                if gain > best_gain + 1e-15:
                    best_gain = gain
                    best_feat = int(f)
                    best_thr = 0.5 * (cs[boundary[j]] + cs[boundary[j] + 1])
            if best_feat < 0:
                continue

            go_left = x[idx, best_feat] <= best_thr
            self.feature[node] = best_feat
            self.threshold[node] = best_thr
            # Push right first so the left subtree is laid out immediately
            # after its parent (stable node numbering).
            stack.append((idx[~go_left], depth + 1, node, False))
            stack.append((idx[go_left], depth + 1, node, True))

        self.feature = np.asarray(self.feature, dtype=np.int32)
        self.threshold = np.asarray(self.threshold, dtype=np.float64)
        self.left = np.asarray(self.left, dtype=np.int32)
        self.right = np.asarray(self.right, dtype=np.int32)
        self.value = np.asarray(self.value, dtype=np.int8)

    def predict(self, x: np.ndarray) -> np.ndarray:
        n = x.shape[0]
        node = np.zeros(n, dtype=np.int64)
        active = self.feature[node] >= 0
        while np.any(active):
            feats = self.feature[node[active]]
            thr = self.threshold[node[active]]
            rows = np.flatnonzero(active)
            vals = x[rows, feats]
            nxt = np.where(
                vals <= thr, self.left[node[active]], self.right[node[active]]
            )
            node[rows] = nxt
            active = self.feature[node] >= 0
        return self.value[node].astype(np.int64)


class RandomForestModel:
    kind = "rf"

    def __init__(self, params: RfParams, trees: list[_Tree], n_features: int,
                 train_hash: str = ""):
        self.params = params
        self.trees = trees
        self.n_features = n_features
        self.train_hash = train_hash

    def tree_votes(self, features) -> np.ndarray:
        """(n_trees, n_samples) vote matrix; exposed for recount checks."""
        x = check_features(features, self.n_features)
        return np.stack([t.predict(x) for t in self.trees])

    def predict_proba(self, features) -> np.ndarray:
        return self.tree_votes(features).mean(axis=0)

    def predict(self, features) -> np.ndarray:
        return (self.predict_proba(features) >= 0.5).astype(np.int64)

    def _serialize(self):
        header = {
            "kind": self.kind,
            "params": self.params.to_dict(),
            "n_features": self.n_features,
            "n_trees": len(self.trees),
            "train_hash": self.train_hash,
        }
        arrays = []
        for i, t in enumerate(self.trees):
            arrays += [
                (f"t{i}_feature", t.feature),
                (f"t{i}_threshold", t.threshold),
                (f"t{i}_left", t.left),
                (f"t{i}_right", t.right),
                (f"t{i}_value", t.value),
            ]
        return header, arrays

    @classmethod
    def _deserialize(cls, header, blobs):
        trees = []
        for i in range(header["n_trees"]):
            t = _Tree.__new__(_Tree)
            t.feature = blobs[f"t{i}_feature"]
            t.threshold = blobs[f"t{i}_threshold"]
            t.left = blobs[f"t{i}_left"]
            t.right = blobs[f"t{i}_right"]
            t.value = blobs[f"t{i}_value"]
            trees.append(t)
        return cls(
            params=RfParams(**header["params"]),
            trees=trees,
            n_features=header["n_features"],
            train_hash=header.get("train_hash", ""),
        )


def fit_random_forest(
    features: np.ndarray,
    labels: np.ndarray,
    ids: np.ndarray,
    params: RfParams,
    seed: int,
    train_hash: str = "",
) -> RandomForestModel:
    """Array-level trainer; rows are canonicalised by ascending id."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels).astype(np.int64)
    order = np.argsort(np.asarray(ids), kind="stable")
    x = x[order]
    y = y[order]
    if len(np.unique(y)) < 2:
        raise ValueError("random forest training requires both classes")
    k = _n_split_features(x.shape[1], params.max_features)
    trees = []
    for t_ix in range(params.n_estimators):
        rng = np.random.default_rng(derive_seed(seed, t_ix))
        boot = rng.integers(0, len(y), size=len(y))
        tree = _Tree()
        tree.fit(x[boot], y[boot], rng, params.max_depth, k, params.criterion)
        trees.append(tree)
    return RandomForestModel(params, trees, x.shape[1], train_hash)


def train_random_forest(dataset, params: RfParams | None = None, seed: int = 0):
    params = params or RfParams()
    return fit_random_forest(
        dataset.features,
        dataset.labels,
        dataset.ids,
        params,
        seed,
        train_hash=dataset.manifest.grid_hash if dataset.manifest else "",
    )
