"""Soft-margin RBF support-vector classifier with an SMO dual solver.

Features are z-score standardized with training-split statistics before
the kernel is applied. The dual problem is solved by sequential minimal
optimization with the classic two-loop heuristic (alternating full and
non-bound sweeps, second index by maximum error difference) to a KKT
tolerance of 1e-3; exhausting the sweep budget raises ConvergenceError
carrying the duality-gap diagnostic. Probabilities come from a Platt
sigmoid fitted on out-of-fold decision values of the training split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..seeding import derive_seed
from .base import Standardizer, check_features

KKT_TOL = 1e-3
ALPHA_EPS = 1e-12
MAX_SWEEPS = 400
PLATT_FOLDS = 3


class ConvergenceError(RuntimeError):
    """SMO failed to satisfy the KKT conditions within the sweep budget."""

    def __init__(self, sweeps: int, duality_gap: float):
        self.sweeps = sweeps
        self.duality_gap = duality_gap
        super().__init__(
            f"SMO did not converge in {sweeps} sweeps (duality gap {duality_gap:.3e})"
        )


@dataclass(frozen=True)
class SvcParams:
    c: float = 1.0
    gamma: float = 0.001

    def __post_init__(self):
        if self.c <= 0 or self.gamma <= 0:
            raise ValueError("c and gamma must be positive")

    def to_dict(self) -> dict:
        return {"c": self.c, "gamma": self.gamma}


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def _dual_objective(alpha, y, K):
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def _duality_gap(alpha, b, y, K, C):
    ay = alpha * y
    f = K @ ay + b
    w_norm_sq = float(ay @ K @ ay)
    hinge = np.maximum(0.0, 1.0 - y * f).sum()
    primal = 0.5 * w_norm_sq + C * hinge
    dual = alpha.sum() - 0.5 * w_norm_sq
    return primal - dual


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float = KKT_TOL):
    """Minimal sequential optimization on a precomputed kernel matrix.

    ``y`` in {-1, +1}. Returns (alpha, b). Deterministic: all heuristic
    fallbacks scan from a position derived from the first index.
    """
    n = len(y)
    alpha = np.zeros(n)
    b = 0.0
    errors = (K @ (alpha * y) + b) - y  # decision - target, kept incremental

    def take_step(i1: int, i2: int) -> bool:
        nonlocal b, errors
        if i1 == i2:
            return False
        a1, a2 = alpha[i1], alpha[i2]
        y1, y2 = y[i1], y[i2]
        e1, e2 = errors[i1], errors[i2]
        s = y1 * y2
        if s > 0:
            lo, hi = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        else:
            lo, hi = max(0.0, a2 - a1), min(C, C + a2 - a1)
        if lo >= hi:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta <= 0.0:
            return False  # RBF Gram is PSD; degenerate pair, skip
        a2_new = a2 + y2 * (e1 - e2) / eta
        a2_new = min(max(a2_new, lo), hi)
        if abs(a2_new - a2) < ALPHA_EPS * (a2_new + a2 + ALPHA_EPS):
            return False
        a1_new = a1 + s * (a2 - a2_new)

        b1 = b - e1 - y1 * (a1_new - a1) * k11 - y2 * (a2_new - a2) * k12
        b2 = b - e2 - y1 * (a1_new - a1) * k12 - y2 * (a2_new - a2) * k22
        if 0.0 < a1_new < C:
            b_new = b1
        elif 0.0 < a2_new < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        errors += (
            y1 * (a1_new - a1) * K[i1]
            + y2 * (a2_new - a2) * K[i2]
            + (b_new - b)
        )
        alpha[i1] = a1_new
        alpha[i2] = a2_new
        b = b_new
        return True

    def examine(i2: int) -> int:
        y2, a2, e2 = y[i2], alpha[i2], errors[i2]
        r2 = e2 * y2
        if (r2 < -tol and a2 < C) or (r2 > tol and a2 > 0):
            non_bound = np.flatnonzero((alpha > 0) & (alpha < C))
            if len(non_bound) > 1:
                i1 = int(non_bound[np.argmax(np.abs(errors[non_bound] - e2))])
                if take_step(i1, i2):
                    return 1
            start = (i2 + 1) % n
            for k in range(len(non_bound)):
                i1 = int(non_bound[(k + start) % len(non_bound)])
                if take_step(i1, i2):
                    return 1
            for k in range(n):
                i1 = (k + start) % n
                if take_step(i1, i2):
                    return 1
        return 0

    sweeps = 0
    examine_all = True
    while sweeps < MAX_SWEEPS:
        sweeps += 1
        changed = 0
        if examine_all:
            for i in range(n):
                changed += examine(i)
        else:
            for i in np.flatnonzero((alpha > 0) & (alpha < C)):
                changed += examine(int(i))
        if examine_all:
            if changed == 0:
                return alpha, b
            examine_all = False
        elif changed == 0:
            examine_all = True
    raise ConvergenceError(sweeps, _duality_gap(alpha, b, y, K, C))


def _platt_fit(decision: np.ndarray, labels01: np.ndarray) -> tuple[float, float]:
    """Sigmoid parameters (A, B) so P(fail) = 1 / (1 + exp(A f + B)).

    Newton iterations on the regularised log-likelihood with the usual
    smoothed targets; deterministic.
    """
    f = np.asarray(decision, dtype=np.float64)
    y = np.asarray(labels01).astype(np.float64)
    n_pos = float(y.sum())
    n_neg = float(len(y) - n_pos)
    t = np.where(y > 0.5, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    a, bb = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))
    for _ in range(100):
        z = np.clip(a * f + bb, -500.0, 500.0)
        p = 1.0 / (1.0 + np.exp(z))
        # with p = sigma(-z), dNLL/dz = t - p
        d = t - p
        g1 = float(np.dot(f, d))
        g2 = float(np.sum(d))
        w = p * (1.0 - p) + 1e-12
        h11 = float(np.dot(f * f, w)) + 1e-12
        h12 = float(np.dot(f, w))
        h22 = float(np.sum(w)) + 1e-12
        det = h11 * h22 - h12 * h12
        if det <= 0:
            break
        da = -(h22 * g1 - h12 * g2) / det
        db = -(h11 * g2 - h12 * g1) / det
        a += da
        bb += db
        if abs(da) < 1e-12 and abs(db) < 1e-12:
            break
    return a, bb


class SvcModel:
    kind = "svc"

    def __init__(self, params, standardizer, sv_x, sv_alpha_y, intercept,
                 platt_a, platt_b, train_hash: str = ""):
        self.params = params
        self.standardizer = standardizer
        self.sv_x = sv_x  # standardized support vectors
        self.sv_alpha_y = sv_alpha_y
        self.intercept = intercept
        self.platt_a = platt_a
        self.platt_b = platt_b
        self.train_hash = train_hash

    @property
    def n_features(self) -> int:
        return self.sv_x.shape[1]

    def decision_function(self, features) -> np.ndarray:
        x = check_features(features, self.n_features)
        xs = self.standardizer.transform(x)
        k = rbf_kernel(xs, self.sv_x, self.params.gamma)
        return k @ self.sv_alpha_y + self.intercept

    def predict_proba(self, features) -> np.ndarray:
        f = self.decision_function(features)
        z = np.clip(self.platt_a * f + self.platt_b, -500.0, 500.0)
        return 1.0 / (1.0 + np.exp(z))

    def predict(self, features) -> np.ndarray:
        return (self.predict_proba(features) >= 0.5).astype(np.int64)

    def _serialize(self):
        header = {
            "kind": self.kind,
            "params": self.params.to_dict(),
            "intercept": self.intercept,
            "platt_a": self.platt_a,
            "platt_b": self.platt_b,
            "train_hash": self.train_hash,
        }
        arrays = [
            ("mean", self.standardizer.mean),
            ("std", self.standardizer.std),
            ("sv_x", self.sv_x),
            ("sv_alpha_y", self.sv_alpha_y),
        ]
        return header, arrays

    @classmethod
    def _deserialize(cls, header, blobs):
        return cls(
            params=SvcParams(**header["params"]),
            standardizer=Standardizer(mean=blobs["mean"], std=blobs["std"]),
            sv_x=blobs["sv_x"],
            sv_alpha_y=blobs["sv_alpha_y"],
            intercept=header["intercept"],
            platt_a=header["platt_a"],
            platt_b=header["platt_b"],
            train_hash=header.get("train_hash", ""),
        )


def _oof_decisions(xs, y01, params, seed):
    """Out-of-fold decision values for Platt calibration (3 folds)."""
    n = len(y01)
    rng = np.random.default_rng(derive_seed(seed, 917))
    folds = np.zeros(n, dtype=np.int64)
    for cls in (0, 1):
        members = np.flatnonzero(y01 == cls)
        members = members[rng.permutation(len(members))]
        folds[members] = np.arange(len(members)) % PLATT_FOLDS
    dec = np.empty(n)
    y_pm = np.where(y01 == 1, 1.0, -1.0)
    for f in range(PLATT_FOLDS):
        tr = folds != f
        va = ~tr
        if len(np.unique(y01[tr])) < 2 or not va.any():
            return None  # tiny/degenerate split: calibrate in-sample instead
        K = rbf_kernel(xs[tr], xs[tr], params.gamma)
        alpha, b = smo_solve(K, y_pm[tr], params.c)
        kv = rbf_kernel(xs[va], xs[tr], params.gamma)
        dec[va] = kv @ (alpha * y_pm[tr]) + b
    return dec


def fit_svc(features, labels, params: SvcParams, seed: int, train_hash="",
            calibrate: bool = True) -> SvcModel:
    x = np.asarray(features, dtype=np.float64)
    y01 = np.asarray(labels).astype(np.int64)
    if len(np.unique(y01)) < 2:
        raise ValueError("SVC training requires both classes")
    std = Standardizer.fit(x)
    xs = std.transform(x)
    y_pm = np.where(y01 == 1, 1.0, -1.0)
    K = rbf_kernel(xs, xs, params.gamma)
    alpha, b = smo_solve(K, y_pm, params.c)

    if calibrate:
        oof = _oof_decisions(xs, y01, params, seed)
        if oof is None:
            oof = K @ (alpha * y_pm) + b
        platt_a, platt_b = _platt_fit(oof, y01)
    else:
        platt_a, platt_b = -1.0, 0.0  # raw sigmoid of the decision value

    sv = alpha > ALPHA_EPS
    return SvcModel(
        params=params,
        standardizer=std,
        sv_x=xs[sv].copy(),
        sv_alpha_y=(alpha * y_pm)[sv].copy(),
        intercept=b,
        platt_a=platt_a,
        platt_b=platt_b,
        train_hash=train_hash,
    )


def train_svc(dataset, params: SvcParams | None = None, seed: int = 0) -> SvcModel:
    params = params or SvcParams()
    return fit_svc(
        dataset.features,
        dataset.labels,
        params,
        seed,
        train_hash=dataset.manifest.grid_hash if dataset.manifest else "",
    )
