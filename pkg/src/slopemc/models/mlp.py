"""One-hidden-layer perceptron with dropout, L2 penalty and a sigmoid head.

Activations: sigmoid f(z) = 1/(1+e^-z), relu f(z) = max(0, z), or
tanh. Training is mini-batch backpropagation under SGD or ADAM, seeded
end to end (init, batch shuffles, dropout masks), so a fit is a pure
function of (data, hyperparameters, seed). Dropout is the inverted
variant and acts only during training. ``loss_and_gradients`` exposes
the analytic gradients for finite-difference verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..seeding import derive_seed
from .base import Standardizer, check_features

_ACTIVATIONS = ("sigmoid", "relu", "tanh")
_OPTIMIZERS = ("sgd", "adam")


class DivergenceError(RuntimeError):
    """Training loss became non-finite; names the offending epoch."""

    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"training diverged at epoch {epoch}")


@dataclass(frozen=True)
class MlpParams:
    units: int = 64
    dropout_rate: float = 0.5
    l2: float = 1e-3
    optimizer: str = "adam"
    activation: str = "relu"
    learning_rate: float = 0.01
    epochs: int = 200
    batch_size: int = 32

    def __post_init__(self):
        if self.units < 1:
            raise ValueError("units must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.optimizer not in _OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {_OPTIMIZERS}")
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"activation must be one of {_ACTIVATIONS}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")

    def to_dict(self) -> dict:
        return {
            "units": self.units,
            "dropout_rate": self.dropout_rate,
            "l2": self.l2,
            "optimizer": self.optimizer,
            "activation": self.activation,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
        }


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(0.0, z)
    if kind == "tanh":
        return np.tanh(z)
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def _act_grad(z: np.ndarray, a: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return (z > 0.0).astype(np.float64)
    if kind == "tanh":
        return 1.0 - a * a
    return a * (1.0 - a)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def loss_and_gradients(weights: dict, x: np.ndarray, y: np.ndarray,
                       l2: float, activation: str, dropout_mask=None):
    """Batch loss and analytic gradients.

    Loss = mean binary cross-entropy + 0.5 * l2 * sum of squared weights
    (biases unpenalised). ``dropout_mask`` is the pre-scaled inverted
    mask applied to hidden activations, or None for no dropout.
    """
    w1, b1, w2, b2 = weights["w1"], weights["b1"], weights["w2"], weights["b2"]
    n = x.shape[0]
    z1 = x @ w1 + b1
    a1_raw = _act(z1, activation)
    a1 = a1_raw if dropout_mask is None else a1_raw * dropout_mask
    z2 = a1 @ w2 + b2
    p = _sigmoid(z2)[:, 0]

    eps = 1e-12
    bce = -np.mean(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps))
    loss = bce + 0.5 * l2 * (float(np.sum(w1 * w1)) + float(np.sum(w2 * w2)))

    dz2 = ((p - y) / n)[:, None]
    gw2 = a1.T @ dz2 + l2 * w2
    gb2 = dz2.sum(axis=0)
    da1 = dz2 @ w2.T
    if dropout_mask is not None:
        da1 = da1 * dropout_mask
    dz1 = da1 * _act_grad(z1, a1_raw, activation)
    gw1 = x.T @ dz1 + l2 * w1
    gb1 = dz1.sum(axis=0)
    return loss, {"w1": gw1, "b1": gb1, "w2": gw2, "b2": gb2}


def _init_weights(n_features: int, units: int, activation: str, rng) -> dict:
    scale1 = np.sqrt(2.0 / n_features) if activation == "relu" else np.sqrt(1.0 / n_features)
    return {
        "w1": rng.standard_normal((n_features, units)) * scale1,
        "b1": np.zeros(units),
        "w2": rng.standard_normal((units, 1)) * np.sqrt(1.0 / units),
        "b2": np.zeros(1),
    }


class MlpModel:
    kind = "mlp"

    def __init__(self, params: MlpParams, standardizer: Standardizer,
                 weights: dict, train_hash: str = ""):
        self.params = params
        self.standardizer = standardizer
        self.weights = weights
        self.train_hash = train_hash

    @property
    def n_features(self) -> int:
        return self.weights["w1"].shape[0]

    def predict_proba(self, features) -> np.ndarray:
        x = check_features(features, self.n_features)
        xs = self.standardizer.transform(x)
        a1 = _act(xs @ self.weights["w1"] + self.weights["b1"], self.params.activation)
        return _sigmoid(a1 @ self.weights["w2"] + self.weights["b2"])[:, 0]

    def predict(self, features) -> np.ndarray:
        return (self.predict_proba(features) >= 0.5).astype(np.int64)

    def _serialize(self):
        header = {
            "kind": self.kind,
            "params": self.params.to_dict(),
            "train_hash": self.train_hash,
        }
        arrays = [
            ("mean", self.standardizer.mean),
            ("std", self.standardizer.std),
            ("w1", self.weights["w1"]),
            ("b1", self.weights["b1"]),
            ("w2", self.weights["w2"]),
            ("b2", self.weights["b2"]),
        ]
        return header, arrays

    @classmethod
    def _deserialize(cls, header, blobs):
        return cls(
            params=MlpParams(**header["params"]),
            standardizer=Standardizer(mean=blobs["mean"], std=blobs["std"]),
            weights={k: blobs[k] for k in ("w1", "b1", "w2", "b2")},
            train_hash=header.get("train_hash", ""),
        )


def fit_mlp(features, labels, params: MlpParams, seed: int,
            train_hash: str = "") -> MlpModel:
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels).astype(np.float64)
    if len(np.unique(y)) < 2:
        raise ValueError("MLP training requires both classes")
    std = Standardizer.fit(x)
    xs = std.transform(x)
    rng = np.random.default_rng(derive_seed(seed, 0))
    weights = _init_weights(xs.shape[1], params.units, params.activation, rng)

    lr = params.learning_rate
    keep = 1.0 - params.dropout_rate
    if params.optimizer == "adam":
        m = {k: np.zeros_like(v) for k, v in weights.items()}
        v = {k: np.zeros_like(v) for k, v in weights.items()}
        beta1, beta2, adam_eps = 0.9, 0.999, 1e-8
        t = 0

    n = len(y)
    for epoch in range(params.epochs):
        perm = rng.permutation(n)
        for lo in range(0, n, params.batch_size):
            batch = perm[lo : lo + params.batch_size]
            xb, yb = xs[batch], y[batch]
            mask = None
            if params.dropout_rate > 0.0:
                mask = (rng.random((len(batch), params.units)) < keep) / keep
            loss, grads = loss_and_gradients(
                weights, xb, yb, params.l2, params.activation, mask
            )
            if not np.isfinite(loss):
                raise DivergenceError(epoch)
            if params.optimizer == "sgd":
                for k in weights:
                    weights[k] = weights[k] - lr * grads[k]
            else:
                t += 1
                for k in weights:
                    m[k] = beta1 * m[k] + (1 - beta1) * grads[k]
                    v[k] = beta2 * v[k] + (1 - beta2) * grads[k] ** 2
                    m_hat = m[k] / (1 - beta1**t)
                    v_hat = v[k] / (1 - beta2**t)
                    weights[k] = weights[k] - lr * m_hat / (np.sqrt(v_hat) + adam_eps)

    return MlpModel(params=params, standardizer=std, weights=weights,
                    train_hash=train_hash)


def train_mlp(dataset, params: MlpParams | None = None, seed: int = 0) -> MlpModel:
    params = params or MlpParams()
    return fit_mlp(
        dataset.features,
        dataset.labels,
        params,
        seed,
        train_hash=dataset.manifest.grid_hash if dataset.manifest else "",
    )
