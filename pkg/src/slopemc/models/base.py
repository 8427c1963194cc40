"""Shared surrogate-model plumbing: normalization, persistence, pf.

Model files use the same header-line + binary-payload pattern as
datasets: a JSON line describing kind, hyperparameters, normalization
statistics, the training manifest hash and an array manifest, followed
by the raw little-endian bytes of each array in manifest order.
Round-tripping preserves predictions bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Standardizer:
    """Z-score transform with statistics captured from the training split.

    Zero-variance features get unit scale so they pass through centered.
    """

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std = np.where(std == 0.0, 1.0, std)
        return cls(mean=mean, std=std)

    @classmethod
    def identity(cls, n_features: int) -> "Standardizer":
        return cls(mean=np.zeros(n_features), std=np.ones(n_features))

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std


def check_features(x: np.ndarray, n_features: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != n_features:
        raise ValueError(
            f"feature length {x.shape[1]} does not match training length {n_features}"
        )
    return x


def predicted_pf(model, features) -> float:
    """Surrogate probability of failure: 100 x mean predicted probability."""
    proba = model.predict_proba(features)
    if proba.size == 0:
        raise ValueError("cannot predict pf from no samples")
    return 100.0 * float(np.mean(proba))


def save_model(model, path) -> None:
    header, arrays = model._serialize()
    manifest = [[name, str(a.dtype), list(a.shape)] for name, a in arrays]
    header = dict(header)
    header["arrays"] = manifest
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a).tobytes())


def load_model(path):
    from . import forest, mlp, svm

    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        blobs = {}
        for name, dtype, shape in header["arrays"]:
            count = int(np.prod(shape)) if shape else 1
            dt = np.dtype(dtype)
            buf = fh.read(count * dt.itemsize)
            if len(buf) != count * dt.itemsize:
                raise ValueError(f"truncated model file: {path}")
            blobs[name] = np.frombuffer(buf, dtype=dt).reshape(shape).copy()
    kind = header["kind"]
    if kind == "rf":
        return forest.RandomForestModel._deserialize(header, blobs)
    if kind == "svc":
        return svm.SvcModel._deserialize(header, blobs)
    if kind == "mlp":
        return mlp.MlpModel._deserialize(header, blobs)
    raise ValueError(f"unknown model kind in file: {kind}")
