"""Machine-learning-aided Monte Carlo workflows and validation studies.

The core analysis simulates only a small training subset of a campaign,
fits surrogate classifiers on the feature vectors, predicts failure
probabilities for every remaining sample, and averages those
probabilities into the surrogate estimate of the probability of failure.
When full campaign labels exist the analysis also reports the reference
pf, the data-only subset estimate, and the error of each estimator.
"""

from __future__ import annotations

import time

import numpy as np

from .models import (
    accuracy,
    default_params,
    evaluate,
    grid_search_cv,
    predicted_pf,
    roc_auc,
    train_model,
)
from .montecarlo import Dataset, estimate_pf, subsample
from .seeding import derive_seed

_KIND_INDEX = {"rf": 1, "svc": 2, "mlp": 3}


def _resolve_params(kind, dataset, tune_grids, fixed_params, k_folds, seed):
    if fixed_params and kind in fixed_params:
        return fixed_params[kind], None
    if tune_grids and kind in tune_grids:
        cv = grid_search_cv(kind, tune_grids[kind], k_folds, dataset, seed)
        return cv.winner, cv
    return default_params(kind), None


def mlamc_analysis(
    dataset: Dataset,
    kinds=("rf", "svc"),
    n_train: int = 40,
    strategy: str = "stratified",
    seed: int = 0,
    fixed_params: dict | None = None,
    tune_grids: dict | None = None,
    k_folds: int = 5,
) -> dict:
    """Full-reference analysis of one campaign.

    Draws the training subset, trains each requested model, validates on
    the held-out remainder, and compares the surrogate pf against both
    the full-campaign pf and the data-only subset estimate.
    """
    m = dataset.manifest
    train, rest = subsample(dataset, n_train, strategy, derive_seed(seed, 0))
    pf_full = estimate_pf(dataset.labels).pf
    pf_data = estimate_pf(train.labels).pf

    row = {
        "cov": m.cov,
        "xi": m.delta_h / m.delta_v,
        "mu_cu": m.mu_cu,
        "n_samples": len(dataset),
        "n_train": n_train,
        "strategy": strategy,
        "seed": seed,
        "pf_full": pf_full,
        "pf_data_only": pf_data,
        "pf_err_data_only": abs(pf_data - pf_full),
        "models": {},
        "timing": {},
    }
    for kind in kinds:
        params, cv = _resolve_params(kind, train, tune_grids, fixed_params, k_folds, seed)
        t0 = time.perf_counter()
        model = train_model(kind, train, params, derive_seed(seed, _KIND_INDEX[kind]))
        t_train = time.perf_counter() - t0
        t0 = time.perf_counter()
        proba = model.predict_proba(rest.features)
        t_predict = time.perf_counter() - t0
        pf_sur = 100.0 * float(np.mean(proba))
        acc = accuracy((proba >= 0.5).astype(int), rest.labels)
        try:
            auc = roc_auc(proba, rest.labels)
        except ValueError:  # single-class remainder: AUC undefined
            auc = None
        row["models"][kind] = {
            "params": params.to_dict(),
            "tuned": cv is not None,
            "pf_surrogate": pf_sur,
            "pf_err_surrogate": abs(pf_sur - pf_full),
            "acc": acc,
            "auc": auc,
        }
        row["timing"][kind] = {"train_s": t_train, "predict_s": t_predict}
    return row


def train_size_experiment(
    dataset: Dataset,
    sizes=(10, 20, 40, 100, 400),
    repetitions: int = 10,
    kinds=("rf", "svc"),
    seed: int = 0,
    strategy: str = "random",
) -> dict:
    """pf error versus training-set size, averaged over repetitions.

    Each repetition redraws the subset and reseeds the models. A
    repetition whose subset is single-class is skipped with a recorded
    reason (it cannot train a classifier).
    """
    for size in sizes:
        if size >= len(dataset):
            raise ValueError(
                f"train size {size} is not below the campaign size {len(dataset)}"
            )
    pf_full = estimate_pf(dataset.labels).pf
    out = {
        "pf_full": pf_full,
        "sizes": list(sizes),
        "repetitions": repetitions,
        "per_model": {k: {} for k in kinds},
        "data_only": {},
        "skipped": [],
    }
    for size in sizes:
        sur_errs = {k: [] for k in kinds}
        data_errs = []
        for rep in range(repetitions):
            split_seed = derive_seed(seed, size, rep)
            train, rest = subsample(dataset, size, strategy, split_seed)
            data_errs.append(abs(estimate_pf(train.labels).pf - pf_full))
            if len(np.unique(train.labels)) < 2:
                out["skipped"].append(
                    {"size": size, "rep": rep, "reason": "single-class training subset"}
                )
                continue
            for kind in kinds:
                model = train_model(
                    kind, train, None, derive_seed(seed, size, rep, _KIND_INDEX[kind])
                )
                sur_errs[kind].append(abs(predicted_pf(model, rest.features) - pf_full))
        for kind in kinds:
            out["per_model"][kind][size] = (
                float(np.mean(sur_errs[kind])) if sur_errs[kind] else None
            )
        out["data_only"][size] = float(np.mean(data_errs))
    return out


def test_size_experiment(
    dataset: Dataset,
    kinds=("rf", "svc", "mlp"),
    n_train: int = 500,
    n_test_small: int | None = None,
    seed: int = 0,
) -> dict:
    """Equal-size versus remainder test splits for one trained model."""
    n_test_small = n_test_small or n_train
    train, rest = subsample(dataset, n_train, "random", derive_seed(seed, 0))
    small, _ = subsample(rest, n_test_small, "random", derive_seed(seed, 1))
    out = {"n_train": n_train, "n_test_small": n_test_small, "models": {}}
    for kind in kinds:
        model = train_model(kind, train, None, derive_seed(seed, _KIND_INDEX[kind]))
        m_small = evaluate(model, small.features, small.labels)
        m_rest = evaluate(model, rest.features, rest.labels)
        out["models"][kind] = {
            "acc_small": m_small.acc,
            "auc_small": m_small.auc,
            "acc_rest": m_rest.acc,
            "auc_rest": m_rest.auc,
            "acc_diff": abs(m_small.acc - m_rest.acc),
            "auc_diff": abs(m_small.auc - m_rest.auc),
        }
    return out


def train_source_experiment(
    datasets: list[Dataset],
    kinds=("rf", "svc"),
    n_train: int = 500,
    seed: int = 0,
) -> dict:
    """Specific per-campaign training versus one pooled-diverse model.

    The pooled model trains on ``n_train`` samples drawn from the union
    of all campaigns and predicts each campaign's remainder; the
    specific models train on ``n_train`` samples of their own campaign.
    """
    from .montecarlo import concat_datasets

    pooled = concat_datasets(datasets)
    pooled_train, _ = subsample(pooled, n_train, "random", derive_seed(seed, 100))
    out = {"n_train": n_train, "per_model": {}}
    for kind in kinds:
        pooled_model = train_model(
            kind, pooled_train, None, derive_seed(seed, 101, _KIND_INDEX[kind])
        )
        rows = []
        for d_ix, d in enumerate(datasets):
            pf_full = estimate_pf(d.labels).pf
            train, rest = subsample(d, n_train, "random", derive_seed(seed, d_ix))
            specific = train_model(
                kind, train, None, derive_seed(seed, d_ix, _KIND_INDEX[kind])
            )
            rows.append(
                {
                    "cov": d.manifest.cov,
                    "xi": d.manifest.delta_h / d.manifest.delta_v,
                    "mu_cu": d.manifest.mu_cu,
                    "pf_full": pf_full,
                    "pf_err_specific": abs(predicted_pf(specific, rest.features) - pf_full),
                    "pf_err_pooled": abs(predicted_pf(pooled_model, rest.features) - pf_full),
                }
            )
        out["per_model"][kind] = {
            "rows": rows,
            "mean_err_specific": float(np.mean([r["pf_err_specific"] for r in rows])),
            "mean_err_pooled": float(np.mean([r["pf_err_pooled"] for r in rows])),
        }
    return out


def degradation_experiment(
    grouped: dict,
    kinds=("rf", "svc", "mlp"),
    n_train: int = 500,
    seed: int = 0,
) -> dict:
    """ACC/AUC per (cov, xi) group; groups may pool several campaigns."""
    out = {"n_train": n_train, "rows": []}
    for g_ix, ((cov, xi), dataset) in enumerate(sorted(grouped.items())):
        train, rest = subsample(dataset, n_train, "random", derive_seed(seed, g_ix))
        row = {"cov": cov, "xi": xi, "n_samples": len(dataset), "models": {}}
        for kind in kinds:
            model = train_model(
                kind, train, None, derive_seed(seed, g_ix, _KIND_INDEX[kind])
            )
            m = evaluate(model, rest.features, rest.labels)
            row["models"][kind] = {"acc": m.acc, "auc": m.auc}
        out["rows"].append(row)
    return out
