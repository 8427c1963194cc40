"""Seeded Monte Carlo campaigns and probability-of-failure estimation.

A campaign realizes one random field per sample id, classifies its
stability, and collects everything into a Dataset. Each sample's seed is
a pure function of (base_seed, id), so results are independent of
execution order and worker count; sample-level threading is the designed
hot path (the stability kernels release the GIL).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import CellGrid, SlopeGeometry, build_grid
from .randfield import FieldStatistics, field_factor, realize_field
from .seeding import sample_seed
from .stability import SearchSpec, classify_stability, min_fos

SCHEMA_VERSION = 1


class CampaignError(RuntimeError):
    """A sample's stability evaluation failed; carries the repro seed."""

    def __init__(self, sample_id: int, seed: int, cause: Exception):
        self.sample_id = sample_id
        self.seed = seed
        super().__init__(
            f"sample {sample_id} (seed {seed}) failed: {cause!r}"
        )


@dataclass(frozen=True)
class McConfig:
    """One campaign: statistics, geometry, size, seed, and FOS switch."""

    stats: FieldStatistics
    geometry: SlopeGeometry
    n_samples: int
    base_seed: int
    compute_fos: bool = False

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    @property
    def label(self) -> str:
        return (
            f"cov{self.stats.cov:g}_xi{self.stats.xi:g}_mu{self.stats.mu_cu:g}"
        )


@dataclass(frozen=True)
class Sample:
    id: int
    seed: int
    features: np.ndarray
    label: int
    fos: float | None = None


@dataclass(frozen=True)
class DatasetManifest:
    schema_version: int
    mu_cu: float
    cov: float
    delta_h: float
    delta_v: float
    geometry: dict
    n_samples: int
    base_seed: int
    compute_fos: bool
    cell_count: int
    grid_hash: str

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "mu_cu": self.mu_cu,
            "cov": self.cov,
            "delta_h": self.delta_h,
            "delta_v": self.delta_v,
            "geometry": self.geometry,
            "n_samples": self.n_samples,
            "base_seed": self.base_seed,
            "compute_fos": self.compute_fos,
            "cell_count": self.cell_count,
            "grid_hash": self.grid_hash,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


@dataclass
class Dataset:
    """Columnar sample store. Views produced by ``subsample`` keep the
    originating manifest and the original sample ids."""

    manifest: DatasetManifest
    ids: np.ndarray
    seeds: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    fos: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.ids)

    def sample(self, i: int) -> Sample:
        return Sample(
            id=int(self.ids[i]),
            seed=int(self.seeds[i]),
            features=self.features[i],
            label=int(self.labels[i]),
            fos=None if self.fos is None else float(self.fos[i]),
        )

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            manifest=self.manifest,
            ids=self.ids[idx].copy(),
            seeds=self.seeds[idx].copy(),
            features=self.features[idx].copy(),
            labels=self.labels[idx].copy(),
            fos=None if self.fos is None else self.fos[idx].copy(),
        )


def make_manifest(config: McConfig, grid: CellGrid) -> DatasetManifest:
    return DatasetManifest(
        schema_version=SCHEMA_VERSION,
        mu_cu=config.stats.mu_cu,
        cov=config.stats.cov,
        delta_h=config.stats.delta_h,
        delta_v=config.stats.delta_v,
        geometry=config.geometry.to_dict(),
        n_samples=config.n_samples,
        base_seed=config.base_seed,
        compute_fos=config.compute_fos,
        cell_count=grid.n_cells,
        grid_hash=grid.ordering_hash(),
    )


def run_monte_carlo(
    config: McConfig,
    search: SearchSpec | None = None,
    workers: int = 1,
    progress=None,
) -> Dataset:
    """Run a full campaign; output is identical for any worker count.

    ``progress`` is an optional callable invoked with the number of
    completed samples after each one finishes.
    """
    geometry = config.geometry
    grid = build_grid(geometry)
    spec = search or SearchSpec.default(geometry)
    stats = config.stats
    L = field_factor(grid, stats)
    n = config.n_samples

    ids = np.arange(n, dtype=np.uint64)
    seeds = np.array(
        [sample_seed(config.base_seed, i) for i in range(n)], dtype=np.uint64
    )
    features = np.empty((n, grid.n_cells))
    labels = np.empty(n, dtype=np.uint8)
    fos_arr = np.empty(n) if config.compute_fos else None
    done = [0]

    def one(i: int):
        seed = int(seeds[i])
        try:
            f = realize_field(L, stats, seed)
            if config.compute_fos:
                res = min_fos(f.values, geometry, spec, grid)
                fos_arr[i] = res.fos_min
            else:
                res = classify_stability(f.values, geometry, spec, grid)
        except Exception as exc:
            raise CampaignError(i, seed, exc) from exc
        features[i] = f.values
        labels[i] = 1 if res.failed else 0
        done[0] += 1
        if progress is not None:
            progress(done[0])

    if workers <= 1:
        for i in range(n):
            one(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # list() re-raises the first worker exception
            list(pool.map(one, range(n)))

    return Dataset(
        manifest=make_manifest(config, grid),
        ids=ids,
        seeds=seeds,
        features=features,
        labels=labels,
        fos=fos_arr,
    )


def realize_features(
    config: McConfig, ids, grid: CellGrid | None = None
) -> np.ndarray:
    """Field vectors for the given sample ids, without stability labels.

    Used when predicting unsimulated samples: realization is cheap, only
    the stability evaluation is expensive.
    """
    grid = grid or build_grid(config.geometry)
    L = field_factor(grid, config.stats)
    ids = np.asarray(ids, dtype=np.int64)
    out = np.empty((len(ids), grid.n_cells))
    for k, i in enumerate(ids):
        out[k] = realize_field(L, config.stats, sample_seed(config.base_seed, int(i))).values
    return out


@dataclass(frozen=True)
class PfEstimate:
    """Probability of failure in percent with its sampling noise.

    ``cov_pf`` follows sqrt((1 - p) / (p n)); it is 0 at pf = 100 by the
    formula's limit and None (undefined) at pf = 0.
    """

    pf: float
    n: int
    cov_pf: float | None


def pf_cov(pf: float, n: int) -> float:
    """Sampling coefficient of variation of a pf estimate (pf in percent)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < pf <= 100.0:
        raise ValueError(f"pf_cov is undefined for pf={pf}")
    p = pf / 100.0
    return math.sqrt((1.0 - p) / (p * n))


def estimate_pf(labels) -> PfEstimate:
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("cannot estimate pf from no labels")
    n = labels.size
    pf = 100.0 * float(np.count_nonzero(labels)) / n
    cov = pf_cov(pf, n) if pf > 0.0 else None
    return PfEstimate(pf=pf, n=n, cov_pf=cov)


def subsample(
    dataset: Dataset, n_train: int, strategy: str = "random", seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Split into (train, rest): disjoint, exhaustive, deterministic.

    Selection operates on id-sorted arrays, so the result depends only on
    the set of sample ids, never on their storage order. ``stratified``
    preserves the class ratio within one sample per class and requires
    both classes present.
    """
    n = len(dataset)
    if not 1 <= n_train < n:
        raise ValueError(f"n_train must be in [1, {n - 1}], got {n_train}")
    order = np.argsort(dataset.ids, kind="stable")
    rng = np.random.default_rng(seed)

    if strategy == "random":
        perm = rng.permutation(n)
        pick = order[perm[:n_train]]
    elif strategy == "stratified":
        labels = dataset.labels[order]
        pos = order[labels == 1]
        neg = order[labels == 0]
        if len(pos) == 0 or len(neg) == 0:
            missing = "failed" if len(pos) == 0 else "stable"
            raise ValueError(
                f"stratified split impossible: no '{missing}' samples present"
            )
        k_pos = int(round(n_train * len(pos) / n))
        k_pos = min(max(k_pos, 1), n_train - 1)  # keep both classes if possible
        k_neg = n_train - k_pos
        if k_neg > len(neg) or k_pos > len(pos):
            raise ValueError("stratified split exceeds a class population")
        pick = np.concatenate(
            [pos[rng.permutation(len(pos))[:k_pos]], neg[rng.permutation(len(neg))[:k_neg]]]
        )
    else:
        raise ValueError(f"unknown split strategy: {strategy}")

    mask = np.zeros(n, dtype=bool)
    mask[pick] = True
    train_idx = np.flatnonzero(mask)
    rest_idx = np.flatnonzero(~mask)
    return dataset.take(train_idx), dataset.take(rest_idx)


def concat_datasets(datasets: list[Dataset]) -> Dataset:
    """Pool several campaigns into one training view (ids reindexed).

    All inputs must share the same grid ordering hash; the manifest of
    the first campaign is kept for reference only.
    """
    if not datasets:
        raise ValueError("no datasets to concatenate")
    h = datasets[0].manifest.grid_hash
    for d in datasets[1:]:
        if d.manifest.grid_hash != h:
            raise ValueError("datasets use different grid orderings")
    has_fos = all(d.fos is not None for d in datasets)
    n = sum(len(d) for d in datasets)
    return Dataset(
        manifest=replace(datasets[0].manifest, n_samples=n),
        ids=np.arange(n, dtype=np.uint64),
        seeds=np.concatenate([d.seeds for d in datasets]),
        features=np.concatenate([d.features for d in datasets]),
        labels=np.concatenate([d.labels for d in datasets]),
        fos=np.concatenate([d.fos for d in datasets]) if has_fos else None,
    )
