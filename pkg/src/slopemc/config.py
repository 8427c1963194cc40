"""Run configuration: JSON file schema, validation and campaign expansion.

A run file has five blocks: geometry, statistics (value lists whose
cross-product defines the campaigns), campaign (size/seed/FOS switch),
surrogate (models, training budget, split, tuning), and report (output
directory and formats). CLI flags override file values; every command
writes the fully-resolved configuration beside its outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import SlopeGeometry
from .montecarlo import McConfig
from .randfield import FieldStatistics
from .stability import SearchSpec

CONFIG_SCHEMA_VERSION = 1

# Documented default parameter ranges for the statistics block.
DEFAULT_MU_CU = (18.6, 22.3, 26.0, 29.7, 33.5)
DEFAULT_COV = (0.1, 0.3, 0.5)
DEFAULT_DELTA_H = (1.0, 6.0, 12.0, 25.0)
DEFAULT_DELTA_V = (1.0,)


class ConfigError(ValueError):
    """Unusable run configuration (maps to exit code 1)."""


@dataclass(frozen=True)
class StatisticsBlock:
    mu_cu: tuple = DEFAULT_MU_CU
    cov: tuple = DEFAULT_COV
    delta_h: tuple = DEFAULT_DELTA_H
    delta_v: tuple = DEFAULT_DELTA_V


@dataclass(frozen=True)
class CampaignBlock:
    n_samples: int = 200
    base_seed: int = 20220101
    compute_fos: bool = False


@dataclass(frozen=True)
class SurrogateBlock:
    models: tuple = ("rf", "svc")
    train_count: int | None = 40
    train_fraction: float | None = None
    split: str = "stratified"
    tune: bool = False
    k_folds: int = 5
    seed: int = 7
    hyperparams: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    simulate_train_only: bool = False


@dataclass(frozen=True)
class ReportBlock:
    out_dir: str = "runs/out"
    formats: tuple = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    geometry: SlopeGeometry = SlopeGeometry()
    search: SearchSpec | None = None
    statistics: StatisticsBlock = StatisticsBlock()
    campaign: CampaignBlock = CampaignBlock()
    surrogate: SurrogateBlock = SurrogateBlock()
    report: ReportBlock = ReportBlock()

    def train_count_for(self, n_samples: int) -> int:
        s = self.surrogate
        if s.train_count is not None:
            n = int(s.train_count)
        elif s.train_fraction is not None:
            n = max(1, int(round(s.train_fraction * n_samples)))
        else:
            raise ConfigError("surrogate block needs train_count or train_fraction")
        if not 1 <= n < n_samples:
            raise ConfigError(
                f"training count {n} must be below the campaign size {n_samples}"
            )
        return n

    def campaigns(self) -> list[McConfig]:
        """Cross-product of the statistics lists, in a stable order."""
        out = []
        st = self.statistics
        for cov in st.cov:
            for dh in st.delta_h:
                for dv in st.delta_v:
                    for mu in st.mu_cu:
                        out.append(
                            McConfig(
                                stats=FieldStatistics(
                                    mu_cu=mu, cov=cov, delta_h=dh, delta_v=dv
                                ),
                                geometry=self.geometry,
                                n_samples=self.campaign.n_samples,
                                base_seed=self.campaign.base_seed,
                                compute_fos=self.campaign.compute_fos,
                            )
                        )
        return out

    def to_dict(self) -> dict:
        d = {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "geometry": self.geometry.to_dict(),
            "statistics": {
                "mu_cu": list(self.statistics.mu_cu),
                "cov": list(self.statistics.cov),
                "delta_h": list(self.statistics.delta_h),
                "delta_v": list(self.statistics.delta_v),
            },
            "campaign": {
                "n_samples": self.campaign.n_samples,
                "base_seed": self.campaign.base_seed,
                "compute_fos": self.campaign.compute_fos,
            },
            "surrogate": {
                "models": list(self.surrogate.models),
                "train_count": self.surrogate.train_count,
                "train_fraction": self.surrogate.train_fraction,
                "split": self.surrogate.split,
                "tune": self.surrogate.tune,
                "k_folds": self.surrogate.k_folds,
                "seed": self.surrogate.seed,
                "hyperparams": self.surrogate.hyperparams,
                "grids": self.surrogate.grids,
                "simulate_train_only": self.surrogate.simulate_train_only,
            },
            "report": {
                "out_dir": self.report.out_dir,
                "formats": list(self.report.formats),
            },
        }
        if self.search is not None:
            s = self.search
            d["search"] = {
                "x_min": s.x_min,
                "x_max": s.x_max,
                "y_min": s.y_min,
                "y_max": s.y_max,
                "xy_step": s.xy_step,
                "r_min": s.r_min,
                "r_step": s.r_step,
            }
        return d


def dataset_filename(config: McConfig) -> str:
    return f"dataset_{config.label}.mcd"


def _take(d: dict, allowed: set, where: str) -> dict:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    return d


def load_run_config(path, overrides: dict | None = None) -> RunConfig:
    """Parse and validate a run file; ``overrides`` come from CLI flags."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    version = raw.get("schema_version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema version {version}")

    overrides = overrides or {}
    try:
        geometry = SlopeGeometry.from_dict(raw.get("geometry", {}))
        search = None
        if "search" in raw:
            search = SearchSpec(**raw["search"])
        st = raw.get("statistics", {})
        _take(st, {"mu_cu", "cov", "delta_h", "delta_v"}, "statistics")
        statistics = StatisticsBlock(
            mu_cu=tuple(st.get("mu_cu", DEFAULT_MU_CU)),
            cov=tuple(st.get("cov", DEFAULT_COV)),
            delta_h=tuple(st.get("delta_h", DEFAULT_DELTA_H)),
            delta_v=tuple(st.get("delta_v", DEFAULT_DELTA_V)),
        )
        ca = raw.get("campaign", {})
        _take(ca, {"n_samples", "base_seed", "compute_fos"}, "campaign")
        campaign = CampaignBlock(
            n_samples=int(ca.get("n_samples", 200)),
            base_seed=int(overrides.get("seed", ca.get("base_seed", 20220101))),
            compute_fos=bool(ca.get("compute_fos", False)),
        )
        su = raw.get("surrogate", {})
        _take(
            su,
            {
                "models",
                "train_count",
                "train_fraction",
                "split",
                "tune",
                "k_folds",
                "seed",
                "hyperparams",
                "grids",
                "simulate_train_only",
            },
            "surrogate",
        )
        surrogate = SurrogateBlock(
            models=tuple(su.get("models", ("rf", "svc"))),
            train_count=su.get("train_count", 40 if "train_fraction" not in su else None),
            train_fraction=su.get("train_fraction"),
            split=su.get("split", "stratified"),
            tune=bool(su.get("tune", False)),
            k_folds=int(su.get("k_folds", 5)),
            seed=int(su.get("seed", 7)),
            hyperparams=su.get("hyperparams", {}),
            grids=su.get("grids", {}),
            simulate_train_only=bool(su.get("simulate_train_only", False)),
        )
        re_ = raw.get("report", {})
        _take(re_, {"out_dir", "formats"}, "report")
        report = ReportBlock(
            out_dir=str(overrides.get("out_dir", re_.get("out_dir", "runs/out"))),
            formats=tuple(re_.get("formats", ("csv", "json"))),
        )
        cfg = RunConfig(
            geometry=geometry,
            search=search,
            statistics=statistics,
            campaign=campaign,
            surrogate=surrogate,
            report=report,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc

    for kind in cfg.surrogate.models:
        if kind not in ("rf", "svc", "mlp"):
            raise ConfigError(f"unknown surrogate model kind: {kind}")
    if cfg.campaign.n_samples < 1:
        raise ConfigError("campaign.n_samples must be >= 1")
    return cfg


def write_resolved_config(cfg: RunConfig, out_dir) -> Path:
    """Provenance: dump the fully-resolved configuration beside outputs."""
    path = Path(out_dir) / "resolved_config.json"
    path.write_text(json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n")
    return path
