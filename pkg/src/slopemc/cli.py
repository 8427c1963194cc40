"""Command-line front end.

Subcommands: generate (simulate campaigns to dataset files), mlamc (the
surrogate-aided reliability analysis), experiment (validation studies),
report (tables + plot data from existing artifacts), export-csv.

Exit codes: 0 success, 1 usage/configuration error, 2 runtime failure
(the repro seed is logged when a campaign sample fails).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import accel
from .config import ConfigError, RunConfig, dataset_filename, load_run_config, write_resolved_config
from .dataset_io import export_csv, export_field_stats_csv, load_dataset, save_dataset
from .geometry import build_grid
from .mlamc import (
    degradation_experiment,
    mlamc_analysis,
    test_size_experiment,
    train_size_experiment,
    train_source_experiment,
)
from .models import default_params, predicted_pf, train_model
from .montecarlo import (
    CampaignError,
    Dataset,
    concat_datasets,
    estimate_pf,
    make_manifest,
    realize_features,
    run_monte_carlo,
)
from .randfield import FieldStatistics, empirical_stats, field_factor, realize_field
from .reporting import (
    mlamc_rows_to_csv,
    timing_rows_to_csv,
    write_csv,
    write_json,
    write_series,
)
from .seeding import derive_seed, sample_seed
from .stability import SearchSpec, classify_stability

log = logging.getLogger("slopemc")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    p = _Parser(prog="slopemc", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("-c", "--config", required=True, help="run configuration JSON")
        sp.add_argument("-o", "--out-dir", default=None, help="override report.out_dir")
        sp.add_argument("--seed", type=int, default=None, help="override campaign.base_seed")
        sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("generate", help="simulate Monte Carlo campaigns to dataset files")
    common(sp)
    sp.add_argument("--overwrite", action="store_true")

    sp = sub.add_parser("mlamc", help="surrogate-aided reliability analysis")
    common(sp)

    sp = sub.add_parser("experiment", help="validation studies")
    sp.add_argument(
        "which",
        choices=("train_size", "test_size", "train_source", "degradation"),
    )
    common(sp)

    sp = sub.add_parser("report", help="tables and plot data from existing artifacts")
    common(sp)
    sp.add_argument("--field-stats", action="store_true",
                    help="also export per-dataset empirical field statistics")

    sp = sub.add_parser("export-csv", help="dataset file to CSV")
    sp.add_argument("dataset", help="path to a .mcd dataset file")
    sp.add_argument("-o", "--output", required=True)
    return p


def _load(args) -> tuple[RunConfig, Path]:
    overrides = {}
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = load_run_config(args.config, overrides)
    out_dir = Path(cfg.report.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return cfg, out_dir


def cmd_generate(args) -> int:
    cfg, out_dir = _load(args)
    campaigns = cfg.campaigns()
    existing = [
        out_dir / dataset_filename(c)
        for c in campaigns
        if (out_dir / dataset_filename(c)).exists()
    ]
    if existing and not args.overwrite:
        log.error(
            "refusing to overwrite %d existing dataset file(s); pass --overwrite",
            len(existing),
        )
        return 1
    write_resolved_config(cfg, out_dir)
    timing = {}
    for i, mc in enumerate(campaigns):
        path = out_dir / dataset_filename(mc)
        log.info("[%d/%d] simulating %s (n=%d)", i + 1, len(campaigns), mc.label, mc.n_samples)
        t0 = time.perf_counter()
        ds = run_monte_carlo(mc, search=cfg.search, workers=args.workers)
        wall = time.perf_counter() - t0
        save_dataset(ds, path)
        pf = estimate_pf(ds.labels)
        timing[mc.label] = {
            "wall_s": wall,
            "n_samples": mc.n_samples,
            "workers": args.workers,
        }
        log.info("    pf=%.2f%% wall=%.1fs -> %s", pf.pf, wall, path.name)
    write_json(timing, out_dir / "generate_timing.json")
    return 0


def _surrogate_kwargs(cfg: RunConfig):
    su = cfg.surrogate
    fixed = {}
    for kind, hp in su.hyperparams.items():
        base = default_params(kind)
        fixed[kind] = type(base)(**{**base.to_dict(), **hp})
    return {
        "kinds": su.models,
        "strategy": su.split,
        "seed": su.seed,
        "fixed_params": fixed or None,
        "tune_grids": su.grids if su.tune else None,
        "k_folds": su.k_folds,
    }


def _mlamc_train_only(cfg: RunConfig, mc, n_train: int, workers: int) -> dict:
    """Blind mode: simulate only the training subset, predict the rest.

    Subset ids are a seeded random draw; stratification is impossible
    before labels exist, mirroring real use where the full campaign is
    never simulated.
    """
    su = cfg.surrogate
    grid = build_grid(mc.geometry)
    spec = cfg.search or SearchSpec.default(mc.geometry)
    rng = np.random.default_rng(derive_seed(su.seed, 0))
    chosen = np.sort(rng.permutation(mc.n_samples)[:n_train])
    L = field_factor(grid, mc.stats)
    feats = np.empty((n_train, grid.n_cells))
    labels = np.empty(n_train, dtype=np.uint8)
    t0 = time.perf_counter()
    for k, i in enumerate(chosen):
        seed_i = sample_seed(mc.base_seed, int(i))
        f = realize_field(L, mc.stats, seed_i)
        feats[k] = f.values
        labels[k] = 1 if classify_stability(f.values, mc.geometry, spec, grid).failed else 0
    t_sim = time.perf_counter() - t0
    if len(np.unique(labels)) < 2:
        raise ValueError("single-class training subset")
    train = Dataset(
        manifest=make_manifest(mc, grid),
        ids=chosen.astype(np.uint64),
        seeds=np.array([sample_seed(mc.base_seed, int(i)) for i in chosen], dtype=np.uint64),
        features=feats,
        labels=labels,
    )
    rest_ids = np.setdiff1d(np.arange(mc.n_samples), chosen)
    rest_features = realize_features(mc, rest_ids, grid)
    row = {
        "cov": mc.stats.cov,
        "xi": mc.stats.xi,
        "mu_cu": mc.stats.mu_cu,
        "n_samples": mc.n_samples,
        "n_train": n_train,
        "strategy": "random",
        "seed": su.seed,
        "pf_full": None,
        "pf_data_only": estimate_pf(labels).pf,
        "pf_err_data_only": None,
        "models": {},
        "timing": {"sim_train_s": t_sim},
    }
    for k_ix, kind in enumerate(su.models):
        params = _surrogate_kwargs(cfg)["fixed_params"]
        params = params.get(kind) if params else None
        t0 = time.perf_counter()
        model = train_model(kind, train, params, derive_seed(su.seed, 1 + k_ix))
        t_train = time.perf_counter() - t0
        t0 = time.perf_counter()
        pf_sur = predicted_pf(model, rest_features)
        t_predict = time.perf_counter() - t0
        row["models"][kind] = {
            "params": (params or default_params(kind)).to_dict(),
            "tuned": False,
            "pf_surrogate": pf_sur,
            "pf_err_surrogate": None,
            "acc": None,
            "auc": None,
        }
        row["timing"][kind] = {"train_s": t_train, "predict_s": t_predict}
    return row


def cmd_mlamc(args) -> int:
    cfg, out_dir = _load(args)
    write_resolved_config(cfg, out_dir)
    kwargs = _surrogate_kwargs(cfg)
    rows, skipped = [], []
    for mc in cfg.campaigns():
        path = out_dir / dataset_filename(mc)
        n_train = cfg.train_count_for(mc.n_samples)
        try:
            if path.exists():
                ds = load_dataset(path)
                row = mlamc_analysis(ds, n_train=n_train, **kwargs)
            elif cfg.surrogate.simulate_train_only:
                row = _mlamc_train_only(cfg, mc, n_train, args.workers)
            else:
                raise FileNotFoundError(
                    f"dataset {path} missing; run generate or set "
                    "surrogate.simulate_train_only"
                )
        except (ValueError, FileNotFoundError) as exc:
            skipped.append({"config": mc.label, "reason": str(exc)})
            log.warning("skipping %s: %s", mc.label, exc)
            continue
        rows.append(row)
        log.info("analysed %s", mc.label)

    sim_timing = {}
    timing_path = out_dir / "generate_timing.json"
    if timing_path.exists():
        sim_timing = json.loads(timing_path.read_text())
    report = {"rows": rows, "skipped": skipped}
    if "json" in cfg.report.formats:
        write_json(report, out_dir / "mlamc_report.json")
    if "csv" in cfg.report.formats:
        mlamc_rows_to_csv(rows, out_dir / "mlamc_report.csv")
        timing_rows_to_csv(rows, sim_timing, out_dir / "mlamc_timing.csv")
    log.info("wrote mlamc report for %d configuration(s), %d skipped", len(rows), len(skipped))
    return 0


def _load_campaign_datasets(cfg: RunConfig, out_dir: Path):
    out = []
    for mc in cfg.campaigns():
        path = out_dir / dataset_filename(mc)
        if not path.exists():
            raise FileNotFoundError(f"missing dataset file: {path}")
        out.append((mc, load_dataset(path)))
    return out


def cmd_experiment(args) -> int:
    cfg, out_dir = _load(args)
    write_resolved_config(cfg, out_dir)
    su = cfg.surrogate
    pairs = _load_campaign_datasets(cfg, out_dir)
    datasets = [d for _, d in pairs]
    which = args.which

    if which == "train_size":
        n = cfg.campaign.n_samples
        sizes = [s for s in (10, 20, 40, 100, 400) if s < n]
        report = {"configs": {}}
        for mc, ds in pairs:
            report["configs"][mc.label] = train_size_experiment(
                ds, sizes=sizes, kinds=su.models, seed=su.seed
            )
        series = {}
        for label, res in report["configs"].items():
            for kind, per_size in res["per_model"].items():
                series[f"{label}/{kind}"] = [
                    (s, e) for s, e in sorted(per_size.items()) if e is not None
                ]
            series[f"{label}/data_only"] = sorted(res["data_only"].items())
        write_series(out_dir / "plot_pf_err_vs_train_size.csv", "train_size", "pf_err", series)

    elif which == "test_size":
        n_train = min(500, max(1, cfg.campaign.n_samples // 4))
        report = {"configs": {}}
        for mc, ds in pairs:
            report["configs"][mc.label] = test_size_experiment(
                ds, kinds=su.models, n_train=n_train, seed=su.seed
            )
        rows = []
        for label, res in sorted(report["configs"].items()):
            for kind, m in sorted(res["models"].items()):
                rows.append({"config": label, "model": kind, **m})
        write_csv(
            rows,
            ["config", "model", "acc_small", "auc_small", "acc_rest", "auc_rest",
             "acc_diff", "auc_diff"],
            out_dir / "test_size_report.csv",
        )

    elif which == "train_source":
        n_train = cfg.train_count_for(cfg.campaign.n_samples)
        report = train_source_experiment(
            datasets, kinds=su.models, n_train=n_train, seed=su.seed
        )

    else:  # degradation
        n_train = min(500, max(2, cfg.campaign.n_samples // 4))
        grouped = {}
        for mc, ds in pairs:
            key = (mc.stats.cov, mc.stats.xi)
            grouped.setdefault(key, []).append(ds)
        grouped = {k: concat_datasets(v) for k, v in grouped.items()}
        report = degradation_experiment(
            grouped, kinds=su.models, n_train=n_train, seed=su.seed
        )
        series_acc, series_auc = {}, {}
        for row in report["rows"]:
            for kind, m in row["models"].items():
                series_acc.setdefault(f"cov{row['cov']:g}/{kind}", []).append(
                    (row["xi"], m["acc"])
                )
                series_auc.setdefault(f"cov{row['cov']:g}/{kind}", []).append(
                    (row["xi"], m["auc"])
                )
        write_series(out_dir / "plot_acc_vs_xi.csv", "xi", "acc", series_acc)
        write_series(out_dir / "plot_auc_vs_xi.csv", "xi", "auc", series_auc)

    write_json(report, out_dir / f"experiment_{which}.json")
    log.info("wrote experiment_%s.json", which)
    return 0


def cmd_report(args) -> int:
    cfg, out_dir = _load(args)
    rows = []
    series_pf = {}
    for mc in cfg.campaigns():
        path = out_dir / dataset_filename(mc)
        if not path.exists():
            raise FileNotFoundError(f"missing dataset file: {path}")
        ds = load_dataset(path)
        est = estimate_pf(ds.labels)
        rows.append(
            {
                "cov": mc.stats.cov,
                "xi": mc.stats.xi,
                "mu_cu": mc.stats.mu_cu,
                "n_samples": len(ds),
                "pf": est.pf,
                "cov_pf": est.cov_pf,
            }
        )
        series_pf.setdefault(f"cov{mc.stats.cov:g}/mu{mc.stats.mu_cu:g}", []).append(
            (mc.stats.xi, est.pf)
        )
        if args.field_stats:
            grid = build_grid(mc.geometry)
            stats = FieldStatistics(
                mu_cu=mc.stats.mu_cu, cov=mc.stats.cov,
                delta_h=mc.stats.delta_h, delta_v=mc.stats.delta_v,
            )
            rep = empirical_stats(ds.features, grid, stats)
            export_field_stats_csv(rep, grid, out_dir / f"field_stats_{mc.label}.csv")
    if "csv" in cfg.report.formats:
        write_csv(rows, ["cov", "xi", "mu_cu", "n_samples", "pf", "cov_pf"],
                  out_dir / "pf_summary.csv")
        write_series(out_dir / "plot_pf_vs_xi.csv", "xi", "pf", series_pf)
    if "json" in cfg.report.formats:
        write_json({"rows": rows}, out_dir / "pf_summary.json")
    log.info("wrote pf summary for %d campaign(s)", len(rows))
    return 0


def cmd_export_csv(args) -> int:
    ds = load_dataset(args.dataset)
    export_csv(ds, args.output)
    log.info("wrote %s", args.output)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    log.debug("kernel backend: %s", accel.BACKEND)
    handlers = {
        "generate": cmd_generate,
        "mlamc": cmd_mlamc,
        "experiment": cmd_experiment,
        "report": cmd_report,
        "export-csv": cmd_export_csv,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 1
    except CampaignError as exc:
        log.error("runtime failure: %s (repro seed %d)", exc, exc.seed)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and map to exit code
        log.error("runtime failure: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
