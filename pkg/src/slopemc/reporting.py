"""Report assembly: CSV/JSON tables, plot-data series, time accounting.

All JSON is written with sorted keys and CSV rows in a deterministic
order, so identical inputs reproduce identical bytes. Wall-clock values
live only under keys named ``timing`` (or in the timing CSV), which is
what the determinism contract excludes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def write_csv(rows: list[dict], fieldnames: list[str], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow(row)


def strip_timing(obj):
    """Deep-copy with every 'timing'/'*_s' leaf removed (for comparisons)."""
    if isinstance(obj, dict):
        return {
            k: strip_timing(v)
            for k, v in obj.items()
            if k != "timing" and not k.endswith("_s") and k != "speedup"
        }
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def speedup_identity(t_sim_full: float, t_sim_subset: float, t_train: float,
                     t_predict: float) -> float:
    """Accounting identity for the reported efficiency gain.

    The subset simulation time is prorated from the full campaign wall
    time by sample count; the identity is recomputable from the report's
    own fields.
    """
    denom = t_sim_subset + t_train + t_predict
    return t_sim_full / denom if denom > 0 else float("inf")


def mlamc_rows_to_csv(rows: list[dict], path) -> None:
    """Flatten per-configuration results into one CSV row per model."""
    flat = []
    for row in rows:
        for kind in sorted(row.get("models", {})):
            m = row["models"][kind]
            flat.append(
                {
                    "cov": row["cov"],
                    "xi": row["xi"],
                    "mu_cu": row["mu_cu"],
                    "model": kind,
                    "n_samples": row["n_samples"],
                    "n_train": row["n_train"],
                    "pf_full": row.get("pf_full"),
                    "pf_data_only": row.get("pf_data_only"),
                    "pf_surrogate": m["pf_surrogate"],
                    "pf_err_surrogate": m.get("pf_err_surrogate"),
                    "pf_err_data_only": row.get("pf_err_data_only"),
                    "acc": m.get("acc"),
                    "auc": m.get("auc"),
                }
            )
    fields = [
        "cov",
        "xi",
        "mu_cu",
        "model",
        "n_samples",
        "n_train",
        "pf_full",
        "pf_data_only",
        "pf_surrogate",
        "pf_err_surrogate",
        "pf_err_data_only",
        "acc",
        "auc",
    ]
    write_csv(flat, fields, path)


def timing_rows_to_csv(rows: list[dict], sim_timing: dict, path) -> None:
    """Wall-time table with the speedup accounting identity per model."""
    flat = []
    for row in rows:
        label = f"cov{row['cov']:g}_xi{row['xi']:g}_mu{row['mu_cu']:g}"
        sim = sim_timing.get(label, {})
        t_full = sim.get("wall_s")
        for kind in sorted(row.get("models", {})):
            t = row.get("timing", {}).get(kind, {})
            entry = {
                "cov": row["cov"],
                "xi": row["xi"],
                "mu_cu": row["mu_cu"],
                "model": kind,
                "sim_full_s": t_full,
                "sim_train_s": None,
                "train_s": t.get("train_s"),
                "predict_s": t.get("predict_s"),
                "speedup": None,
            }
            if t_full is not None:
                t_sub = t_full * row["n_train"] / row["n_samples"]
                entry["sim_train_s"] = t_sub
                entry["speedup"] = speedup_identity(
                    t_full, t_sub, t.get("train_s", 0.0), t.get("predict_s", 0.0)
                )
            flat.append(entry)
    fields = [
        "cov",
        "xi",
        "mu_cu",
        "model",
        "sim_full_s",
        "sim_train_s",
        "train_s",
        "predict_s",
        "speedup",
    ]
    write_csv(flat, fields, path)


def write_series(path, x_name: str, y_name: str, series: dict) -> None:
    """Plot-data file: long-format (series, x, y) rows for any plotter."""
    rows = []
    for name in sorted(series):
        for x, y in series[name]:
            rows.append({"series": name, x_name: x, y_name: y})
    write_csv(rows, ["series", x_name, y_name], path)
