"""Dataset persistence: JSON manifest line + packed binary payload.

File layout (frozen):

* line 1 -- UTF-8 JSON manifest terminated by ``\\n`` (schema version,
  campaign configuration, cell count, grid ordering hash, compute_fos);
* payload -- one packed little-endian record per sample:
  uint64 id, uint64 seed, ``cell_count`` float64 strengths (kPa),
  uint8 label, and a float64 FOS when the manifest's compute_fos is set.

Loading re-derives the grid from the manifest geometry and cross-checks
the ordering hash, so a file generated with a different cell ordering
can never be silently consumed. Error categories are distinct: schema,
payload, and hash problems raise different exception types.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .geometry import SlopeGeometry, build_grid
from .montecarlo import SCHEMA_VERSION, Dataset, DatasetManifest


class DatasetFormatError(RuntimeError):
    """Base class for dataset file problems."""


class DatasetSchemaError(DatasetFormatError):
    """Unknown schema version or malformed/missing manifest fields."""


class DatasetPayloadError(DatasetFormatError):
    """Payload truncated or not matching the manifest's dimensions."""


class DatasetHashError(DatasetFormatError):
    """Manifest inconsistent with the grid it claims to describe."""


def _record_dtype(cell_count: int, compute_fos: bool) -> np.dtype:
    fields = [
        ("id", "<u8"),
        ("seed", "<u8"),
        ("cu", "<f8", (cell_count,)),
        ("label", "u1"),
    ]
    if compute_fos:
        fields.append(("fos", "<f8"))
    return np.dtype(fields)


def save_dataset(dataset: Dataset, path) -> None:
    """Write a campaign dataset; round-trips bit-identically."""
    m = dataset.manifest
    n = len(dataset)
    if n != m.n_samples:
        raise ValueError("dataset size does not match its manifest")
    if not np.array_equal(dataset.ids, np.arange(n, dtype=np.uint64)):
        raise ValueError("only full campaigns (contiguous ids from 0) are persisted")
    rec = np.zeros(n, dtype=_record_dtype(m.cell_count, m.compute_fos))
    rec["id"] = dataset.ids
    rec["seed"] = dataset.seeds
    rec["cu"] = dataset.features
    rec["label"] = dataset.labels
    if m.compute_fos:
        if dataset.fos is None:
            raise ValueError("manifest declares FOS but dataset has none")
        rec["fos"] = dataset.fos
    with open(path, "wb") as fh:
        fh.write(json.dumps(m.to_dict(), sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(rec.tobytes())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        header = fh.readline()
        payload = fh.read()
    try:
        raw = json.loads(header.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DatasetSchemaError(f"unreadable manifest in {path}: {exc}") from exc
    if not isinstance(raw, dict) or raw.get("schema_version") != SCHEMA_VERSION:
        raise DatasetSchemaError(
            f"unsupported schema version {raw.get('schema_version')!r} in {path}"
        )
    try:
        manifest = DatasetManifest.from_dict(raw)
        geometry = SlopeGeometry.from_dict(manifest.geometry)
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetSchemaError(f"malformed manifest in {path}: {exc}") from exc

    grid = build_grid(geometry)
    if grid.n_cells != manifest.cell_count or grid.ordering_hash() != manifest.grid_hash:
        raise DatasetHashError(
            f"manifest grid hash/cell count does not match its geometry in {path}"
        )

    dtype = _record_dtype(manifest.cell_count, manifest.compute_fos)
    expected = manifest.n_samples * dtype.itemsize
    if len(payload) != expected:
        raise DatasetPayloadError(
            f"payload is {len(payload)} bytes, expected {expected} in {path}"
        )
    rec = np.frombuffer(payload, dtype=dtype)
    return Dataset(
        manifest=manifest,
        ids=rec["id"].copy(),
        seeds=rec["seed"].copy(),
        features=rec["cu"].astype(np.float64, copy=True),
        labels=rec["label"].copy(),
        fos=rec["fos"].copy() if manifest.compute_fos else None,
    )


def export_csv(dataset: Dataset, path) -> None:
    """Interoperability export: one row per sample, RFC-4180 quoting."""
    m = dataset.manifest
    header = ["id", "seed", "label"]
    if dataset.fos is not None:
        header.append("fos")
    header += [f"cu_{k:04d}" for k in range(m.cell_count)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(dataset)):
            row = [int(dataset.ids[i]), int(dataset.seeds[i]), int(dataset.labels[i])]
            if dataset.fos is not None:
                row.append(repr(float(dataset.fos[i])))
            row += [repr(float(v)) for v in dataset.features[i]]
            w.writerow(row)


def export_field_stats_csv(report, grid, path) -> None:
    """Per-cell empirical statistics plus a summary block."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell", "x", "y", "mean_cu", "cov_cu"])
        for i in range(grid.n_cells):
            w.writerow(
                [
                    i,
                    repr(float(grid.centers[i, 0])),
                    repr(float(grid.centers[i, 1])),
                    repr(float(report.per_cell_mean[i])),
                    repr(float(report.per_cell_cov[i])),
                ]
            )
        w.writerow([])
        w.writerow(["summary", "value"])
        w.writerow(["n_realizations", report.n_realizations])
        w.writerow(["pooled_mean", repr(report.pooled_mean)])
        w.writerow(["pooled_cov", repr(report.pooled_cov)])
        w.writerow(["ln_skewness", repr(report.ln_skewness)])
        w.writerow(["lag_corr_h", "" if report.lag_corr_h is None else repr(report.lag_corr_h)])
        w.writerow(["lag_corr_v", "" if report.lag_corr_v is None else repr(report.lag_corr_v)])
