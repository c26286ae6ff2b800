"""Readers for the simulator's exported CSVs.

Two file shapes exist: per-pass traces (`trace_<scheme>.csv`, one row per
timestep) and pooled CDFs (`cdf.csv`, one row per sample with its cumulative
probability).  Everything is parsed as float64 and handed to the figures
untouched; this module never derives or recomputes a metric.
"""
from __future__ import annotations

import csv
import os

import numpy as np

METRICS = ("snr_ul_db", "snr_dl_db", "inr_db", "sinr_dl_db", "sum_se")
CDF_COLUMNS = ("metric", "scheme", "value_db", "prob")


def require_columns(present, needed, path) -> None:
    for name in needed:
        if name not in present:
            raise ValueError(f"column {name!r} missing from {path}")


def read_trace_csv(path) -> dict:
    """Column name -> float array; every column the file has."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        rows = list(reader)
    if not rows:
        raise ValueError(f"no data rows in {path}")
    require_columns(fields, ("t",), path)
    try:
        return {name: np.array([float(r[name]) for r in rows]) for name in fields}
    except (TypeError, ValueError) as exc:
        raise ValueError(f"non-numeric cell in {path}: {exc}") from exc


def discover_traces(in_dir) -> dict:
    """scheme -> path for every trace_*.csv under in_dir, scheme-sorted."""
    try:
        names = sorted(
            n for n in os.listdir(in_dir) if n.startswith("trace_") and n.endswith(".csv")
        )
    except NotADirectoryError as exc:
        raise ValueError(f"{in_dir} is not a directory of trace files") from exc
    if not names:
        raise ValueError(f"no trace_*.csv files under {in_dir}")
    return {name[len("trace_"):-len(".csv")]: os.path.join(in_dir, name) for name in names}


def read_cdf_csv(path) -> dict:
    """(scheme, metric) -> (values, probs) in file order.

    Probabilities are validated to lie in [0, 1]; anything else means the
    file is not an empirical CDF and rendering it would silently lie.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        rows = list(reader)
    require_columns(fields, CDF_COLUMNS, path)
    if not rows:
        raise ValueError(f"no data rows in {path}")
    grouped: dict = {}
    for i, row in enumerate(rows):
        try:
            value = float(row["value_db"])
            prob = float(row["prob"])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"non-numeric cell in {path} row {i + 2}: {exc}") from exc
        if not 0.0 <= prob <= 1.0:
            raise ValueError(
                f"probability {prob} outside [0, 1] in {path} row {i + 2}"
            )
        grouped.setdefault((row["scheme"], row["metric"]), []).append((value, prob))
    return {
        key: (np.array([v for v, _ in pairs]), np.array([p for _, p in pairs]))
        for key, pairs in grouped.items()
    }
