"""Trace JSON and metrics CSV files."""

from __future__ import annotations

import csv
import json
import math

from robopack.sim.episode import EpisodeMetrics

TRACE_FORMAT = "robopack-trace/1"
METRICS_HEADER = ["policy", "bin_type", "lookahead", "seed", "mean_fill_rate", "time_per_box_ms", "bins_closed"]
RECORD_KEYS = ("step", "box_id", "bin_serial", "corner", "orientation", "closed_bins_so_far", "policy_time_ms")


class TraceError(ValueError):
    pass


def trace_document(metrics: EpisodeMetrics, boxes, bin_dims, header: dict) -> dict:
    doc = {
        "format": TRACE_FORMAT,
        "policy": metrics.policy,
        "seed": metrics.seed,
        "lookahead": metrics.lookahead,
        "bin_dims": list(bin_dims.sides),
        "config": header,
        "boxes": [[b.id, b.l, b.b, b.h, b.true_volume] for b in boxes],
        "records": metrics.trace,
        "summary": {
            "mean_fill_rate": None if math.isnan(metrics.mean_fill_rate) else round(metrics.mean_fill_rate, 6),
            "closed_fill_rates": [round(r, 6) for r in metrics.closed_fill_rates],
            "bins_closed": metrics.bins_closed,
            "boxes_packed": metrics.boxes_packed,
            "budget_hits": metrics.budget_hits,
        },
    }
    return doc


def write_trace(path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def read_trace(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise TraceError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise TraceError(f"{path}: top level must be an object")
    for key in ("format", "bin_dims", "boxes", "records"):
        if key not in doc:
            raise TraceError(f"{path}: missing key {key!r}")
    if doc["format"] != TRACE_FORMAT:
        raise TraceError(f"{path}: unknown format {doc['format']!r}")
    if not (isinstance(doc["bin_dims"], list) and len(doc["bin_dims"]) == 3):
        raise TraceError(f"{path}: bin_dims must be [L, B, H]")
    for n, rec in enumerate(doc["records"]):
        if not isinstance(rec, dict):
            raise TraceError(f"{path}: records[{n}] must be an object")
        missing = [k for k in RECORD_KEYS if k not in rec]
        if missing:
            raise TraceError(f"{path}: records[{n}] missing {missing}")
        if not (isinstance(rec["corner"], list) and len(rec["corner"]) == 3):
            raise TraceError(f"{path}: records[{n}].corner must be [x, y, z]")
    return doc


def metrics_row(metrics: EpisodeMetrics, bin_type: str) -> list:
    fr = metrics.mean_fill_rate
    return [
        metrics.policy,
        bin_type,
        metrics.lookahead,
        metrics.seed,
        "nan" if math.isnan(fr) else f"{fr:.4f}",
        f"{metrics.mean_time_per_box * 1000.0:.4f}",
        metrics.bins_closed,
    ]


def write_metrics(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        w.writerows(rows)


def read_metrics(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["lookahead"] = int(r["lookahead"])
        r["seed"] = int(r["seed"])
        r["mean_fill_rate"] = float(r["mean_fill_rate"])
        r["time_per_box_ms"] = float(r["time_per_box_ms"])
        r["bins_closed"] = int(r["bins_closed"])
    return rows
