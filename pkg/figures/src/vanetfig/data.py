"""Readers and validators for vanetq run artifacts.

Everything here consumes only the documented on-disk contracts of the
simulator package: report.json, timeseries.csv, and the per-category CDF
CSVs. No simulator internals are imported.
"""

import csv
import json
import os

CATEGORY_ORDER = ("VO", "VI", "HD", "BE")

TIMESERIES = "timeseries.csv"
REPORT = "report.json"

TIMESERIES_COLUMNS = ("episode", "t", "category", "throughput_bps",
                      "mean_latency_s")
CDF_LATENCY_COLUMNS = ("latency_s", "cum_prob")
CDF_THROUGHPUT_COLUMNS = ("throughput_bps", "cum_prob")


class SchemaError(Exception):
    """An input file is missing, malformed, or violates a data invariant."""


def _read_csv(path, columns):
    if not os.path.exists(path):
        raise SchemaError(f"missing input file: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        return list(reader)


def load_cdf(run_dir, kind, tag):
    """[(value, cum_prob)] from one per-category CDF file, validated."""
    if kind == "latency":
        name, columns = f"cdf_latency_{tag}.csv", CDF_LATENCY_COLUMNS
    else:
        name, columns = f"cdf_throughput_{tag}.csv", CDF_THROUGHPUT_COLUMNS
    path = os.path.join(run_dir, name)
    rows = _read_csv(path, columns)
    try:
        points = [(float(r[columns[0]]), float(r[columns[1]])) for r in rows]
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric value ({exc})") from exc
    _check_monotone(path, points)
    return points


def _check_monotone(path, points):
    for (v1, p1), (v2, p2) in zip(points, points[1:]):
        if v2 < v1 or p2 < p1:
            raise SchemaError(
                f"{path}: CDF not monotone at value={v2}, cum_prob={p2}")
    for _, p in points:
        if not 0.0 <= p <= 1.0:
            raise SchemaError(f"{path}: cum_prob {p} outside [0, 1]")


def load_timeseries(run_dir, tag):
    """(times, throughput_bps, mean_latency_s|None) for one category."""
    path = os.path.join(run_dir, TIMESERIES)
    rows = _read_csv(path, TIMESERIES_COLUMNS)
    times, tput, lat = [], [], []
    try:
        for r in rows:
            if r["category"] != tag:
                continue
            times.append(float(r["t"]))
            tput.append(float(r["throughput_bps"]))
            lat.append(float(r["mean_latency_s"])
                       if r["mean_latency_s"] else None)
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric value ({exc})") from exc
    return times, tput, lat


def load_fairness(run_dir):
    """{category: jain_index | None} from report.json."""
    path = os.path.join(run_dir, REPORT)
    if not os.path.exists(path):
        raise SchemaError(f"missing input file: {path}")
    with open(path) as fh:
        try:
            report = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    categories = report.get("categories")
    if categories is None:
        raise SchemaError(f"{path}: missing column 'categories'")
    out = {}
    for tag in CATEGORY_ORDER:
        if tag not in categories:
            raise SchemaError(f"{path}: missing category {tag!r}")
        if "jain" not in categories[tag]:
            raise SchemaError(f"{path}: missing column 'jain' for {tag}")
        out[tag] = categories[tag]["jain"]
    return out
