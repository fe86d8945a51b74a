"""Output writers. All filesystem writes funnel through the CLI layer."""

import csv
import json
import os

from .metrics import export_cdf
from .traffic import CATEGORY_ORDER

PACKET_LOG = "packet_log.csv"
MAC_LOG = "mac_log.csv"
DECISION_LOG = "decision_log.csv"
TRACE_LOG = "trace.csv"
REPORT = "report.json"
METADATA = "metadata.json"
QTABLE = "qtable.txt"
TIMESERIES = "timeseries.csv"

PACKET_HEADER = ("packet_id", "vehicle_id", "category", "size_bits",
                 "t_generated", "t_received", "dropped")
MAC_HEADER = ("t", "event", "vehicle_id", "ac", "packet_id")
DECISION_HEADER = ("t", "vehicle_id", "sj_bucket", "tv", "category", "tcv",
                   "action", "waiting_time", "reward")
TRACE_HEADER = ("vehicle_id", "t", "x", "y", "speed")
TIMESERIES_HEADER = ("episode", "t", "category", "throughput_bps",
                     "mean_latency_s")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_run_outputs(out_dir, result, config, collector, cdf_points=200):
    """Write all artifacts for one run into `out_dir`."""
    os.makedirs(out_dir, exist_ok=True)
    report = result.report
    with open(os.path.join(out_dir, REPORT), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, METADATA), "w") as fh:
        json.dump(report["meta"], fh, indent=2, sort_keys=True)
        fh.write("\n")
    if config.write_logs:
        _write_csv(os.path.join(out_dir, PACKET_LOG), PACKET_HEADER,
                   result.packet_rows)
        _write_csv(os.path.join(out_dir, DECISION_LOG), DECISION_HEADER,
                   result.decision_rows)
        if config.write_mac_log:
            _write_csv(os.path.join(out_dir, MAC_LOG), MAC_HEADER,
                       result.mac_rows)
        if config.write_trace:
            _write_csv(os.path.join(out_dir, TRACE_LOG), TRACE_HEADER,
                       result.trace_rows)
    rows = [(ep, f"{t:.6f}", tag, f"{r:.3f}",
             "" if lat is None else f"{lat:.9f}")
            for ep, t, tag, r, lat in collector.timeseries]
    _write_csv(os.path.join(out_dir, TIMESERIES), TIMESERIES_HEADER, rows)
    for tag in CATEGORY_ORDER:
        cdf = export_cdf(collector.latencies[tag], cdf_points)
        _write_csv(os.path.join(out_dir, f"cdf_latency_{tag}.csv"),
                   ("latency_s", "cum_prob"),
                   [(f"{v:.9f}", f"{p:.9f}") for v, p in cdf])
        window_rates = [row[3] for row in collector.timeseries if row[2] == tag]
        cdf_t = export_cdf(window_rates, cdf_points)
        _write_csv(os.path.join(out_dir, f"cdf_throughput_{tag}.csv"),
                   ("throughput_bps", "cum_prob"),
                   [(f"{v:.3f}", f"{p:.9f}") for v, p in cdf_t])
