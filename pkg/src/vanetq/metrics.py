"""KPI computation: latency, windowed throughput, Jain fairness, CDFs, reports."""

import math
from collections import defaultdict, deque

from .traffic import CATEGORY_ORDER


class TemporalIntegrityFault(Exception):
    """A packet was received before it was generated."""


class ComparisonRefused(Exception):
    """Two reports do not share the same scenario geometry."""


def jain_index(values):
    """(sum x)^2 / (n * sum x^2); None for all-zero or empty input."""
    if not values:
        return None
    if any(v < 0 for v in values):
        raise ValueError("throughput values must be non-negative")
    total = sum(values)
    sq = sum(v * v for v in values)
    if sq == 0:
        return None
    return (total * total) / (len(values) * sq)


def export_cdf(samples, points=100):
    """Empirical CDF at `points` quantile positions; final probability is 1.0."""
    if not samples:
        return []
    s = sorted(samples)
    n = len(s)
    out = []
    for i in range(1, points + 1):
        k = math.ceil(i * n / points)
        out.append((s[k - 1], k / n))
    return out


def percentile(sorted_samples, q):
    """Type-1 (inverse-CDF) percentile over an already sorted list."""
    n = len(sorted_samples)
    if n == 0:
        return None
    k = max(1, math.ceil(q * n))
    return sorted_samples[min(k, n) - 1]


class KpiCollector:
    """Append-only per-run KPI store.

    Keeps a 1 s sliding window per category for the reward signal, full
    latency/throughput samples for reporting, and 1 Hz violation counters for
    the latency/data-rate constraints.
    """

    def __init__(self, categories, window_s=1.0):
        self.categories = categories
        self.window_s = window_s
        self._window = {tag: deque() for tag in categories}
        self.latencies = {tag: [] for tag in categories}
        self.bits = {tag: 0 for tag in categories}
        self.vehicle_bits = defaultdict(int)        # vid -> delivered bits
        self.vehicle_category = {}
        self.violations_latency = {tag: 0 for tag in categories}
        self.violations_rate = {tag: 0 for tag in categories}
        self.drops = {tag: 0 for tag in categories}
        self.generated = {tag: 0 for tag in categories}
        self.delivered_packets = {tag: 0 for tag in categories}
        self.timeseries = []    # (episode, t, tag, throughput_bps, mean_latency|None)
        self.observed_time = 0.0

    def record_reception(self, packet, t_rx):
        if t_rx < packet.generated_at:
            raise TemporalIntegrityFault(
                f"packet {packet.id} received at {t_rx} before generation "
                f"at {packet.generated_at}"
            )
        tag = packet.category
        latency = t_rx - packet.generated_at
        self._window[tag].append((t_rx, packet.size, latency))
        self.latencies[tag].append(latency)
        self.bits[tag] += packet.size
        self.delivered_packets[tag] += 1
        self.vehicle_bits[packet.vehicle_id] += packet.size
        self.vehicle_category[packet.vehicle_id] = tag

    def note_vehicle(self, vid, tag):
        """Vehicles that never deliver still count in the fairness population."""
        self.vehicle_category.setdefault(vid, tag)
        self.vehicle_bits.setdefault(vid, 0)

    def record_drop(self, tag, count=1):
        self.drops[tag] += count

    def record_generated(self, tag, count):
        self.generated[tag] += count

    def window_kpis(self, tag, now):
        """(throughput_bps, mean_latency_s | None) over the trailing window."""
        win = self._window[tag]
        horizon = now - self.window_s
        while win and win[0][0] <= horizon:
            win.popleft()
        if not win:
            return 0.0, None
        bits = sum(w[1] for w in win)
        mean_lat = sum(w[2] for w in win) / len(win)
        return bits / self.window_s, mean_lat

    def tick(self, episode, t, categories):
        """1 Hz: accumulate constraint violations and the report time series."""
        self.observed_time += 1.0
        for tag, cat in categories.items():
            r_bps, mean_lat = self.window_kpis(tag, t)
            if mean_lat is None or mean_lat > cat.max_latency:
                self.violations_latency[tag] += 1
            if r_bps < cat.min_rate:
                self.violations_rate[tag] += 1
            self.timeseries.append((episode, t, tag, r_bps, mean_lat))

    def end_episode(self):
        for win in self._window.values():
            win.clear()

    def summarize(self, meta, categories):
        """Build the RunReport dict (JSON-serializable, stable field names)."""
        per_cat = {}
        for tag in CATEGORY_ORDER:
            lats = sorted(self.latencies[tag])
            vehicles = [v for v, c in self.vehicle_category.items() if c == tag]
            tput = [self.vehicle_bits[v] for v in vehicles]
            duration = meta.get("episodes", 1) * meta.get("episode_duration", 1.0)
            per_cat[tag] = {
                "category": tag,
                "packets_generated": self.generated[tag],
                "packets_delivered": self.delivered_packets[tag],
                "drops": self.drops[tag],
                "mean_latency_s": (sum(lats) / len(lats)) if lats else None,
                "p50_latency_s": percentile(lats, 0.50),
                "p90_latency_s": percentile(lats, 0.90),
                "p99_latency_s": percentile(lats, 0.99),
                "max_latency_s": lats[-1] if lats else None,
                "throughput_bps": self.bits[tag] / duration if duration else 0.0,
                "jain": jain_index(tput),
                "vehicles": len(vehicles),
                "violations_latency": self.violations_latency[tag],
                "violations_rate": self.violations_rate[tag],
            }
        return {
            "meta": meta,
            "categories": per_cat,
            "totals": {
                "packets_delivered": sum(self.delivered_packets.values()),
                "packets_generated": sum(self.generated.values()),
                "drops": sum(self.drops.values()),
                "bits_delivered": sum(self.bits.values()),
            },
        }


_GEOMETRY_KEYS = ("tile_width", "tile_height", "entry_interval",
                  "episode_duration", "coverage_diameter")


def _pct_delta(base, new):
    if base is None or new is None or base == 0:
        return None
    return (new - base) / base * 100.0


def compare_reports(report_a, report_b):
    """Per-category percentage deltas of B relative to A.

    Positive latency improvement means B is faster; positive throughput delta
    means B carries more bits. Refuses reports from different geometries.
    """
    for key in _GEOMETRY_KEYS:
        if report_a["meta"].get(key) != report_b["meta"].get(key):
            raise ComparisonRefused(
                f"scenario geometry differs on {key!r}: "
                f"{report_a['meta'].get(key)} vs {report_b['meta'].get(key)}"
            )
    deltas = {}
    for tag in CATEGORY_ORDER:
        a = report_a["categories"][tag]
        b = report_b["categories"][tag]
        lat_delta = _pct_delta(a["mean_latency_s"], b["mean_latency_s"])
        deltas[tag] = {
            "latency_improvement_pct": None if lat_delta is None else -lat_delta,
            "throughput_delta_pct": _pct_delta(a["throughput_bps"],
                                               b["throughput_bps"]),
            "jain_delta": (None if a["jain"] is None or b["jain"] is None
                           else b["jain"] - a["jain"]),
        }
    return {
        "mode_a": report_a["meta"].get("mode"),
        "mode_b": report_b["meta"].get("mode"),
        "categories": deltas,
    }
