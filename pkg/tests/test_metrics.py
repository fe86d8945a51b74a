import pytest
from hypothesis import given, strategies as st

from vanetq.metrics import (ComparisonRefused, KpiCollector,
                            TemporalIntegrityFault, compare_reports,
                            export_cdf, jain_index, percentile)
from vanetq.traffic import Packet, default_categories

CATS = default_categories()

GEOMETRY = {"tile_width": 300.0, "tile_height": 100.0, "entry_interval": 0.66,
            "episode_duration": 250.0, "coverage_diameter": 200.0}


# ---- Jain fairness -----------------------------------------------------

def test_jain_equal_shares_is_one():
    assert jain_index([5.0, 5.0, 5.0, 5.0]) == pytest.approx(1.0, abs=1e-12)


def test_jain_single_winner():
    # (sum x)^2 / (n * sum x^2) = 1/4 when one of four gets everything
    assert jain_index([1.0, 0.0, 0.0, 0.0]) == pytest.approx(0.25, abs=1e-12)


def test_jain_two_to_one_split():
    assert jain_index([2.0, 1.0]) == pytest.approx(9 / 10, abs=1e-12)


def test_jain_degenerate_inputs():
    assert jain_index([]) is None
    assert jain_index([0.0, 0.0]) is None


def test_jain_single_vehicle_is_one():
    assert jain_index([3.0]) == pytest.approx(1.0)


def test_jain_negative_rejected():
    with pytest.raises(ValueError):
        jain_index([1.0, -1.0])


@given(st.lists(st.floats(0.01, 1e6), min_size=1, max_size=50),
       st.floats(0.01, 1000.0))
def test_jain_scale_invariant_and_bounded(xs, k):
    j = jain_index(xs)
    assert 1 / len(xs) - 1e-9 <= j <= 1 + 1e-9
    assert jain_index([k * x for x in xs]) == pytest.approx(j, rel=1e-9)


# ---- CDF export and percentiles ----------------------------------------

def test_cdf_terminal_probability_exactly_one():
    pts = export_cdf([3.0, 1.0, 2.0], points=3)
    assert pts[-1][1] == 1.0
    assert pts == [(1.0, pytest.approx(1 / 3)), (2.0, pytest.approx(2 / 3)),
                   (3.0, 1.0)]


def test_cdf_downsamples_long_input():
    pts = export_cdf(list(range(1000)), points=10)
    assert len(pts) == 10
    assert pts[-1] == (999, 1.0)


def test_cdf_empty_input():
    assert export_cdf([], points=5) == []


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=300),
       st.integers(2, 50))
def test_cdf_monotone_in_both_coordinates(xs, points):
    pts = export_cdf(xs, points=points)
    for (v1, p1), (v2, p2) in zip(pts, pts[1:]):
        assert v1 <= v2
        assert p1 <= p2
    assert pts[-1][1] == 1.0


def test_percentile_type1_semantics():
    data = [10.0, 20.0, 30.0, 40.0]
    assert percentile(data, 0.50) == 20.0
    assert percentile(data, 0.90) == 40.0
    assert percentile(data, 1.0) == 40.0
    assert percentile(data, 0.01) == 10.0
    assert percentile([], 0.5) is None


# ---- collector ---------------------------------------------------------

def _pkt(pid, vid, tag, t_gen):
    return Packet(pid, vid, tag, CATS[tag].packet_size, t_gen)


def test_reception_before_generation_refused():
    col = KpiCollector(CATS)
    with pytest.raises(TemporalIntegrityFault):
        col.record_reception(_pkt(1, 1, "HD", 5.0), 4.9)


def test_window_kpis_rate_and_latency():
    col = KpiCollector(CATS)
    col.record_reception(_pkt(1, 1, "HD", 0.2), 0.5)
    col.record_reception(_pkt(2, 1, "HD", 0.3), 0.9)
    r_bps, lat = col.window_kpis("HD", 1.0)
    assert r_bps == pytest.approx(2 * 8000 / 1.0)
    assert lat == pytest.approx((0.3 + 0.6) / 2)


def test_window_expires_old_samples():
    col = KpiCollector(CATS)
    col.record_reception(_pkt(1, 1, "HD", 0.2), 0.5)
    r_bps, lat = col.window_kpis("HD", 2.0)
    assert r_bps == 0.0 and lat is None


def test_tick_counts_violations():
    col = KpiCollector(CATS)
    # HD: mean latency 0.5 s > 100 ms and 8 kb/s < 1.25 Mb/s -> both violated
    col.record_reception(_pkt(1, 1, "HD", 0.0), 0.5)
    col.tick(0, 1.0, CATS)
    # empty window on the next tick also counts as a latency violation
    col.tick(0, 2.0, CATS)
    assert col.violations_latency["HD"] == 2
    assert col.violations_rate["HD"] == 2


def test_tick_appends_timeseries_rows():
    col = KpiCollector(CATS)
    col.tick(3, 7.0, CATS)
    assert len(col.timeseries) == len(CATS)
    assert col.timeseries[0][:2] == (3, 7.0)


def test_summary_latency_statistics():
    col = KpiCollector(CATS)
    for i, lat in enumerate([0.010, 0.020, 0.030, 0.040]):
        col.record_reception(_pkt(i, 1, "VO", 1.0), 1.0 + lat)
    rep = col.summarize({"episodes": 1, "episode_duration": 250.0}, CATS)
    vo = rep["categories"]["VO"]
    assert vo["mean_latency_s"] == pytest.approx(0.025)
    assert vo["p50_latency_s"] == pytest.approx(0.020)
    assert vo["max_latency_s"] == pytest.approx(0.040)
    assert vo["packets_delivered"] == 4


def test_summary_throughput_normalized_by_sim_time():
    col = KpiCollector(CATS)
    col.record_reception(_pkt(1, 1, "VI", 0.0), 1.0)
    col.end_episode()
    rep = col.summarize({"episodes": 2, "episode_duration": 50.0}, CATS)
    assert rep["categories"]["VI"]["throughput_bps"] == pytest.approx(8000 / 100.0)


def test_end_episode_clears_reward_windows():
    col = KpiCollector(CATS)
    col.record_reception(_pkt(1, 1, "VI", 0.0), 0.5)
    col.end_episode()
    assert col.window_kpis("VI", 0.6) == (0.0, None)
    # but report samples survive episode boundaries
    rep = col.summarize({"episodes": 1, "episode_duration": 1.0}, CATS)
    assert rep["categories"]["VI"]["packets_delivered"] == 1


def test_fairness_counts_silent_vehicles():
    col = KpiCollector(CATS)
    col.note_vehicle(1, "VI")
    col.note_vehicle(2, "VI")
    col.record_reception(_pkt(1, 1, "VI", 0.0), 1.0)
    rep = col.summarize({"episodes": 1, "episode_duration": 1.0}, CATS)
    # vehicle 2 delivered nothing: fairness over [8000, 0] = 0.5
    assert rep["categories"]["VI"]["jain"] == pytest.approx(0.5)
    assert rep["categories"]["VI"]["vehicles"] == 2


def test_conservation_fields_in_totals():
    col = KpiCollector(CATS)
    col.record_generated("HD", 10)
    col.record_drop("HD", 4)
    for i in range(6):
        col.record_reception(_pkt(i, 1, "HD", 0.0), 0.1)
    rep = col.summarize({"episodes": 1, "episode_duration": 1.0}, CATS)
    t = rep["totals"]
    assert t["packets_generated"] == t["packets_delivered"] + t["drops"]


# ---- report comparison -------------------------------------------------

def _report(mode="no-qos", hd_lat=0.5, hd_tput=1e6, **geom):
    meta = {"mode": mode, **GEOMETRY, **geom}
    cats = {}
    for tag in CATS:
        cats[tag] = {"mean_latency_s": hd_lat, "throughput_bps": hd_tput,
                     "jain": 0.9}
    return {"meta": meta, "categories": cats}


def test_compare_refuses_mismatched_geometry():
    with pytest.raises(ComparisonRefused):
        compare_reports(_report(), _report(entry_interval=1.0))


def test_compare_self_is_zero_delta():
    cmp = compare_reports(_report(), _report(mode="edca"))
    hd = cmp["categories"]["HD"]
    assert hd["latency_improvement_pct"] == pytest.approx(0.0)
    assert hd["throughput_delta_pct"] == pytest.approx(0.0)
    assert cmp["mode_a"] == "no-qos" and cmp["mode_b"] == "edca"


def test_compare_latency_improvement_sign():
    # B at 0.4 s vs A at 0.5 s -> B is 20% faster
    cmp = compare_reports(_report(hd_lat=0.5), _report(mode="edca", hd_lat=0.4))
    assert cmp["categories"]["HD"]["latency_improvement_pct"] == pytest.approx(20.0)


def test_compare_handles_missing_samples():
    a, b = _report(), _report(mode="edca")
    b["categories"]["HD"]["mean_latency_s"] = None
    cmp = compare_reports(a, b)
    assert cmp["categories"]["HD"]["latency_improvement_pct"] is None
