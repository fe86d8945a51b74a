import math

import pytest
from hypothesis import given, strategies as st

from vanetq.engine import RngStream
from vanetq.traffic import (CbrSource, TransmissionGate, WaitingTimeViolation,
                            apply_waiting_time, assign_category,
                            default_categories, generate)

CATS = default_categories()


def test_default_thresholds():
    assert CATS["VO"].source_rate == 100e3
    assert CATS["VI"].source_rate == 5e6
    assert CATS["HD"].source_rate == 4e6
    assert CATS["BE"].source_rate == 28e6
    assert CATS["VO"].max_latency == 0.150
    assert CATS["BE"].max_latency == 1.000
    assert CATS["VI"].min_rate == 1.25e6
    assert CATS["BE"].min_rate == 1.0e6
    assert [CATS[t].max_wait for t in ("VO", "VI", "HD", "BE")] == [0.92, 2.0, 2.0, 8.0]
    assert CATS["BE"].penalty == -10.0
    assert all(CATS[t].penalty == -2.0 for t in ("VO", "VI", "HD"))
    assert all(CATS[t].bonus == 2.0 for t in CATS)


def test_assign_category_uniform():
    rng = RngStream("traffic", 5)
    counts = {"VO": 0, "VI": 0, "BE": 0, "HD": 0}
    n = 10_000
    for _ in range(n):
        counts[assign_category(rng, CATS).tag] += 1
    # binomial oracle: mean 2500, sd = sqrt(n*p*(1-p)) ~ 43.3; 4 sd band
    sd = math.sqrt(n * 0.25 * 0.75)
    for tag, c in counts.items():
        assert abs(c - 2500) < 4 * sd, (tag, c)


def test_assign_category_reproducible():
    draws1 = [assign_category(RngStream("traffic", 9), CATS).tag]
    draws2 = [assign_category(RngStream("traffic", 9), CATS).tag]
    assert draws1 == draws2


def test_generate_hd_rate_arithmetic():
    n, carry = generate(CATS["HD"], 1.0)
    assert n == 500
    assert carry == pytest.approx(0.0, abs=1e-6)


def test_generate_vo_with_carry():
    n, carry = generate(CATS["VO"], 1.0)
    assert n == 62
    assert carry == pytest.approx(100e3 - 62 * 1600)
    n2, _ = generate(CATS["VO"], 1.0, carry)
    assert n2 == 63  # the carried fraction completes an extra packet


@given(st.sampled_from(list(CATS)), st.floats(0.01, 20.0))
def test_generate_bits_within_one_packet(tag, interval):
    cat = CATS[tag]
    n, carry = generate(cat, interval)
    bits = n * cat.packet_size
    assert 0 <= cat.source_rate * interval - bits < cat.packet_size + 1e-6


def test_cbr_source_count_and_times():
    src = CbrSource(10.0, CATS["HD"])  # 500 pkt/s
    assert src.count_until(10.0) == 0
    assert src.count_until(11.0) == 500
    assert src.gen_time(0) == pytest.approx(10.002)
    assert src.gen_time(499) == pytest.approx(11.0)


def test_gate_zero_wait_opens_immediately():
    gate = TransmissionGate(1)
    apply_waiting_time(gate, 0.0, 5.0, CATS["HD"])
    assert gate.is_open(5.0)


def test_gate_closed_interval():
    gate = TransmissionGate(1)
    apply_waiting_time(gate, 2.0, 10.0, CATS["HD"])
    assert not gate.is_open(10.0)
    assert not gate.is_open(11.999)
    assert gate.is_open(12.0)


def test_gate_rejects_excess_wait():
    gate = TransmissionGate(1)
    with pytest.raises(WaitingTimeViolation):
        apply_waiting_time(gate, 9.0, 0.0, CATS["BE"])  # w_max(BE) = 8
    with pytest.raises(WaitingTimeViolation):
        apply_waiting_time(gate, -0.1, 0.0, CATS["BE"])
