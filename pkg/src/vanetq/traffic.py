"""Service categories, CBR data generation, and the waiting-time transmission gate."""

import math
from dataclasses import dataclass, field, replace
from typing import Optional


@dataclass(frozen=True)
class Category:
    tag: str
    index: int                # position in the discrete state component
    source_rate: float        # bits/s offered by one vehicle
    packet_size: int          # bits
    max_latency: float        # seconds, delay threshold
    min_rate: float           # bits/s, data-rate threshold
    max_wait: float           # seconds, largest assignable waiting time
    penalty: float            # magnitude applied per violated condition
    bonus: float = 2.0        # magnitude applied per satisfied condition


def default_categories():
    """Table of the four service categories with their thresholds."""
    return {
        "VO": Category("VO", 0, 100e3, 1_600, 0.150, 100e3, 0.92, -2.0),
        "VI": Category("VI", 1, 5e6, 8_000, 0.100, 1.25e6, 2.0, -2.0),
        "BE": Category("BE", 2, 28e6, 8_000, 1.000, 1.0e6, 8.0, -10.0),
        "HD": Category("HD", 3, 4e6, 8_000, 0.100, 1.25e6, 2.0, -2.0),
    }


#: Panel/report ordering used everywhere user-facing.
CATEGORY_ORDER = ("VO", "VI", "HD", "BE")


class WaitingTimeViolation(Exception):
    """Assigned waiting time exceeds the category maximum."""


@dataclass
class Packet:
    id: int
    vehicle_id: int
    category: str
    size: int
    generated_at: float
    received_at: Optional[float] = None
    dropped: bool = False

    @property
    def latency(self) -> Optional[float]:
        if self.received_at is None:
            return None
        return self.received_at - self.generated_at


def assign_category(rng, categories=None) -> Category:
    """Uniform draw over the category set; fixed for the vehicle's lifetime."""
    categories = categories or default_categories()
    tag = ("VO", "VI", "BE", "HD")[rng.randrange(4)]
    return categories[tag]


def generate(category: Category, interval: float, carry_bits: float = 0.0):
    """Constant-bit-rate packet count for `interval`, with fractional carry.

    Returns (packet_count, new_carry_bits).
    """
    if interval <= 0:
        raise ValueError("interval must be positive")
    bits = carry_bits + category.source_rate * interval
    count = int(bits // category.packet_size)
    return count, bits - count * category.packet_size


class CbrSource:
    """Lazy CBR stream: packet k completes accumulation at a computable time."""

    __slots__ = ("start", "rate", "size", "interarrival")

    def __init__(self, start: float, category: Category):
        self.start = start
        self.rate = category.source_rate
        self.size = category.packet_size
        self.interarrival = category.packet_size / category.source_rate

    def count_until(self, t: float) -> int:
        """Packets fully generated in (start, t].

        Consistent with gen_time for any magnitude of t: the naive division
        loses precision once (t - start) cancellation error exceeds one
        interarrival fraction, so the estimate is corrected against gen_time
        with a tolerance that scales with t. Guarantees
        count_until(gen_time(k)) >= k + 1, which schedulers rely on to make
        progress.
        """
        if t <= self.start:
            return 0
        tol = 1e-9 + 1e-12 * abs(t)
        n = int(math.floor((t - self.start) / self.interarrival + 1e-9))
        while self.gen_time(n) <= t + tol:
            n += 1
        while n > 0 and self.gen_time(n - 1) > t + tol:
            n -= 1
        return n

    def gen_time(self, k: int) -> float:
        """Generation (completion) time of 0-based packet k."""
        return self.start + (k + 1) * self.interarrival


@dataclass
class TransmissionGate:
    """Application-layer gate: while closed the MAC receives nothing."""

    vehicle_id: int
    waiting_until: float = 0.0

    def is_open(self, now: float) -> bool:
        return now >= self.waiting_until


def apply_waiting_time(gate: TransmissionGate, w: float, now: float,
                       category: Category) -> TransmissionGate:
    if w < 0:
        raise WaitingTimeViolation(f"negative waiting time {w}")
    if w > category.max_wait + 1e-12:
        raise WaitingTimeViolation(
            f"w={w}s exceeds max_wait={category.max_wait}s for {category.tag}"
        )
    gate.waiting_until = now + w
    return gate
