"""Deterministic discrete-event engine: clock, event queue, named RNG substreams."""

import hashlib
import heapq
import random


class TemporalOrderError(Exception):
    """Raised when an event is scheduled in the past."""


class EventHandle:
    """Allows cancellation of a scheduled event."""

    __slots__ = ("time", "seq", "cancelled")

    def __init__(self, time, seq):
        self.time = time
        self.seq = seq
        self.cancelled = False

    def cancel(self):
        self.cancelled = True


def _stream_seed(master_seed: int, label: str) -> int:
    # Stable label -> seed derivation, independent of platform hash randomization.
    digest = hashlib.sha256(f"{master_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class RngStream(random.Random):
    """Named substream: identical (label, seed) pairs yield identical sequences."""

    def __new__(cls, label: str, master_seed: int):
        return super().__new__(cls)

    def __init__(self, label: str, master_seed: int):
        super().__init__(_stream_seed(master_seed, label))
        self.label = label
        self.master_seed = master_seed


class Engine:
    """Single-threaded event loop with deterministic (time, insertion-seq) ordering."""

    def __init__(self, master_seed: int = 0):
        self.now = 0.0
        self.master_seed = master_seed
        self._heap = []
        self._seq = 0
        self._streams = {}
        self.events_dispatched = 0

    def rng_stream(self, label: str) -> RngStream:
        """Return the unique stream for `label`; repeated calls continue its state."""
        stream = self._streams.get(label)
        if stream is None:
            stream = RngStream(label, self.master_seed)
            self._streams[label] = stream
        return stream

    def schedule(self, at: float, fn, *args) -> EventHandle:
        if at < self.now:
            raise TemporalOrderError(
                f"cannot schedule at t={at} (now={self.now})"
            )
        handle = EventHandle(at, self._seq)
        heapq.heappush(self._heap, (at, self._seq, handle, fn, args))
        self._seq += 1
        return handle

    def run_until(self, t_end: float) -> int:
        """Dispatch events with time < t_end; leave the clock at t_end.

        Returns the number of events dispatched by this call.
        """
        dispatched = 0
        heap = self._heap
        while heap and heap[0][0] < t_end:
            at, _, handle, fn, args = heapq.heappop(heap)
            if handle.cancelled:
                continue
            self.now = at
            fn(*args)
            dispatched += 1
        self.now = t_end
        self.events_dispatched += dispatched
        return dispatched
