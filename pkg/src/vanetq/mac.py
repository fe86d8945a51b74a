"""Slotted CSMA/CA shared channel with per-access-category contention.

Contention is resolved in rounds: every head-of-line contender waits
AIFS + backoff idle slots; the minimum-wait station(s) transmit. One
transmitter is a success, two or more a collision (CW doubling, capped).
Each round ends with one busy period, so the event count scales with the
number of transmissions, not with slots.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .traffic import CbrSource, Packet


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class AcParams:
    name: str
    aifsn: int
    cw_min: int
    cw_max: int


# Relative ordering mirrors 802.11p OCB defaults; values are configuration,
# not measurement. BE shares VI's AIFSN and is deprioritized through its
# contention window alone: with a strictly larger AIFSN a backlogged VO
# station (worst wait 2+3 slots) would always pre-empt BE's best wait and
# starve it completely, leaving its latency statistics to a handful of
# warm-up packets.
EDCA_PARAMS = {
    "VO": AcParams("VO", 2, 3, 7),
    "VI": AcParams("VI", 3, 3, 7),
    "BE": AcParams("BE", 3, 15, 1023),
    "BK": AcParams("BK", 9, 15, 1023),
}
HD_AC_PARAMS = AcParams("HD", 4, 7, 15)
SINGLE_AC = AcParams("ALL", 2, 15, 1023)

PRESETS = {
    "p-5.9GHz-10MHz": {"phy_rate": 6e6, "slot_time": 13e-6},
    "ac-preset": {"phy_rate": 54e6, "slot_time": 9e-6},
}

MODES = ("no-qos", "edca", "edca-hd", "agent-no-qos", "agent-edca")


@dataclass
class ChannelConfig:
    mode: str
    ac_params: Dict[str, AcParams]
    cat_to_ac: Dict[str, str]
    slot_time: float
    phy_rate: float
    retry_limit: int = 7
    queue_capacity: int = 2
    bandwidth_preset: str = "p-5.9GHz-10MHz"

    @property
    def agent_enabled(self) -> bool:
        return self.mode.startswith("agent")


def configure_mode(mode: str, preset: str = "p-5.9GHz-10MHz",
                   retry_limit: int = 7, queue_capacity: int = 2) -> ChannelConfig:
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    if preset not in PRESETS:
        raise ConfigError(f"unknown bandwidth preset {preset!r}")
    base = mode.replace("agent-", "")
    if base == "no-qos":
        acs = {"ALL": SINGLE_AC}
        cat_to_ac = {c: "ALL" for c in ("VO", "VI", "BE", "HD")}
    elif base == "edca":
        acs = dict(EDCA_PARAMS)
        cat_to_ac = {"VO": "VO", "VI": "VI", "BE": "BE", "HD": "BE"}
    else:  # edca-hd: dedicated HD queue between VI and BE priority
        acs = dict(EDCA_PARAMS)
        acs["HD"] = HD_AC_PARAMS
        cat_to_ac = {"VO": "VO", "VI": "VI", "BE": "BE", "HD": "HD"}
    phy = PRESETS[preset]
    return ChannelConfig(mode=mode, ac_params=acs, cat_to_ac=cat_to_ac,
                         slot_time=phy["slot_time"], phy_rate=phy["phy_rate"],
                         retry_limit=retry_limit, queue_capacity=queue_capacity,
                         bandwidth_preset=preset)


@dataclass
class _Contender:
    vid: int
    ac: AcParams
    category: str
    source: Optional[CbrSource] = None
    continuous: bool = False      # baseline: queue refills straight from the source
    queue: deque = field(default_factory=deque)
    next_seq: int = 0             # first source packet not yet admitted or dropped
    cw: int = 0
    bo: int = 0
    retries: int = 0
    pos: int = -1                 # index into the active arrays, -1 if inactive


class Channel:
    """One shared medium per simulation run."""

    def __init__(self, config: ChannelConfig, engine, rng,
                 in_coverage=None, on_packet_done=None, on_queue_empty=None,
                 log=None):
        self.config = config
        self.engine = engine
        self.rng = rng
        self.in_coverage = in_coverage or (lambda vid, t: True)
        self.on_packet_done = on_packet_done or (lambda pkt, status: None)
        self.on_queue_empty = on_queue_empty or (lambda vid, t: None)
        self.log = log
        self.contenders: Dict[int, _Contender] = {}
        self._packet_counter = 0
        # Structure-of-arrays over currently active (backlogged) contenders.
        self._vids = []
        self._aifsn = np.empty(0, dtype=np.int64)
        self._bo = np.empty(0, dtype=np.int64)
        self._round_pending = False
        # Aggregate counters.
        self.delivered = 0
        self.dropped_retry = 0
        self.dropped_coverage = 0
        self.dropped_overflow = 0
        self.dropped_overflow_by_cat = {}
        self.collisions = 0
        self.tx_attempts = 0
        self.busy_time = 0.0

    # ---- membership ----------------------------------------------------

    def add_contender(self, vid: int, category: str, source: CbrSource,
                      continuous: bool) -> None:
        ac = self.config.ac_params[self.config.cat_to_ac[category]]
        self.contenders[vid] = _Contender(vid=vid, ac=ac, category=category,
                                          source=source, continuous=continuous)
        if continuous:
            self._wake_or_sleep(self.contenders[vid])

    def remove_contender(self, vid: int):
        """Drop the vehicle; returns (queued, unseen) packet counts left behind."""
        c = self.contenders.pop(vid, None)
        if c is None:
            return 0, 0
        if c.pos >= 0:
            self._array_remove(c)
        queued = len(c.queue)
        unseen = max(0, c.source.count_until(self.engine.now) - c.next_seq)
        return queued, unseen

    # ---- queueing ------------------------------------------------------

    def _make_packet(self, c: _Contender, seq: int) -> Packet:
        self._packet_counter += 1
        return Packet(id=self._packet_counter, vehicle_id=c.vid,
                      category=c.category, size=c.source.size,
                      generated_at=c.source.gen_time(seq))

    def _admit(self, c: _Contender, upto_seq: int) -> int:
        """Admit source packets below `upto_seq`, drop-tail at queue capacity."""
        pending = upto_seq - c.next_seq
        if pending <= 0:
            return 0
        room = self.config.queue_capacity - len(c.queue)
        take = min(pending, room)
        for k in range(c.next_seq, c.next_seq + take):
            c.queue.append(self._make_packet(c, k))
        dropped = pending - take
        c.next_seq = upto_seq
        if dropped:
            self.dropped_overflow += dropped
            self.dropped_overflow_by_cat[c.category] = (
                self.dropped_overflow_by_cat.get(c.category, 0) + dropped)
        return dropped

    def drain(self, vid: int, upto_time: float) -> int:
        """Hand all packets generated up to `upto_time` to the MAC (gated mode).

        Returns the overflow drop count. Activates the contender if the queue
        became non-empty.
        """
        c = self.contenders[vid]
        dropped = self._admit(c, c.source.count_until(upto_time))
        if c.queue and c.pos < 0:
            self._activate(c)
        return dropped

    def _wake_or_sleep(self, c: _Contender):
        """Baseline path: refill from the source or schedule the next arrival."""
        now = self.engine.now
        self._admit(c, c.source.count_until(now))
        if c.queue:
            if c.pos < 0:
                self._activate(c)
        else:
            at = c.source.gen_time(c.next_seq)
            self.engine.schedule(max(at, now), self._wake, c.vid)

    def _wake(self, vid: int):
        c = self.contenders.get(vid)
        if c is not None and c.pos < 0:
            self._wake_or_sleep(c)

    # ---- active-set arrays ---------------------------------------------

    def _activate(self, c: _Contender):
        c.cw = c.ac.cw_min
        c.bo = self.rng.randint(0, c.cw)
        c.retries = 0
        c.pos = len(self._vids)
        self._vids.append(c.vid)
        self._aifsn = np.append(self._aifsn, c.ac.aifsn)
        self._bo = np.append(self._bo, c.bo)
        if not self._round_pending:
            self._start_round()

    def _array_remove(self, c: _Contender):
        i = c.pos
        last = len(self._vids) - 1
        if i != last:
            moved_vid = self._vids[last]
            self._vids[i] = moved_vid
            self._aifsn[i] = self._aifsn[last]
            self._bo[i] = self._bo[last]
            self.contenders[moved_vid].pos = i
        self._vids.pop()
        self._aifsn = self._aifsn[:last]
        self._bo = self._bo[:last]
        c.pos = -1

    def _deactivate(self, c: _Contender):
        self._array_remove(c)
        if c.continuous:
            self._wake_or_sleep(c)
        else:
            self.on_queue_empty(c.vid, self.engine.now)

    # ---- contention rounds ---------------------------------------------

    def _start_round(self):
        if self._round_pending or not self._vids:
            return
        waits = self._aifsn + self._bo
        m = int(waits.min())
        winner_idx = np.nonzero(waits == m)[0]
        winners = [self._vids[i] for i in winner_idx]
        # Losers count down the idle slots they observed past their own AIFS.
        self._bo -= np.maximum(0, m - self._aifsn)
        for i in winner_idx:
            self._bo[i] = 0
        t_busy = self.engine.now + m * self.config.slot_time
        airtime = max(self.contenders[v].queue[0].size for v in winners) / self.config.phy_rate
        t_end = t_busy + airtime
        self._round_pending = True
        self.tx_attempts += len(winners)
        self.busy_time += airtime
        if self.log is not None:
            for v in winners:
                self.log(t_busy, "tx_start", v, self.contenders[v].ac.name,
                         self.contenders[v].queue[0].id)
        self.engine.schedule(t_end, self._end_round, winners)

    def _end_round(self, winners):
        self._round_pending = False
        now = self.engine.now
        live = [self.contenders[v] for v in winners if v in self.contenders]
        if len(live) == 1:
            c = live[0]
            pkt = c.queue.popleft()
            if self.in_coverage(c.vid, now):
                pkt.received_at = now
                self.delivered += 1
                self.on_packet_done(pkt, "delivered")
                if self.log is not None:
                    self.log(now, "tx_success", c.vid, c.ac.name, pkt.id)
            else:
                pkt.dropped = True
                self.dropped_coverage += 1
                self.on_packet_done(pkt, "drop_coverage")
                if self.log is not None:
                    self.log(now, "drop", c.vid, c.ac.name, pkt.id)
            c.cw = c.ac.cw_min
            c.retries = 0
            self._after_service(c)
        else:
            self.collisions += 1
            for c in live:
                if self.log is not None:
                    self.log(now, "collision", c.vid, c.ac.name, c.queue[0].id)
                c.retries += 1
                if c.retries > self.config.retry_limit:
                    pkt = c.queue.popleft()
                    pkt.dropped = True
                    self.dropped_retry += 1
                    self.on_packet_done(pkt, "drop_retry")
                    if self.log is not None:
                        self.log(now, "drop", c.vid, c.ac.name, pkt.id)
                    c.cw = c.ac.cw_min
                    c.retries = 0
                    self._after_service(c)
                else:
                    c.cw = min(2 * c.cw + 1, c.ac.cw_max)
                    c.bo = self.rng.randint(0, c.cw)
                    self._bo[c.pos] = c.bo
        self._start_round()

    def _after_service(self, c: _Contender):
        if c.continuous:
            self._admit(c, c.source.count_until(self.engine.now))
        if c.queue:
            c.bo = self.rng.randint(0, c.cw)
            self._bo[c.pos] = c.bo
        else:
            self._deactivate(c)
