"""Scenario orchestration: wires vehicles, channel, agent, and KPIs per episode."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from . import agent as agent_mod
from .config import ScenarioConfig
from .engine import Engine
from .mac import Channel, configure_mode
from .metrics import KpiCollector
from .mobility import Tile, position_at, random_trajectory, sojourn_time
from .traffic import CbrSource, TransmissionGate, apply_waiting_time


@dataclass
class _Vehicle:
    vid: int
    category: object
    trajectory: object
    source: CbrSource
    gate: TransmissionGate
    exit_handle: object = None
    drain_handle: object = None


@dataclass
class EpisodeSummary:
    episode: int
    events: int
    spawned: int
    delivered: int
    decisions: int


@dataclass
class SimulationResult:
    report: dict
    packet_rows: List[tuple]
    mac_rows: List[tuple]
    decision_rows: List[tuple]
    trace_rows: List[tuple]
    episode_summaries: List[EpisodeSummary]
    qtable: Optional[agent_mod.QTable]


class Simulation:
    """One fully isolated simulation run (all episodes, one seed, one mode)."""

    def __init__(self, config: ScenarioConfig, qtable=None):
        self.config = config.validate()
        self.categories = config.categories()
        self.tile = Tile(config.tile_width, config.tile_height)
        self.engine = Engine(config.master_seed)
        self.channel_config = configure_mode(
            config.mode, config.bandwidth_preset,
            retry_limit=config.retry_limit,
            queue_capacity=config.queue_capacity)
        self.agent_mode = self.channel_config.agent_enabled
        self.channel = Channel(
            self.channel_config, self.engine, self.engine.rng_stream("mac"),
            in_coverage=self._in_coverage,
            on_packet_done=self._on_packet_done,
            on_queue_empty=self._on_queue_empty,
            log=None)
        self.collector = KpiCollector(self.categories)
        self.controller = None
        if self.agent_mode:
            params = config.reward
            table = qtable if qtable is not None else agent_mod.QTable()
            self.controller = agent_mod.QLearningController(
                table, params, self.engine.rng_stream("agent"), self.categories)
            self.controller.registry.ttl = config.registry_ttl
        self.vehicles: Dict[int, _Vehicle] = {}
        self._next_vid = 0
        self._episode = 0
        self._log_this_episode = False
        self.packet_rows: List[tuple] = []
        self.mac_rows: List[tuple] = []
        self.decision_rows: List[tuple] = []
        self.trace_rows: List[tuple] = []
        self.episode_summaries: List[EpisodeSummary] = []

    # ---- callbacks from the channel ------------------------------------

    def _in_coverage(self, vid, t):
        veh = self.vehicles.get(vid)
        if veh is None:
            return False
        kin = position_at(veh.trajectory, min(t, veh.trajectory.exit_time),
                          self.tile)
        return kin.distance_to_rsu <= self.config.coverage_diameter / 2.0

    def _on_packet_done(self, pkt, status):
        now = self.engine.now
        if status == "delivered":
            self.collector.record_reception(pkt, now)
            if self.controller is not None:
                self.controller.registry.register_packet(pkt.vehicle_id,
                                                         pkt.category)
        else:
            self.collector.record_drop(pkt.category)
        if self._log_this_episode:
            rx = f"{now:.6f}" if status == "delivered" else ""
            self.packet_rows.append(
                (pkt.id, pkt.vehicle_id, pkt.category, pkt.size,
                 f"{pkt.generated_at:.6f}", rx, 0 if status == "delivered" else 1))

    def _on_queue_empty(self, vid, t):
        # Deferred so the decision never reenters the channel mid-round.
        if self.agent_mode and vid in self.vehicles:
            self.engine.schedule(t, self._decision, vid)

    def _mac_log(self, t, event, vid, ac, pkt_id):
        if self._log_this_episode:
            self.mac_rows.append((f"{t:.6f}", event, vid, ac, pkt_id))

    # ---- vehicle lifecycle ---------------------------------------------

    def _spawn(self, entry_time=None):
        now = self.engine.now
        rng_mob = self.engine.rng_stream("mobility")
        rng_traffic = self.engine.rng_stream("traffic")
        traj = random_trajectory(rng_mob, self.tile,
                                 now if entry_time is None else entry_time,
                                 self.config.speed_min, self.config.speed_max)
        tag = ("VO", "VI", "BE", "HD")[rng_traffic.randrange(4)]
        if traj.exit_time <= now:
            return      # pre-episode entrant that has already left the tile
        vid = self._next_vid
        self._next_vid += 1
        cat = self.categories[tag]
        source = CbrSource(now, cat)
        veh = _Vehicle(vid, cat, traj, source, TransmissionGate(vid))
        self.vehicles[vid] = veh
        self.collector.note_vehicle(vid, tag)
        self.channel.add_contender(vid, tag, source,
                                   continuous=not self.agent_mode)
        ep_end = (self._episode + 1) * self.config.episode_duration
        if traj.exit_time < ep_end:
            veh.exit_handle = self.engine.schedule(traj.exit_time,
                                                   self._exit, vid)
        if self.agent_mode:
            self._decision(vid)

    def _sojourn_of(self, veh, t):
        kin = position_at(veh.trajectory, min(t, veh.trajectory.exit_time),
                          self.tile)
        return sojourn_time(kin, self.config.coverage_diameter,
                            self.tile.rsu_position,
                            self.config.stationary_sojourn_cap)

    def _decision(self, vid):
        veh = self.vehicles.get(vid)
        if veh is None:
            return
        now = self.engine.now
        sj = self._sojourn_of(veh, now)
        window = self.collector.window_kpis(veh.category.tag, now)
        w, reward, state, action = self.controller.decide(
            vid, veh.category, sj, now, window)
        apply_waiting_time(veh.gate, w, now, veh.category)
        veh.drain_handle = self.engine.schedule(now + w, self._drain, vid)
        if self._log_this_episode:
            self.decision_rows.append(
                (f"{now:.6f}", vid, state.sj, state.tv, veh.category.tag,
                 state.tcv, action, f"{w:.6f}",
                 "" if reward is None else f"{reward:.9f}"))

    def _drain(self, vid):
        veh = self.vehicles.get(vid)
        if veh is None:
            return
        now = self.engine.now
        self.channel.drain(vid, now)  # overflow tallied by the channel
        contender = self.channel.contenders[vid]
        if not contender.queue:
            # Nothing generated yet: retry the drain at the next arrival.
            at = veh.source.gen_time(contender.next_seq)
            veh.drain_handle = self.engine.schedule(max(at, now),
                                                    self._drain, vid)

    def _prefill(self):
        """Populate the tile as a road that existed before the episode.

        Replays the stationary entry process backwards: entrants at
        now - k * entry_interval whose trajectories have not yet exited are
        spawned mid-route. Without this, every episode opens on an empty
        channel and the transient dominates the latency statistics of
        low-priority categories.
        """
        cfg = self.config
        horizon = (math.hypot(cfg.tile_width, cfg.tile_height) / cfg.speed_min
                   + cfg.speed_max / 2.6 + cfg.speed_max / 4.5)
        k = 1
        while k * cfg.entry_interval <= horizon:
            self._spawn(entry_time=self.engine.now - k * cfg.entry_interval)
            k += 1

    def _exit(self, vid):
        self._retire(vid, self.engine.now)

    def _retire(self, vid, t):
        veh = self.vehicles.pop(vid, None)
        if veh is None:
            return
        for handle in (veh.exit_handle, veh.drain_handle):
            if handle is not None:
                handle.cancel()
        queued, unseen = self.channel.remove_contender(vid)
        tag = veh.category.tag
        self.collector.record_generated(tag, veh.source.count_until(t))
        if queued or unseen:
            self.collector.record_drop(tag, queued + unseen)
        if self.controller is not None:
            self.controller.forget(vid)

    # ---- episode loop --------------------------------------------------

    def _tick(self, episode, t):
        if self.controller is not None:
            self.controller.registry.tick()
        self.collector.tick(episode, t, self.categories)
        if self.config.write_trace and self._log_this_episode:
            for vid, veh in self.vehicles.items():
                kin = position_at(veh.trajectory,
                                  min(t, veh.trajectory.exit_time), self.tile)
                self.trace_rows.append(
                    (vid, f"{t:.6f}", f"{kin.position[0]:.3f}",
                     f"{kin.position[1]:.3f}", f"{kin.speed:.3f}"))

    def run_episode(self, episode: int) -> EpisodeSummary:
        self._episode = episode
        cfg = self.config
        self._log_this_episode = cfg.write_logs and (
            not cfg.train or episode == cfg.episodes - 1)
        self.channel.log = self._mac_log if (self._log_this_episode and
                                             cfg.write_mac_log) else None
        ep_start = episode * cfg.episode_duration
        ep_end = ep_start + cfg.episode_duration
        spawned_before = self._next_vid
        delivered_before = self.channel.delivered
        decisions_before = (self.controller.decisions
                            if self.controller else 0)
        self._prefill()
        n_spawns = math.floor(cfg.episode_duration / cfg.entry_interval)
        for k in range(1, n_spawns + 1):
            self.engine.schedule(ep_start + k * cfg.entry_interval, self._spawn)
        for i in range(1, int(math.floor(cfg.episode_duration)) + 1):
            self.engine.schedule(ep_start + i, self._tick, episode, ep_start + i)
        dispatched = self.engine.run_until(ep_end)
        for vid in list(self.vehicles):
            self._retire(vid, ep_end)
        if self.controller is not None:
            self.controller.reset_episode()
        self.collector.end_episode()
        summary = EpisodeSummary(
            episode=episode,
            events=dispatched,
            spawned=self._next_vid - spawned_before,
            delivered=self.channel.delivered - delivered_before,
            decisions=(self.controller.decisions - decisions_before
                       if self.controller else 0),
        )
        self.episode_summaries.append(summary)
        return summary

    def run(self, version: str = "0") -> SimulationResult:
        for episode in range(self.config.episodes):
            self.run_episode(episode)
        ch = self.channel
        for tag, n in sorted(ch.dropped_overflow_by_cat.items()):
            self.collector.record_drop(tag, n)
        meta = dict(self.config.echo())
        # Transient I/O settings are not part of the reproducible identity.
        for transient in ("output_dir", "write_logs", "write_mac_log",
                          "write_trace"):
            meta.pop(transient, None)
        meta["version"] = version
        meta["config_hash"] = self.config.config_hash()
        meta["mac_counters"] = {
            "delivered": ch.delivered,
            "collisions": ch.collisions,
            "tx_attempts": ch.tx_attempts,
            "dropped_retry": ch.dropped_retry,
            "dropped_coverage": ch.dropped_coverage,
            "dropped_overflow": ch.dropped_overflow,
            "busy_time_s": round(ch.busy_time, 6),
        }
        report = self.collector.summarize(meta, self.categories)
        return SimulationResult(
            report=report,
            packet_rows=self.packet_rows,
            mac_rows=self.mac_rows,
            decision_rows=self.decision_rows,
            trace_rows=self.trace_rows,
            episode_summaries=self.episode_summaries,
            qtable=self.controller.qtable if self.controller else None,
        )
