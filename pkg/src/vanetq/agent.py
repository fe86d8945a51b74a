"""Centralized RSU controller: active-user registry, tabular Q-learning,
action-to-waiting-time mapping, and the utility-based reward."""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .mobility import sojourn_bucket
from .traffic import Category

N_ACTIONS = 8
REGISTRY_TTL = 10  # seconds of silence before a vehicle is considered inactive


class UnknownVehicle(KeyError):
    pass


class ActiveUserRegistry:
    """Tracks vehicles the RSU has recently heard from, with per-second decay."""

    def __init__(self, ttl: int = REGISTRY_TTL):
        self.ttl = ttl
        self._entries: Dict[int, list] = {}  # vid -> [category_tag, remaining]

    def register_packet(self, vehicle_id: int, category: str) -> None:
        entry = self._entries.get(vehicle_id)
        if entry is None:
            self._entries[vehicle_id] = [category, self.ttl]
        else:
            entry[1] = self.ttl

    def tick(self) -> None:
        """1 Hz decay; entries reaching zero are removed."""
        dead = []
        for vid, entry in self._entries.items():
            entry[1] -= 1
            if entry[1] <= 0:
                dead.append(vid)
        for vid in dead:
            del self._entries[vid]

    def __contains__(self, vehicle_id: int) -> bool:
        return vehicle_id in self._entries

    def category_of(self, vehicle_id: int) -> str:
        try:
            return self._entries[vehicle_id][0]
        except KeyError:
            raise UnknownVehicle(vehicle_id)

    def total_active(self) -> int:
        return len(self._entries)

    def active_in_category(self, category: str) -> int:
        return sum(1 for cat, _ in self._entries.values() if cat == category)

    def clear(self) -> None:
        self._entries.clear()


@dataclass(frozen=True)
class AgentState:
    sj: int    # discrete sojourn bucket, 0..4
    tv: int    # total active vehicles (clamped)
    c: int     # category index
    tcv: int   # active vehicles in this category (clamped)


@dataclass
class RewardParams:
    alpha1: float = 0.3
    alpha2: float = 0.7
    gamma: float = 0.99
    learning_rate: float = 0.1
    epsilon: float = 0.2
    penalties_enabled: bool = True
    be_bonus_enabled: bool = True
    # Clamp for the tv/tcv state components. At the default vehicle density
    # the raw counts hover in a narrow band and carry almost no information,
    # while multiplying the table size ~4000-fold; clamping to 1 collapses
    # the state to (sojourn bucket, category), which is what lets the table
    # accumulate enough visits per action to separate their values.
    n_max: int = 1

    def validate(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon {self.epsilon} outside [0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma {self.gamma} outside [0, 1)")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate {self.learning_rate} outside (0, 1]")
        return self


class QTable:
    """Sparse map (state, action) -> expected utility; unvisited reads as 0."""

    def __init__(self, n_actions: int = N_ACTIONS):
        self.n_actions = n_actions
        self.q: Dict[Tuple[AgentState, int], float] = {}
        self.visits: Dict[Tuple[AgentState, int], int] = {}

    def value(self, state: AgentState, action: int) -> float:
        return self.q.get((state, action), 0.0)

    def row(self, state: AgentState):
        return [self.value(state, a) for a in range(self.n_actions)]

    def best_action(self, state: AgentState) -> int:
        row = self.row(state)
        best = max(row)
        return row.index(best)  # ties resolve to the lowest action index

    def max_value(self, state: AgentState) -> float:
        return max(self.row(state))

    def update(self, state: AgentState, action: int, value: float) -> None:
        self.q[(state, action)] = value
        key = (state, action)
        self.visits[key] = self.visits.get(key, 0) + 1


def observe(vehicle_id: int, kinematics_sojourn: float,
            registry: ActiveUserRegistry, category: Category,
            n_max: int = 64) -> AgentState:
    """Assemble the discrete state for one vehicle."""
    if vehicle_id not in registry:
        raise UnknownVehicle(vehicle_id)
    return AgentState(
        sj=sojourn_bucket(kinematics_sojourn),
        tv=min(registry.total_active(), n_max),
        c=category.index,
        tcv=min(registry.active_in_category(category.tag), n_max),
    )


def choose_action(state: AgentState, qtable: QTable, params: RewardParams,
                  rng) -> int:
    if rng.random() < params.epsilon:
        return rng.randrange(qtable.n_actions)
    return qtable.best_action(state)


def map_action(action_index: int, category: Category,
               n_actions: int = N_ACTIONS) -> float:
    """Waiting time w = a * (w_max(c) / |A|)."""
    if not 0 <= action_index < n_actions:
        raise ValueError(f"action index {action_index} outside [0, {n_actions})")
    return action_index * (category.max_wait / n_actions)


def compute_reward(category: Category, throughput_bps: float,
                   mean_latency_s: Optional[float],
                   params: RewardParams) -> float:
    """Utility U = a1*R/Rmax - a2*L/Lmax plus per-condition penalties/bonuses.

    R_max is the category source rate, normalizing throughput under CBR load.
    An empty measurement window (no latency samples) contributes no latency
    term and counts as exceeding the latency threshold.

    BE's conditions are deliberately inverted relative to VO/VI/HD: it is
    penalized while performing well and rewarded while suppressed, which is
    what lets the controller starve best-effort traffic in favor of the rest.
    """
    r_max = category.source_rate
    l_max = category.max_latency
    if r_max <= 0 or l_max <= 0:
        raise ValueError(f"non-positive thresholds for category {category.tag}")
    u = params.alpha1 * throughput_bps / r_max
    if mean_latency_s is not None:
        u -= params.alpha2 * mean_latency_s / l_max
    if not params.penalties_enabled:
        return u
    if category.tag == "BE":
        if mean_latency_s is not None and mean_latency_s < l_max:
            u += category.penalty
        if throughput_bps > category.min_rate:
            u += category.penalty
        if params.be_bonus_enabled:
            if mean_latency_s is None or mean_latency_s >= l_max:
                u += category.bonus
            if throughput_bps <= category.min_rate:
                u += category.bonus
    else:
        if mean_latency_s is None or mean_latency_s > l_max:
            u += category.penalty
        else:
            u += category.bonus
        if throughput_bps < category.min_rate:
            u += category.penalty
        else:
            u += category.bonus
    return u


def q_update(qtable: QTable, state: AgentState, action: int, reward: float,
             next_state: Optional[AgentState], params: RewardParams) -> float:
    """One TD(0) backup; a None next_state is absorbing (max Q' = 0)."""
    q_sa = qtable.value(state, action)
    max_next = 0.0 if next_state is None else qtable.max_value(next_state)
    new = q_sa + params.learning_rate * (reward + params.gamma * max_next - q_sa)
    qtable.update(state, action, new)
    return new


@dataclass
class PendingDecision:
    state: AgentState
    action: int
    t: float


class QLearningController:
    """Per-vehicle decision cycle: observe -> act -> (next cycle) reward + update."""

    def __init__(self, qtable: QTable, params: RewardParams, rng,
                 categories: Dict[str, Category]):
        self.qtable = qtable
        self.params = params
        self.rng = rng
        self.categories = categories
        self.registry = ActiveUserRegistry()
        self._pending: Dict[int, PendingDecision] = {}
        self.decisions = 0

    def decide(self, vehicle_id: int, category: Category, sojourn_s: float,
               t: float, kpi_window) -> Tuple[float, Optional[float], AgentState, int]:
        """Returns (waiting_time, reward_applied_or_None, state, action)."""
        # The decision exchange itself is RSU contact; keep the registry fresh
        # even if none of the vehicle's packets survived the channel.
        self.registry.register_packet(vehicle_id, category.tag)
        state = observe(vehicle_id, sojourn_s, self.registry, category,
                        self.params.n_max)
        reward = self._settle(vehicle_id, category, state, kpi_window)
        action = choose_action(state, self.qtable, self.params, self.rng)
        self._pending[vehicle_id] = PendingDecision(state, action, t)
        self.decisions += 1
        return map_action(action, category), reward, state, action

    def forget(self, vehicle_id: int) -> None:
        """Vehicle departed before its next cycle: the pending decision is
        discarded unsettled, exactly as an RSU that simply stops hearing
        from the vehicle. Settling it against an absorbing zero state would
        let the per-step discount reward vehicles for making fewer
        decisions before leaving, which under congestion teaches every
        category to stall."""
        self._pending.pop(vehicle_id, None)

    def _settle(self, vehicle_id, category, next_state, kpi_window):
        prev = self._pending.pop(vehicle_id, None)
        if prev is None:
            return None
        r_bps, mean_latency = kpi_window
        reward = compute_reward(category, r_bps, mean_latency, self.params)
        q_update(self.qtable, prev.state, prev.action, reward, next_state,
                 self.params)
        return reward

    def reset_episode(self):
        self.registry.clear()
        self._pending.clear()


# ---- Q-table snapshot format -------------------------------------------

SNAPSHOT_HEADER = "# vanetq qtable v1"


def save_qtable(qtable: QTable, params: RewardParams, path) -> None:
    lines = [SNAPSHOT_HEADER,
             f"actions {qtable.n_actions}",
             f"params epsilon={params.epsilon!r} gamma={params.gamma!r} "
             f"learning_rate={params.learning_rate!r} alpha1={params.alpha1!r} "
             f"alpha2={params.alpha2!r} n_max={params.n_max}",
             "sj tv c tcv action q visits"]
    for (state, action) in sorted(qtable.q,
                                  key=lambda k: (k[0].sj, k[0].tv, k[0].c,
                                                 k[0].tcv, k[1])):
        q = qtable.q[(state, action)]
        v = qtable.visits.get((state, action), 0)
        lines.append(f"{state.sj} {state.tv} {state.c} {state.tcv} "
                     f"{action} {q!r} {v}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_qtable(path) -> QTable:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != SNAPSHOT_HEADER:
        raise ValueError(f"{path} is not a qtable snapshot")
    n_actions = int(lines[1].split()[1])
    table = QTable(n_actions)
    # Echo of the parameters the table was trained with; evaluation must
    # rebuild states with the same n_max or every lookup misses.
    table.trained_params = dict(
        item.split("=", 1) for item in lines[2].split()[1:])
    for line in lines[4:]:
        if not line.strip():
            continue
        sj, tv, c, tcv, action, q, visits = line.split()
        key = (AgentState(int(sj), int(tv), int(c), int(tcv)), int(action))
        table.q[key] = float(q)
        table.visits[key] = int(visits)
    return table
