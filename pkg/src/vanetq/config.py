"""Scenario configuration: defaults, flat INI-style files, validation."""

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, asdict
from typing import Optional

from .agent import RewardParams
from .mac import MODES, PRESETS, ConfigError
from .traffic import default_categories


@dataclass
class ScenarioConfig:
    mode: str = "no-qos"
    master_seed: int = 0
    episodes: int = 50
    episode_duration: float = 250.0
    entry_interval: float = 0.66
    tile_width: float = 300.0
    tile_height: float = 100.0
    coverage_diameter: float = 200.0
    speed_min: float = 8.0
    speed_max: float = 17.0
    bandwidth_preset: str = "p-5.9GHz-10MHz"
    retry_limit: int = 7
    queue_capacity: int = 2
    registry_ttl: int = 10
    stationary_sojourn_cap: float = 20.0
    reward: RewardParams = field(default_factory=RewardParams)
    category_overrides: dict = field(default_factory=dict)
    output_dir: Optional[str] = None
    qtable_path: Optional[str] = None
    train: bool = True
    write_logs: bool = True
    write_mac_log: bool = True
    write_trace: bool = False

    def categories(self):
        cats = default_categories()
        for tag, overrides in self.category_overrides.items():
            if tag not in cats:
                raise ConfigError(f"unknown category {tag!r}")
            cats[tag] = dataclasses.replace(cats[tag], **overrides)
        return cats

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.bandwidth_preset not in PRESETS:
            raise ConfigError(f"unknown bandwidth preset {self.bandwidth_preset!r}")
        if self.entry_interval <= 0:
            raise ConfigError("entry_interval must be positive")
        if self.episode_duration < 0:
            raise ConfigError("episode_duration must be non-negative")
        if self.episodes < 1:
            raise ConfigError("episodes must be at least 1")
        if not 0 < self.speed_min <= self.speed_max <= 17.0:
            raise ConfigError("speed range must satisfy 0 < min <= max <= 17")
        if self.coverage_diameter <= 0:
            raise ConfigError("coverage_diameter must be positive")
        if self.queue_capacity < 1:
            raise ConfigError("queue_capacity must be at least 1")
        try:
            self.reward.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        self.categories()  # raises on bad overrides
        return self

    def echo(self) -> dict:
        d = asdict(self)
        d["reward"] = asdict(self.reward)
        return d

    def config_hash(self) -> str:
        echo = self.echo()
        for transient in ("output_dir", "write_logs", "write_mac_log",
                          "write_trace"):
            echo.pop(transient, None)
        blob = json.dumps(echo, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


_SCENARIO_FIELDS = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)
                    if f.name not in ("reward", "category_overrides")}
_REWARD_FIELDS = {f.name for f in dataclasses.fields(RewardParams)}
_CATEGORY_FIELDS = {"source_rate", "packet_size", "max_latency", "min_rate",
                    "max_wait", "penalty", "bonus"}

_BOOL_FIELDS = {"train", "write_logs", "write_mac_log", "write_trace",
                "penalties_enabled", "be_bonus_enabled"}
_INT_FIELDS = {"master_seed", "episodes", "retry_limit", "queue_capacity",
               "registry_ttl", "n_max", "packet_size"}
_STR_FIELDS = {"mode", "bandwidth_preset", "output_dir", "qtable_path"}


def _coerce(key, raw):
    if key in _STR_FIELDS:
        return raw
    if key in _BOOL_FIELDS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        return int(raw) if key in _INT_FIELDS else float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def parse_config(path) -> ScenarioConfig:
    """Flat key-value file with [scenario], [reward], [category.X] sections."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    cfg = ScenarioConfig()
    for section in parser.sections():
        if section == "scenario":
            for key, raw in parser.items(section):
                if key not in _SCENARIO_FIELDS:
                    raise ConfigError(f"unknown scenario key {key!r}")
                setattr(cfg, key, _coerce(key, raw))
        elif section == "reward":
            for key, raw in parser.items(section):
                if key not in _REWARD_FIELDS:
                    raise ConfigError(f"unknown reward key {key!r}")
                setattr(cfg.reward, key, _coerce(key, raw))
        elif section.startswith("category."):
            tag = section.split(".", 1)[1]
            overrides = {}
            for key, raw in parser.items(section):
                if key not in _CATEGORY_FIELDS:
                    raise ConfigError(f"unknown category key {key!r}")
                overrides[key] = _coerce(key, raw)
            cfg.category_overrides[tag] = overrides
        else:
            raise ConfigError(f"unknown config section {section!r}")
    alpha_sum = cfg.reward.alpha1 + cfg.reward.alpha2
    if abs(alpha_sum - 1.0) > 1e-9:
        import warnings
        warnings.warn(f"alpha1 + alpha2 = {alpha_sum}, expected 1.0")
    return cfg.validate()
