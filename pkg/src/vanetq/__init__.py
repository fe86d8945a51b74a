"""Deterministic single-RSU vehicular network simulator with a Q-learning
waiting-time controller and MAC-level QoS baselines."""

__version__ = "0.1.0"
