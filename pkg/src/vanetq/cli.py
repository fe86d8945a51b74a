"""Command-line entry points: scenario runs and report comparison."""

import json
import os
import sys

import click

from . import __version__
from .agent import load_qtable, save_qtable
from .config import ScenarioConfig, parse_config
from .io import QTABLE, write_run_outputs
from .mac import ConfigError, MODES
from .metrics import ComparisonRefused, compare_reports
from .scenario import Simulation

OUTPUT_ROOT_ENV = "VANETQ_OUTPUT_ROOT"


@click.group()
@click.version_option(__version__)
def main():
    """Deterministic vehicular-network QoS simulator and benchmark harness."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="INI-style scenario file; flags override its values.")
@click.option("--mode", type=click.Choice(MODES), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--episodes", type=int, default=None)
@click.option("--duration", type=float, default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help=f"Output directory (default under ${OUTPUT_ROOT_ENV} or ./runs).")
@click.option("--train/--eval", "train", default=True,
              help="--eval forces epsilon=0 and requires --qtable for agent modes.")
@click.option("--qtable", "qtable_path", type=click.Path(exists=True),
              default=None, help="Q-table snapshot to start from.")
@click.option("--no-logs", is_flag=True, help="Skip packet/decision/MAC logs.")
@click.option("--mac-log/--no-mac-log", default=True)
@click.option("--trace", is_flag=True, help="Export 1 Hz vehicle trace CSV.")
def run(config_path, mode, seed, episodes, duration, out_dir, train,
        qtable_path, no_logs, mac_log, trace):
    """Run one scenario and write its artifacts."""
    try:
        cfg = parse_config(config_path) if config_path else ScenarioConfig()
        if mode is not None:
            cfg.mode = mode
        if seed is not None:
            cfg.master_seed = seed
        if episodes is not None:
            cfg.episodes = episodes
        if duration is not None:
            cfg.episode_duration = duration
        if qtable_path is not None:
            cfg.qtable_path = qtable_path
        cfg.train = train
        if not train:
            cfg.reward.epsilon = 0.0
        cfg.write_logs = not no_logs
        cfg.write_mac_log = mac_log
        cfg.write_trace = trace
        if out_dir is None:
            root = os.environ.get(OUTPUT_ROOT_ENV, "runs")
            out_dir = os.path.join(
                root, f"{cfg.mode}-seed{cfg.master_seed}"
                      f"-{'train' if train else 'eval'}")
        cfg.output_dir = out_dir
        cfg.validate()
        qtable = load_qtable(cfg.qtable_path) if cfg.qtable_path else None
        if not train and cfg.mode.startswith("agent") and qtable is None:
            raise ConfigError("--eval in an agent mode requires --qtable")
        if qtable is not None and "n_max" in qtable.trained_params:
            # State lookups only hit the table if tv/tcv are clamped the
            # same way they were during training.
            cfg.reward.n_max = int(qtable.trained_params["n_max"])
        sim = Simulation(cfg, qtable=qtable)
        result = sim.run(version=__version__)
        write_run_outputs(out_dir, result, cfg, sim.collector)
        if result.qtable is not None:
            save_qtable(result.qtable, cfg.reward,
                        os.path.join(out_dir, QTABLE))
        summary = result.episode_summaries[-1]
        click.echo(f"mode={cfg.mode} seed={cfg.master_seed} "
                   f"episodes={cfg.episodes} "
                   f"delivered={result.report['totals']['packets_delivered']} "
                   f"last_episode_events={summary.events}")
        click.echo(f"outputs written to {out_dir}")
    except ConfigError as exc:
        raise click.ClickException(f"config error: {exc}")
    except OSError as exc:
        raise click.ClickException(f"I/O error: {exc}")


@main.command()
@click.argument("report_a", type=click.Path(exists=True))
@click.argument("report_b", type=click.Path(exists=True))
@click.option("--fail-if-hd-latency-improvement-below", "hd_threshold",
              type=float, default=None,
              help="Exit 2 unless B improves HD mean latency over A by at "
                   "least this percentage.")
def compare(report_a, report_b, hd_threshold):
    """Compare two run reports (B relative to A); prints per-category deltas."""
    with open(report_a) as fh:
        a = json.load(fh)
    with open(report_b) as fh:
        b = json.load(fh)
    try:
        delta = compare_reports(a, b)
    except ComparisonRefused as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(delta, indent=2, sort_keys=True))
    if hd_threshold is not None:
        hd = delta["categories"]["HD"]["latency_improvement_pct"]
        if hd is None or hd < hd_threshold:
            click.echo(f"HD latency improvement {hd} below threshold "
                       f"{hd_threshold}", err=True)
            sys.exit(2)


if __name__ == "__main__":
    main()
