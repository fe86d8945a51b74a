"""Figure construction: four-panel CDF/time-series layouts and fairness bars."""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .data import (CATEGORY_ORDER, SchemaError, load_cdf, load_fairness,
                   load_timeseries)

KINDS = ("latency_cdf", "latency_time", "throughput_cdf", "throughput_time",
         "fairness_bars")

_PANEL_LABELS = {"VO": "(a) voice", "VI": "(b) video", "HD": "(c) HD map",
                 "BE": "(d) best-effort"}


def _no_data(ax):
    ax.annotate("no data", xy=(0.5, 0.5), xycoords="axes fraction",
                ha="center", va="center", color="gray")


def _four_panels(title):
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), constrained_layout=True)
    fig.suptitle(title)
    panel = dict(zip(CATEGORY_ORDER, axes.flat))
    for tag, ax in panel.items():
        ax.set_title(_PANEL_LABELS[tag], fontsize=10)
        ax.grid(True, alpha=0.3)
    return fig, panel


def _finish(fig, panel, out_path):
    handles, labels = None, None
    for ax in panel.values():
        h, l = ax.get_legend_handles_labels()
        if h:
            handles, labels = h, l
            break
    if handles:
        fig.legend(handles, labels, loc="lower center",
                   ncol=max(1, len(labels)), bbox_to_anchor=(0.5, -0.06))
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def _render_cdf(kind, inputs, out_path):
    metric = "latency" if kind == "latency_cdf" else "throughput"
    xlabel = "latency [s]" if metric == "latency" else "throughput [bit/s]"
    fig, panel = _four_panels(f"{metric.capitalize()} CDF per service")
    for tag, ax in panel.items():
        any_data = False
        for mode, run_dir in inputs.items():
            points = load_cdf(run_dir, metric, tag)
            if not points:
                continue
            any_data = True
            ax.plot([v for v, _ in points], [p for _, p in points],
                    drawstyle="steps-post", label=mode)
        if not any_data:
            _no_data(ax)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("P(X ≤ x)")
        ax.set_ylim(0.0, 1.02)
    _finish(fig, panel, out_path)


def _render_time(kind, inputs, out_path):
    metric = "latency" if kind == "latency_time" else "throughput"
    ylabel = "mean latency [s]" if metric == "latency" else "throughput [bit/s]"
    fig, panel = _four_panels(f"{metric.capitalize()} over time per service")
    for tag, ax in panel.items():
        any_data = False
        for mode, run_dir in inputs.items():
            times, tput, lat = load_timeseries(run_dir, tag)
            series = lat if metric == "latency" else tput
            xs = [t for t, y in zip(times, series) if y is not None]
            ys = [y for y in series if y is not None]
            if not xs:
                continue
            any_data = True
            ax.plot(xs, ys, label=mode, linewidth=1.0)
        if not any_data:
            _no_data(ax)
        ax.set_xlabel("time [s]")
        ax.set_ylabel(ylabel)
    _finish(fig, panel, out_path)


def _render_fairness(inputs, out_path):
    fig, ax = plt.subplots(figsize=(8, 5), constrained_layout=True)
    fig.suptitle("Fairness comparison per service (Jain index)")
    modes = list(inputs)
    width = 0.8 / max(1, len(modes))
    for i, mode in enumerate(modes):
        jain = load_fairness(inputs[mode])
        xs = [j + i * width for j in range(len(CATEGORY_ORDER))]
        ys = [jain[tag] if jain[tag] is not None else 0.0
              for tag in CATEGORY_ORDER]
        ax.bar(xs, ys, width=width, label=mode)
    ax.set_xticks([j + 0.4 - width / 2 for j in range(len(CATEGORY_ORDER))])
    ax.set_xticklabels(CATEGORY_ORDER)
    ax.set_xlabel("service category")
    ax.set_ylabel("Jain fairness index")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render(kind, inputs, out_path):
    """Render one figure kind from `{mode: run_dir}` inputs to `out_path`."""
    if kind not in KINDS:
        raise SchemaError(f"unknown figure kind {kind!r}; expected one of {KINDS}")
    if not inputs:
        raise SchemaError("at least one mode=run_dir input is required")
    if kind in ("latency_cdf", "throughput_cdf"):
        _render_cdf(kind, inputs, out_path)
    elif kind in ("latency_time", "throughput_time"):
        _render_time(kind, inputs, out_path)
    else:
        _render_fairness(inputs, out_path)
    return out_path
