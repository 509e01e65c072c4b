"""Deterministic figure rendering: identical CSV bytes and spec produce
identical image bytes (fixed styles, pinned SVG hash salt, no timestamps).
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import SCHEMAS, read_rows

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_RC = {
    "svg.hashsalt": "colts-plots",
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "path.simplify": False,
}


def aggregate_traces(rows, metric):
    """Per-round mean and population std of a cumulative metric across seeds.

    Returns (t, mean, std) sorted by t.  With two seeds the one-sigma band
    halfwidth equals half the spread between them.
    """
    key = "cum_regret" if metric == "regret" else "cum_risk"
    by_t = {}
    for row in rows:
        by_t.setdefault(row["t"], []).append(row[key])
    ts = sorted(by_t)
    mean = np.array([np.mean(by_t[t]) for t in ts])
    std = np.array([np.std(by_t[t]) for t in ts])
    return np.array(ts), mean, std


def _render_traces(ax, spec):
    for i, (label, path) in enumerate(spec.inputs):
        rows = read_rows(path, SCHEMAS["traces"])
        t, mean, std = aggregate_traces(rows, spec.metric)
        color = _COLORS[i % len(_COLORS)]
        ax.plot(t, mean, color=color, label=label)
        ax.fill_between(t, mean - std, mean + std, color=color, alpha=0.25,
                        linewidth=0)
    ax.set_xlabel("round")
    ax.set_ylabel(f"cumulative {spec.metric}")
    ax.legend(loc="upper left")


def _render_rates_vs_gamma(ax, spec):
    rows = read_rows(spec.inputs[0][1], SCHEMAS["rates_vs_gamma"])
    gamma = np.array([r["gamma"] for r in rows])
    order = np.argsort(gamma)
    for i, key in enumerate(("rate_local", "rate_global", "rate_unsat")):
        vals = np.array([r[key] for r in rows])[order]
        ax.plot(gamma[order], vals, color=_COLORS[i], marker="o", markersize=3,
                label=key.replace("rate_", ""))
    ax.set_xscale("log")
    ax.set_ylim(-0.02, 1.05)
    ax.set_xlabel("perturbation radius")
    ax.set_ylabel("event rate")
    ax.legend(loc="best")


def _render_ratios_vs_m(ax, spec):
    rows = read_rows(spec.inputs[0][1], SCHEMAS["ratios_vs_m"])
    m = np.array([r["m"] for r in rows])
    order = np.argsort(m)
    ax.plot(m[order], np.array([r["regret_ratio"] for r in rows])[order],
            color=_COLORS[0], marker="s", label="regret ratio")
    ax.plot(m[order], np.array([r["time_ratio"] for r in rows])[order],
            color=_COLORS[1], marker="o", label="time ratio")
    ax.axhline(1.0, color="gray", linewidth=0.8)
    ax.set_xlabel("number of constraints")
    ax.set_ylabel("baseline / scaling ratio")
    ax.legend(loc="best")


def _render_resampling_bars(ax, spec):
    rows = read_rows(spec.inputs[0][1], SCHEMAS["resampling_bars"])
    samples = np.array([r["samples"] for r in rows])
    width = 0.35
    ax.bar(samples - width / 2, [r["regret_mean"] for r in rows], width,
           yerr=[r["regret_std"] for r in rows], color=_COLORS[0],
           label="terminal regret", capsize=3)
    ax.bar(samples + width / 2, [r["risk_mean"] for r in rows], width,
           yerr=[r["risk_std"] for r in rows], color=_COLORS[1],
           label="terminal risk", capsize=3)
    ax.set_xticks(samples)
    ax.set_xlabel("samples per round")
    ax.set_ylabel("terminal value")
    ax.legend(loc="best")


_RENDERERS = {
    "traces": _render_traces,
    "rates_vs_gamma": _render_rates_vs_gamma,
    "ratios_vs_m": _render_ratios_vs_m,
    "resampling_bars": _render_resampling_bars,
}


def render(spec):
    """Render the figure described by the spec to its output path."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            _RENDERERS[spec.kind](ax, spec)
            fig.savefig(spec.out, metadata={"Date": None}
                        if spec.out.endswith(".svg") else None)
        finally:
            plt.close(fig)
    return spec.out
